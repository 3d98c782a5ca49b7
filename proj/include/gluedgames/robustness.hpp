#pragma once

#include <cstdint>

#include "gluedgames/selftest.hpp"

namespace gluedgames {

/// One verified inequality: the measured quantity, the bound it must
/// dominate, and the slack (measured - bound, nonnegative up to roundoff).
struct LemmaRecord {
  std::string lemma;
  double epsilon = 0.0;
  double delta = 0.0;  // second input deficit, where the bound has one
  double bound = 0.0;
  double measured = 0.0;
  double slack = 0.0;
  bool rider_applicable = false;  // both expectations real
  bool rider_holds = true;        // ... then so is the product's
};

/// Product bound: Re<psi|A|psi> >= 1-eps and Re<psi|B|psi> >= 1-delta give
/// Re<psi|AB|psi> >= 1 - (sqrt(eps)+sqrt(delta))^2. Also records whether
/// real factor expectations produced a real product expectation.
LemmaRecord check_lrmul(const Vector& psi, const Matrix& a, const Matrix& b,
                        double tol = kDefaultTol);

/// Cycling bound: <psi|(U x I)|psi> and <psi|(A x B)|psi> both >= 1-eps give
/// <psi|(A U A* x I)|psi> >= 1-9 eps, with eps the larger measured deficit.
LemmaRecord check_cycling(const BipartiteState& psi, const Matrix& u,
                          const Matrix& a, const Matrix& b,
                          double tol = kDefaultTol);

/// Direct-summand bound: if <psi|(A x I)|psi> >= 1-eps and phi is a
/// component of a direct-sum split of psi (a dyad-wise rescaling of psi's
/// Schmidt terms by coefficients in [0,1]), then <phi|(A x I)|phi> >=
/// ||phi||^2 - eps. Throws when phi is not such a component.
LemmaRecord check_identity_decomposition(const BipartiteState& psi,
                                         const BipartiteState& phi,
                                         const Matrix& a,
                                         double tol = kDefaultTol);

/// Eigenspace bound: approximate commutation of A and E on psi survives the
/// restriction to E's negative eigenspace, at cost 1/||(E- x I)psi||^2.
LemmaRecord check_commutation_decomposition(const BipartiteState& psi,
                                            const Matrix& a, const Matrix& e,
                                            double rank_tol = kRankTol,
                                            double tol = kDefaultTol);

/// Per-variable commutation defects 1 - Re<psi|(E A_i E A_i x I)|psi> of a
/// glued part's odd-line product, at any strategy quality.
struct DefectRecord {
  double winning_probability = 0.0;
  double deficit = 0.0;
  std::vector<ResidualEntry> defects;
  double max_defect = 0.0;
};

DefectRecord approx_commutation_defect(const LcsGame& game,
                                       const BipartiteStrategy& strat,
                                       std::vector<int> odd_line_vars,
                                       Side side, double tol = kDefaultTol);

/// Conjugates every observable by exp(i s H) with independent random
/// self-adjoint unit-norm H, calibrating one global scale s so the
/// winning probability lands within 10% of 1 - target_deficit.
/// Deterministic in the seed; target 0 returns the input unchanged.
BipartiteStrategy perturb_strategy(const LcsGame& game,
                                   const BipartiteStrategy& strat,
                                   double target_deficit, std::uint64_t seed);

/// Which equation supplies the fixed observable for a variable that has
/// equation-specific overrides.
enum class FixedObservableChoice { kLowestEquation, kHighestEquation };

/// Extraction data for one part of a near-perfect glued-magic-square
/// strategy: the mass of the projected state, per-relation residuals of the
/// compressed operators on it, and the winning probability after snapping
/// the compressions back to observables.
struct ExtractionPart {
  bool present = false;
  double norm_squared = 0.0;  // ||(E- x G-)|psi>||^2
  std::vector<ResidualEntry> relation_residuals;
  double max_relation_residual = 0.0;
  double unitarized_ms_value = 0.0;
  double cross_consistency = 0.0;  // <psi|(E- x G+)|psi>, O(eps)
};

/// Reporting convention: the per-relation residuals are the quantities the
/// eigenspace bounds control directly; the unitarized winning probability is
/// a secondary single-scalar summary (compressions are not unitary, so a
/// literal winning probability needs the sign-snapping step).
struct ExtractionReport {
  double winning_probability = 0.0;
  double epsilon = 0.0;
  FixedObservableChoice choice = FixedObservableChoice::kLowestEquation;
  std::array<ExtractionPart, 2> parts;
  bool degenerate = false;
};

ExtractionReport robust_decompose_gms(
    const BipartiteStrategy& strat,
    FixedObservableChoice choice = FixedObservableChoice::kLowestEquation,
    double guard = 0.05, double tol = kDefaultTol);

/// One row of a sweep: a lemma bound instance drawn from a perturbed
/// strategy.
struct SweepRow {
  std::uint64_t seed = 0;
  double epsilon = 0.0;  // target deficit of the generating strategy
  std::string lemma;
  double bound = 0.0;
  double measured = 0.0;
  double slack = 0.0;
};

struct ExtractionRow {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double measured_deficit = 0.0;
  double max_defect = 0.0;
  double max_relation_residual = 0.0;
  double min_unitarized_ms_value = 0.0;
};

/// Full robustness sweep over a (deficit grid) x (seeds) grid of perturbed
/// copies of a base strategy: per-lemma bound rows, per-point extraction
/// rows, and least-squares slopes through the origin for the linear-decay
/// fits. Points run in parallel; rows are emitted in grid order.
struct RobustSweepResult {
  std::vector<SweepRow> lemma_rows;
  std::vector<ExtractionRow> extraction_rows;
  double defect_slope = 0.0;
  double extraction_slope = 0.0;
  bool defect_monotone = false;
  bool extraction_monotone = false;
  double min_lemma_slack = 0.0;
};

RobustSweepResult robust_sweep(const BipartiteStrategy& base,
                               const std::vector<double>& eps_grid,
                               const std::vector<std::uint64_t>& seeds,
                               FixedObservableChoice choice =
                                   FixedObservableChoice::kLowestEquation);

/// Self-adjoint involution closest to a self-adjoint contraction: snap each
/// eigenvalue to its sign (nonnegative to +1).
Matrix sign_involution(const Matrix& m);

}  // namespace gluedgames
