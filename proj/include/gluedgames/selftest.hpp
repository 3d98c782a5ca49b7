#pragma once

#include <array>
#include <optional>

#include "gluedgames/strategies.hpp"

namespace gluedgames {

/// Residuals for "an operator preserving the state acts as the identity on
/// the state's support": delta1 measures preservation, delta2 the distance
/// from the identity on the support, and implied_bound is delta1 scaled by
/// the inverse Schmidt coefficients, which caps delta2 whenever the
/// hypothesis holds.
struct StatePreservationReport {
  double state_residual = 0.0;    // ||(G (x) I)|psi> - |psi>||
  double support_residual = 0.0;  // ||(G - I) P_supp||
  double implied_bound = 0.0;
  bool hypothesis_holds = false;
  bool implication_holds = false;
};

StatePreservationReport check_state_preservation_identity(
    const Matrix& g, const BipartiteState& psi, double tol = kDefaultTol);

/// Strategy compressed onto the state's Schmidt supports, together with the
/// isometries (columns: support bases) embedding the compressed spaces back
/// into the originals. The compressed state has full Schmidt rank.
struct SupportRestriction {
  BipartiteStrategy strategy;
  Matrix alice_basis;
  Matrix bob_basis;
};

/// Requires every variable's consistency to be 1 within tol (which forces
/// observables to preserve the supports); throws, naming the observable, if
/// any observable leaks off the support by more than tol.
SupportRestriction restrict_to_support(const BipartiteStrategy& strat,
                                       double tol = kDefaultTol);

/// Commutation of a glued part's odd-line product E with every observable of
/// that part, measured on the state. The claim is only asserted for
/// strategies that win the glued game (the hypothesis), so the report keeps
/// hypothesis and residuals separate.
struct CommutationReport {
  double winning_probability = 0.0;
  bool hypothesis_holds = false;
  std::vector<ResidualEntry> residuals;
  double max_value = 0.0;

  bool pass(double tol = kDefaultTol) const {
    return hypothesis_holds && max_value <= tol;
  }
};

CommutationReport check_glue_commutation(const LcsGame& game,
                                         const BipartiteStrategy& strat,
                                         std::vector<int> odd_line_vars,
                                         Side side, double tol = kDefaultTol);

/// Relations of the nine-observable grid generated by four commuting
/// involutions: generators sit at positions 0, 1, 3, 4 and every other
/// position is the forced product, with the odd column multiplying to I.
struct RepresentationReport {
  std::vector<ResidualEntry> residuals;
  double max_value = 0.0;

  bool pass(double tol = kDefaultTol) const { return max_value <= tol; }
};

RepresentationReport verify_representation(const std::array<Matrix, 9>& obs,
                                           double tol = kDefaultTol);

struct SchmidtCluster {
  double value = 0.0;
  int multiplicity = 0;
};

/// Schmidt coefficients clustered at the given relative gap. A state equals
/// |psi_4> (x) |aux| up to local isometry exactly when every cluster's
/// multiplicity is divisible by four; `pass` records that signature.
struct StateSelftestReport {
  std::vector<SchmidtCluster> clusters;
  bool pass = false;
};

StateSelftestReport check_state_selftest(const BipartiteState& state,
                                         double rank_tol = kRankTol,
                                         double cluster_gap = kClusterGap);

/// One restricted part of a decomposed glued-magic-square strategy.
struct SubstrategyRecord {
  bool present = false;  // false on the degenerate (zero-weight) branch
  double weight = 0.0;
  BipartiteStrategy strategy;  // on its block, variables mapped to 0..8
  double magic_square_value = 0.0;
  RepresentationReport representation;  // complementary observables
  StateSelftestReport state_signature;
};

/// Full output of the perfect-strategy decomposition: the odd-column
/// products and their negative eigenprojectors, the two state components,
/// block projectors, named proof-step residuals and per-part verdicts. When
/// the input state lacked full Schmidt rank all reported operators live on
/// the compressed space; `restriction` then carries the support bases.
struct DecompositionReport {
  bool restricted = false;
  std::optional<SupportRestriction> restriction;

  Matrix e, f, g, h;
  Projector e_minus, f_minus, g_minus, h_minus;
  std::array<Projector, 3> alice_blocks;  // H_A^0, H_A^1, H_A^2
  std::array<Projector, 3> bob_blocks;
  BipartiteState phi1, phi2;  // unnormalised components of |psi>

  std::vector<ResidualEntry> residuals;
  double max_residual_value = 0.0;
  StateSelftestReport full_state_signature;
  std::array<SubstrategyRecord, 2> parts;
  bool degenerate = false;
  double tol = kDefaultTol;
  bool pass = false;
};

/// Runs the decomposition argument on a perfect glued-magic-square strategy:
/// restricts to the support, splits along the two odd-column eigenspaces,
/// scores both restricted parts on the magic square game, checks that each
/// block's complementary observables form a sign-representation grid, and
/// tests the Schmidt multiplicity signature of every state involved.
/// Throws if the strategy is imperfect or any proof step fails its
/// tolerance.
DecompositionReport decompose_gms(const BipartiteStrategy& strat,
                                  double tol = kDefaultTol);

struct ConvexDilationReport {
  double state_residual = 0.0;
  std::vector<ResidualEntry> alice;
  std::vector<ResidualEntry> bob;
  double max_value = 0.0;

  bool pass(double tol = kDefaultTol) const { return max_value <= tol; }
};

/// Checks the direct-sum dilation equations U|psi> = (+)_k alpha_k
/// |psi~_k>|aux_k> and their measured-state versions. Each witness holds the
/// block row of the stacked isometry (domain: the full local space, codomain:
/// ideal_k (x) aux_k); the stacked maps must be isometries. Auxiliary states
/// may differ between blocks. With one block this is verify_local_dilation.
ConvexDilationReport verify_convex_dilation(
    const BipartiteStrategy& strat, const std::vector<BipartiteStrategy>& ideals,
    const std::vector<DilationWitness>& witnesses,
    const std::vector<double>& weights, double tol = kDefaultTol);

}  // namespace gluedgames
