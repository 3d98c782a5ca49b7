#include "gluedgames/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gluedgames/parallel.hpp"

namespace gluedgames {

namespace {

double clamp_deficit(double re) { return std::max(0.0, 1.0 - re); }

constexpr double kRiderInputTol = 1e-14;
constexpr double kRiderOutputTol = 1e-12;

// A projected component below this mass is treated as an absent part.
constexpr double kExtractionCutoff = 1e-3;

Matrix ordered_product(const std::vector<Matrix>& ops,
                       const std::vector<int>& vars) {
  Matrix prod = identity(ops.at(vars.front()).rows());
  for (int v : vars) prod = prod * ops.at(v);
  return prod;
}

}  // namespace

Matrix sign_involution(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  Vector snapped(m.rows());
  for (Index i = 0; i < m.rows(); ++i)
    snapped(i) = eig.eigenvalues()(i) >= 0.0 ? 1.0 : -1.0;
  return symmetrize(eig.eigenvectors() * snapped.asDiagonal() *
                    eig.eigenvectors().adjoint());
}

LemmaRecord check_lrmul(const Vector& psi, const Matrix& a, const Matrix& b,
                        double tol) {
  require_unitary(a, tol, "check_lrmul A");
  require_unitary(b, tol, "check_lrmul B");
  if (a.cols() != psi.size() || b.cols() != psi.size())
    throw std::invalid_argument("check_lrmul: dimension mismatch");

  const Complex ea = psi.dot(a * psi);
  const Complex eb = psi.dot(b * psi);
  const Complex eab = psi.dot(a * (b * psi));

  LemmaRecord record;
  record.lemma = "lrmul";
  record.epsilon = clamp_deficit(ea.real());
  record.delta = clamp_deficit(eb.real());
  const double root = std::sqrt(record.epsilon) + std::sqrt(record.delta);
  record.bound = 1.0 - root * root;
  record.measured = eab.real();
  record.slack = record.measured - record.bound;
  record.rider_applicable = std::abs(ea.imag()) <= kRiderInputTol &&
                            std::abs(eb.imag()) <= kRiderInputTol;
  record.rider_holds =
      !record.rider_applicable || std::abs(eab.imag()) <= kRiderOutputTol;
  return record;
}

LemmaRecord check_cycling(const BipartiteState& psi, const Matrix& u,
                          const Matrix& a, const Matrix& b, double tol) {
  require_unitary(u, tol, "check_cycling U");
  require_unitary(a, tol, "check_cycling A");
  require_unitary(b, tol, "check_cycling B");

  LemmaRecord record;
  record.lemma = "cycling";
  record.epsilon =
      std::max(clamp_deficit(expect_alice(u, psi).real()),
               clamp_deficit(expect_joint(a, b, psi).real()));
  record.bound = 1.0 - 9.0 * record.epsilon;
  record.measured =
      expect_alice(a * u * a.adjoint(), psi).real();
  record.slack = record.measured - record.bound;
  return record;
}

LemmaRecord check_identity_decomposition(const BipartiteState& psi,
                                         const BipartiteState& phi,
                                         const Matrix& a, double tol) {
  if (phi.dim_a != psi.dim_a || phi.dim_b != psi.dim_b)
    throw std::invalid_argument(
        "check_identity_decomposition: phi lives on a different space");
  if (hermiticity_error(a) > tol)
    throw std::invalid_argument(
        "check_identity_decomposition: A is not self-adjoint");
  if (operator_norm(a) > 1.0 + tol)
    throw std::invalid_argument(
        "check_identity_decomposition: A has norm above 1");

  // phi must rescale psi's Schmidt dyads by coefficients in [0, 1].
  SchmidtDecomposition d = schmidt(psi);
  BipartiteState recomposed{psi.dim_a, psi.dim_b,
                            Vector::Zero(psi.amp.size())};
  const double summand_tol = std::max(tol, 1e-7);
  for (Index i = 0; i < d.rank(); ++i) {
    BipartiteState dyad{psi.dim_a, psi.dim_b, Vector(psi.amp.size())};
    for (Index p = 0; p < psi.dim_a; ++p)
      for (Index q = 0; q < psi.dim_b; ++q)
        dyad.amp(p * psi.dim_b + q) = d.alice_basis(p, i) * d.bob_basis(q, i);
    const Complex c = inner(dyad, phi);
    const Complex alpha = c / d.coefficients(i);
    if (std::abs(alpha.imag()) > summand_tol || alpha.real() < -summand_tol ||
        alpha.real() > 1.0 + summand_tol)
      throw std::invalid_argument(
          "check_identity_decomposition: phi is not a direct-sum component "
          "of psi (dyad coefficient out of [0,1])");
    recomposed.amp += c * dyad.amp;
  }
  if ((recomposed.amp - phi.amp).norm() > summand_tol)
    throw std::invalid_argument(
        "check_identity_decomposition: phi is not a direct-sum component of "
        "psi (off-dyad remainder)");

  LemmaRecord record;
  record.lemma = "identity-decomposition";
  record.epsilon = clamp_deficit(expect_alice(a, psi).real());
  record.bound = phi.amp.squaredNorm() - record.epsilon;
  record.measured = expect_alice(a, phi).real();
  record.slack = record.measured - record.bound;
  return record;
}

LemmaRecord check_commutation_decomposition(const BipartiteState& psi,
                                            const Matrix& a, const Matrix& e,
                                            double rank_tol, double tol) {
  require_observable(a, tol, "check_commutation_decomposition A");
  require_observable(e, tol, "check_commutation_decomposition E");

  const Matrix e_minus = 0.5 * (identity(e.rows()) - e);
  BipartiteState projected = apply_alice(e_minus, psi);
  const double mass = projected.amp.squaredNorm();
  if (std::sqrt(mass) <= rank_tol)
    throw std::invalid_argument(
        "check_commutation_decomposition: (E- x I)|psi> vanishes, the "
        "restricted state is undefined");
  BipartiteState phi = projected;
  phi.amp /= std::sqrt(mass);

  LemmaRecord record;
  record.lemma = "commutation-decomposition";
  record.epsilon = clamp_deficit(
      expect_alice(a * e * a.adjoint() * e.adjoint(), psi).real());
  record.bound = 1.0 - record.epsilon / mass;
  record.measured =
      expect_alice(a * e_minus * a.adjoint() * e_minus.adjoint(), phi).real();
  record.slack = record.measured - record.bound;
  return record;
}

DefectRecord approx_commutation_defect(const LcsGame& game,
                                       const BipartiteStrategy& strat,
                                       std::vector<int> odd_line_vars,
                                       Side side, double tol) {
  if (odd_line_vars.empty())
    throw std::invalid_argument("approx_commutation_defect: empty odd line");
  std::sort(odd_line_vars.begin(), odd_line_vars.end());

  DefectRecord record;
  record.winning_probability = winning_probability(game, strat, tol);
  record.deficit = clamp_deficit(record.winning_probability);

  const std::vector<Matrix>& ops =
      (side == Side::Alice) ? strat.alice : strat.bob;
  const Matrix e = ordered_product(ops, odd_line_vars);
  for (int i : part_of_variable(game, odd_line_vars.front())) {
    // E is only near-self-adjoint away from the perfect case, so the walk
    // closes with its adjoint; 1 - Re<.> is then half the squared commutator
    // residual when E is exactly self-adjoint.
    const Matrix walk = e * ops[i] * e.adjoint() * ops[i];
    const double expectation = (side == Side::Alice)
                                   ? expect_alice(walk, strat.state).real()
                                   : expect_bob(walk, strat.state).real();
    record.defects.push_back(
        {"variable " + std::to_string(i), 1.0 - expectation});
  }
  record.max_defect = max_residual(record.defects);
  return record;
}

namespace {

struct HermitianRotation {
  Matrix vectors;
  RealVector values;

  Matrix at(double scale) const {
    Vector phases(values.size());
    for (Index i = 0; i < values.size(); ++i)
      phases(i) = std::exp(Complex(0.0, scale * values(i)));
    return vectors * phases.asDiagonal() * vectors.adjoint();
  }
};

HermitianRotation random_rotation(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix h(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) h(i, j) = Complex(gauss(rng), gauss(rng));
  h = symmetrize(h);
  h /= operator_norm(h);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  return HermitianRotation{eig.eigenvectors(), eig.eigenvalues()};
}

}  // namespace

BipartiteStrategy perturb_strategy(const LcsGame& game,
                                   const BipartiteStrategy& strat,
                                   double target_deficit, std::uint64_t seed) {
  if (target_deficit < 0.0 || target_deficit > 0.2)
    throw std::invalid_argument(
        "perturb_strategy: target deficit must lie in [0, 0.2]");
  if (target_deficit == 0.0) return strat;

  std::mt19937_64 rng(seed);
  std::vector<HermitianRotation> alice_rot, bob_rot;
  for (int i = 0; i < strat.num_vars(); ++i)
    alice_rot.push_back(random_rotation(strat.dim_a(), rng));
  for (int i = 0; i < strat.num_vars(); ++i)
    bob_rot.push_back(random_rotation(strat.dim_b(), rng));
  std::vector<HermitianRotation> per_eq_rot;
  for (size_t i = 0; i < strat.alice_per_equation.size(); ++i)
    per_eq_rot.push_back(random_rotation(strat.dim_a(), rng));

  auto at_scale = [&](double s) {
    BipartiteStrategy out;
    out.state = strat.state;
    out.alice.reserve(strat.alice.size());
    out.bob.reserve(strat.bob.size());
    for (int i = 0; i < strat.num_vars(); ++i) {
      Matrix u = alice_rot[i].at(s);
      out.alice.push_back(symmetrize(u * strat.alice[i] * u.adjoint()));
      u = bob_rot[i].at(s);
      out.bob.push_back(symmetrize(u * strat.bob[i] * u.adjoint()));
    }
    size_t at = 0;
    for (const auto& [key, obs] : strat.alice_per_equation) {
      Matrix u = per_eq_rot[at++].at(s);
      out.alice_per_equation[key] = symmetrize(u * obs * u.adjoint());
    }
    return out;
  };
  auto deficit_at = [&](double s) {
    return clamp_deficit(winning_probability(game, at_scale(s)));
  };

  double lo = 0.0, hi = 0.0;
  for (double s = 0.05; s <= 6.4; s *= 2.0) {
    if (deficit_at(s) >= target_deficit) {
      hi = s;
      break;
    }
    lo = s;
  }
  if (hi == 0.0)
    throw std::runtime_error(
        "perturb_strategy: could not bracket the target deficit");
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double deficit = deficit_at(mid);
    if (std::abs(deficit - target_deficit) <= 0.1 * target_deficit)
      return at_scale(mid);
    (deficit < target_deficit ? lo : hi) = mid;
  }
  throw std::runtime_error(
      "perturb_strategy: deficit calibration did not converge");
}

namespace {

std::vector<int> equations_containing(const LcsGame& game, int var) {
  std::vector<int> eqs;
  for (int x = 0; x < game.num_equations(); ++x)
    if (game.system.equations[x].coeffs[var] != 0) eqs.push_back(x);
  return eqs;
}

}  // namespace

ExtractionReport robust_decompose_gms(const BipartiteStrategy& strat,
                                      FixedObservableChoice choice,
                                      double guard, double tol) {
  const LcsGame gms = glued_magic_square();
  ExtractionReport report;
  report.choice = choice;
  report.winning_probability = winning_probability(gms, strat, tol);
  report.epsilon = clamp_deficit(report.winning_probability);
  if (report.epsilon > guard) {
    std::ostringstream os;
    os << "robust_decompose_gms: deficit " << report.epsilon
       << " exceeds the guard " << guard;
    throw std::invalid_argument(os.str());
  }

  // One observable per variable: the override of the chosen equation when
  // present, the shared observable otherwise.
  std::vector<Matrix> fixed_a(18);
  for (int i = 0; i < 18; ++i) {
    const std::vector<int> eqs = equations_containing(gms, i);
    const int x = (choice == FixedObservableChoice::kLowestEquation)
                      ? eqs.front()
                      : eqs.back();
    fixed_a[i] = strat.alice_obs(x, i);
  }

  const Equation& merged =
      gms.system.equations[odd_equation_index(gms.system)];
  std::vector<int> part1, part2;
  for (int v : merged.support()) (v < 9 ? part1 : part2).push_back(v);

  const Matrix e_inv = sign_involution(ordered_product(fixed_a, part1));
  const Matrix f_inv = sign_involution(ordered_product(fixed_a, part2));
  const Matrix g_inv = sign_involution(ordered_product(strat.bob, part1));
  const Matrix h_inv = sign_involution(ordered_product(strat.bob, part2));
  const Index na = strat.dim_a(), nb = strat.dim_b();
  const Matrix e_minus = 0.5 * (identity(na) - e_inv);
  const Matrix f_minus = 0.5 * (identity(na) - f_inv);
  const Matrix g_minus = 0.5 * (identity(nb) - g_inv);
  const Matrix h_minus = 0.5 * (identity(nb) - h_inv);

  const LcsGame ms = magic_square();
  bool any_present = false;
  for (int k : {1, 2}) {
    ExtractionPart& part = report.parts[k - 1];
    const Matrix& pa = (k == 1) ? e_minus : f_minus;
    const Matrix& pb = (k == 1) ? g_minus : h_minus;
    BipartiteState phi = apply_joint(pa, pb, strat.state);
    part.norm_squared = phi.amp.squaredNorm();
    if (part.norm_squared <= kExtractionCutoff) continue;
    part.present = true;
    any_present = true;
    phi.amp /= std::sqrt(part.norm_squared);

    auto actual_var = [&](int p) { return (k == 1) ? p : 17 - p; };

    // Relation residuals of the compressed operators on the projected state.
    for (int x = 0; x < ms.num_equations(); ++x) {
      Matrix ra = identity(na);
      Matrix rb = identity(nb);
      for (int p : ms.system.equations[x].support()) {
        ra = ra * (pa * fixed_a[actual_var(p)] * pa);
        rb = rb * (pb * strat.bob[actual_var(p)] * pb);
      }
      part.relation_residuals.push_back(
          {"equation " + std::to_string(x),
           1.0 - expect_joint(ra, rb, phi).real()});
    }
    part.max_relation_residual = max_residual(part.relation_residuals);

    // Snap the compressions back to observables and score the result.
    const Index rank_a = static_cast<Index>(std::lround(pa.real().trace()));
    const Index rank_b = static_cast<Index>(std::lround(pb.real().trace()));
    const Matrix qa = projector_basis(Projector{pa, rank_a}, tol);
    const Matrix qb = projector_basis(Projector{pb, rank_b}, tol);
    BipartiteStrategy sub;
    sub.state = apply_joint(qa.adjoint(), qb.adjoint(), phi);
    sub.alice.resize(9);
    sub.bob.resize(9);
    for (int p = 0; p < 9; ++p) {
      sub.alice[p] =
          sign_involution(qa.adjoint() * fixed_a[actual_var(p)] * qa);
      sub.bob[p] =
          sign_involution(qb.adjoint() * strat.bob[actual_var(p)] * qb);
    }
    part.unitarized_ms_value = winning_probability(ms, sub, tol);

    part.cross_consistency =
        expect_joint(pa, identity(nb) - pb, strat.state).real();
  }
  if (!any_present)
    throw std::runtime_error(
        "robust_decompose_gms: both projected components vanish; nothing to "
        "extract");
  report.degenerate =
      !(report.parts[0].present && report.parts[1].present);
  return report;
}

namespace {

struct SweepPointResult {
  std::vector<SweepRow> lemma_rows;
  ExtractionRow extraction;
};

SweepPointResult sweep_point(const LcsGame& gms, const BipartiteStrategy& base,
                             double eps, std::uint64_t seed,
                             FixedObservableChoice choice) {
  SweepPointResult out;
  const BipartiteStrategy s = perturb_strategy(gms, base, eps, seed);
  const BipartiteState& psi = s.state;
  const Index na = s.dim_a(), nb = s.dim_b();
  const double deficit = clamp_deficit(winning_probability(gms, s));

  auto push = [&](const LemmaRecord& record) {
    out.lemma_rows.push_back(SweepRow{seed, eps, record.lemma, record.bound,
                                      record.measured, record.slack});
  };

  // Signed relation operators: products along each equation, pointed so the
  // expectation sits near +1.
  std::vector<Matrix> rel_a, rel_b;
  for (const Equation& eq : gms.system.equations) {
    const double sign = eq.rhs ? -1.0 : 1.0;
    Matrix ra = sign * identity(na);
    Matrix rb = sign * identity(nb);
    for (int v : eq.support()) {
      ra = ra * s.alice[v];
      rb = rb * s.bob[v];
    }
    rel_a.push_back(ra);
    rel_b.push_back(rb);
  }

  for (size_t x = 0; x + 1 < rel_a.size(); ++x) {
    push(check_lrmul(psi.amp, tensor(rel_a[x], identity(nb)),
                     tensor(rel_a[x + 1], identity(nb))));
    push(check_lrmul(psi.amp, tensor(identity(na), rel_b[x]),
                     tensor(identity(na), rel_b[x + 1])));
  }

  for (int i = 0; i < s.num_vars(); ++i) {
    const int x = equations_containing(gms, i).front();
    push(check_cycling(psi, rel_a[x], s.alice[i], s.bob[i]));
  }

  // Direct-sum components assembled from the state's own Schmidt dyads,
  // grouped by which side of the split the first part's odd-column product
  // puts them on.
  const Equation& merged =
      gms.system.equations[odd_equation_index(gms.system)];
  std::vector<int> part1, part2;
  for (int v : merged.support()) (v < 9 ? part1 : part2).push_back(v);
  const Matrix e_snap = sign_involution(ordered_product(s.alice, part1));
  const Matrix f_snap = sign_involution(ordered_product(s.alice, part2));
  {
    const SchmidtDecomposition d = schmidt(psi);
    const Matrix e_minus = 0.5 * (identity(na) - e_snap);
    BipartiteState inside{na, nb, Vector::Zero(psi.amp.size())};
    BipartiteState outside{na, nb, Vector::Zero(psi.amp.size())};
    for (Index i = 0; i < d.rank(); ++i) {
      Vector dyad(psi.amp.size());
      for (Index p = 0; p < na; ++p)
        for (Index q = 0; q < nb; ++q)
          dyad(p * nb + q) = d.alice_basis(p, i) * d.bob_basis(q, i);
      const Complex weight =
          d.alice_basis.col(i).dot(e_minus * d.alice_basis.col(i));
      if (weight.real() > 0.5)
        inside.amp += d.coefficients(i) * dyad;
      else
        outside.amp += d.coefficients(i) * dyad;
    }
    for (int x : {0, 5, 10}) {
      const Matrix a = symmetrize(rel_a[x]);
      if (inside.amp.norm() > 1e-6)
        push(check_identity_decomposition(psi, inside, a));
      if (outside.amp.norm() > 1e-6)
        push(check_identity_decomposition(psi, outside, a));
    }
  }

  for (int i : part1) push(check_commutation_decomposition(psi, s.alice[i], e_snap));
  for (int i : part2) push(check_commutation_decomposition(psi, s.alice[i], f_snap));

  const DefectRecord defect =
      approx_commutation_defect(gms, s, part1, Side::Alice);
  const ExtractionReport extraction = robust_decompose_gms(s, choice);
  double max_rel = 0.0;
  double min_value = 1.0;
  for (const ExtractionPart& part : extraction.parts) {
    if (!part.present) continue;
    max_rel = std::max(max_rel, part.max_relation_residual);
    min_value = std::min(min_value, part.unitarized_ms_value);
  }
  out.extraction = ExtractionRow{seed,    eps,     deficit,
                                 defect.max_defect, max_rel, min_value};
  return out;
}

double origin_slope(const std::vector<std::pair<double, double>>& points) {
  double xy = 0.0, xx = 0.0;
  for (const auto& [x, y] : points) {
    xy += x * y;
    xx += x * x;
  }
  return xx > 0.0 ? xy / xx : 0.0;
}

}  // namespace

RobustSweepResult robust_sweep(const BipartiteStrategy& base,
                               const std::vector<double>& eps_grid,
                               const std::vector<std::uint64_t>& seeds,
                               FixedObservableChoice choice) {
  const LcsGame gms = glued_magic_square();
  std::vector<std::pair<double, std::uint64_t>> points;
  for (double eps : eps_grid)
    for (std::uint64_t seed : seeds) points.emplace_back(eps, seed);

  std::vector<SweepPointResult> results(points.size());
  parallel_for(points.size(), [&](std::size_t idx) {
    results[idx] = sweep_point(gms, base, points[idx].first,
                               points[idx].second, choice);
  });

  RobustSweepResult out;
  out.min_lemma_slack = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> defect_points, extraction_points;
  for (const SweepPointResult& r : results) {
    for (const SweepRow& row : r.lemma_rows) {
      out.min_lemma_slack = std::min(out.min_lemma_slack, row.slack);
      out.lemma_rows.push_back(row);
    }
    out.extraction_rows.push_back(r.extraction);
    defect_points.emplace_back(r.extraction.measured_deficit,
                               r.extraction.max_defect);
    extraction_points.emplace_back(r.extraction.measured_deficit,
                                   r.extraction.max_relation_residual);
  }
  out.defect_slope = origin_slope(defect_points);
  out.extraction_slope = origin_slope(extraction_points);

  // Monotone decay of the grid-level means as the target deficit shrinks.
  std::vector<double> grid = eps_grid;
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  auto mean_at = [&](double eps, auto&& project) {
    double sum = 0.0;
    int count = 0;
    for (const ExtractionRow& row : out.extraction_rows)
      if (row.epsilon == eps) {
        sum += project(row);
        ++count;
      }
    return count > 0 ? sum / count : 0.0;
  };
  out.defect_monotone = true;
  out.extraction_monotone = true;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    out.defect_monotone =
        out.defect_monotone &&
        mean_at(grid[i], [](const ExtractionRow& r) { return r.max_defect; }) >
            mean_at(grid[i + 1],
                    [](const ExtractionRow& r) { return r.max_defect; });
    out.extraction_monotone =
        out.extraction_monotone &&
        mean_at(grid[i],
                [](const ExtractionRow& r) {
                  return r.max_relation_residual;
                }) > mean_at(grid[i + 1], [](const ExtractionRow& r) {
                  return r.max_relation_residual;
                });
  }
  return out;
}

}  // namespace gluedgames
