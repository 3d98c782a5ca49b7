#include "gluedgames/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gluedgames {

StatePreservationReport check_state_preservation_identity(
    const Matrix& g, const BipartiteState& psi, double tol) {
  require_square(g, "check_state_preservation_identity operator");
  if (g.rows() != psi.dim_a)
    throw std::invalid_argument(
        "check_state_preservation_identity: operator acts on the wrong space");
  require_unit_state(psi, std::max(tol, 1e-6), "state");

  StatePreservationReport report;
  report.state_residual = (apply_alice(g, psi).amp - psi.amp).norm();

  SchmidtDecomposition d = schmidt(psi);
  Matrix p = d.alice_basis * d.alice_basis.adjoint();
  report.support_residual =
      operator_norm((g - identity(g.rows())) * symmetrize(p));

  double inv_sq = 0.0;
  for (Index i = 0; i < d.rank(); ++i)
    inv_sq += 1.0 / (d.coefficients(i) * d.coefficients(i));
  report.implied_bound = report.state_residual * std::sqrt(inv_sq);

  report.hypothesis_holds = report.state_residual <= tol;
  report.implication_holds =
      !report.hypothesis_holds ||
      report.support_residual <= report.implied_bound + tol;
  return report;
}

SupportRestriction restrict_to_support(const BipartiteStrategy& strat,
                                       double tol) {
  for (int i = 0; i < strat.num_vars(); ++i) {
    if (std::abs(consistency(strat, i) - 1.0) > tol) {
      std::ostringstream os;
      os << "restrict_to_support: variable " << i
         << " is not consistent on the state (value " << consistency(strat, i)
         << ")";
      throw std::invalid_argument(os.str());
    }
  }

  SchmidtDecomposition d = schmidt(strat.state);
  const Matrix& va = d.alice_basis;
  const Matrix& vb = d.bob_basis;
  const Matrix pa = va * va.adjoint();
  const Matrix pb = vb * vb.adjoint();
  const Index r = d.rank();

  auto check_leak = [&](const Matrix& obs, const Matrix& p, Side side,
                        const std::string& name) {
    const Matrix ident = identity(p.rows());
    double leak = operator_norm((ident - p) * obs * p);
    if (leak > tol) {
      std::ostringstream os;
      os << "restrict_to_support: " << name << " leaks off the "
         << (side == Side::Alice ? "Alice" : "Bob") << " support (norm "
         << leak << ")";
      throw std::invalid_argument(os.str());
    }
  };

  SupportRestriction out;
  out.alice_basis = va;
  out.bob_basis = vb;
  out.strategy.alice.reserve(strat.alice.size());
  out.strategy.bob.reserve(strat.bob.size());
  for (int i = 0; i < strat.num_vars(); ++i) {
    check_leak(strat.alice[i], pa, Side::Alice,
               "Alice observable " + std::to_string(i));
    out.strategy.alice.push_back(va.adjoint() * strat.alice[i] * va);
    check_leak(strat.bob[i], pb, Side::Bob,
               "Bob observable " + std::to_string(i));
    out.strategy.bob.push_back(vb.adjoint() * strat.bob[i] * vb);
  }
  for (const auto& [key, obs] : strat.alice_per_equation) {
    check_leak(obs, pa, Side::Alice,
               "per-equation Alice observable (" + std::to_string(key.first) +
                   "," + std::to_string(key.second) + ")");
    out.strategy.alice_per_equation[key] = va.adjoint() * obs * va;
  }

  // In the Schmidt bases the state is diagonal with the coefficients on the
  // diagonal, so the compressed state has full rank on both sides.
  out.strategy.state = BipartiteState{r, r, Vector::Zero(r * r)};
  for (Index i = 0; i < r; ++i)
    out.strategy.state.amp(i * r + i) = d.coefficients(i);
  return out;
}

namespace {

Matrix ordered_product(const std::vector<Matrix>& ops,
                       const std::vector<int>& vars) {
  Matrix prod = identity(ops.at(vars.front()).rows());
  for (int v : vars) prod = prod * ops.at(v);
  return prod;
}

}  // namespace

CommutationReport check_glue_commutation(const LcsGame& game,
                                         const BipartiteStrategy& strat,
                                         std::vector<int> odd_line_vars,
                                         Side side, double tol) {
  if (odd_line_vars.empty())
    throw std::invalid_argument("check_glue_commutation: empty odd line");
  std::sort(odd_line_vars.begin(), odd_line_vars.end());

  CommutationReport report;
  report.winning_probability = winning_probability(game, strat, tol);
  report.hypothesis_holds = report.winning_probability >= 1.0 - tol;

  const std::vector<Matrix>& ops =
      (side == Side::Alice) ? strat.alice : strat.bob;
  const Matrix e = ordered_product(ops, odd_line_vars);
  const std::vector<int> part = part_of_variable(game, odd_line_vars.front());
  for (int i : part) {
    const Matrix comm = e * ops[i] - ops[i] * e;
    const double value = (side == Side::Alice)
                             ? apply_alice(comm, strat.state).norm()
                             : apply_bob(comm, strat.state).norm();
    report.residuals.push_back({"variable " + std::to_string(i), value});
  }
  report.max_value = max_residual(report.residuals);
  return report;
}

RepresentationReport verify_representation(const std::array<Matrix, 9>& obs,
                                           double tol) {
  (void)tol;
  RepresentationReport report;
  const Index n = obs[0].rows();
  const Matrix ident = identity(n);
  auto add = [&](const std::string& label, const Matrix& diff) {
    report.residuals.push_back({label, operator_norm(diff)});
  };
  for (int p = 0; p < 9; ++p) {
    std::ostringstream label;
    label << "square " << p;
    add(label.str(), obs[p] * obs[p] - ident);
  }
  constexpr int kGenerators[4] = {0, 1, 3, 4};
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) {
      const Matrix& a = obs[kGenerators[u]];
      const Matrix& b = obs[kGenerators[v]];
      std::ostringstream label;
      label << "commutator (" << kGenerators[u] << "," << kGenerators[v] << ")";
      add(label.str(), a * b - b * a);
    }
  add("product 2 = 0*1", obs[2] - obs[0] * obs[1]);
  add("product 5 = 3*4", obs[5] - obs[3] * obs[4]);
  add("product 6 = 0*3", obs[6] - obs[0] * obs[3]);
  add("product 7 = 1*4", obs[7] - obs[1] * obs[4]);
  add("product 8 = 6*7", obs[8] - obs[6] * obs[7]);
  add("odd column 2*5*8", obs[2] * obs[5] * obs[8] - ident);
  report.max_value = max_residual(report.residuals);
  return report;
}

StateSelftestReport check_state_selftest(const BipartiteState& state,
                                         double rank_tol, double cluster_gap) {
  SchmidtDecomposition d = schmidt(state, rank_tol);
  StateSelftestReport report;
  for (Index i = 0; i < d.rank(); ++i) {
    const double value = d.coefficients(i);
    if (!report.clusters.empty() &&
        report.clusters.back().value - value <=
            cluster_gap * report.clusters.back().value) {
      ++report.clusters.back().multiplicity;
    } else {
      report.clusters.push_back({value, 1});
    }
  }
  report.pass = true;
  for (const SchmidtCluster& c : report.clusters)
    report.pass = report.pass && (c.multiplicity % 4 == 0);
  return report;
}

namespace {

// Weight below which a component counts as absent (the degenerate branch of
// the decomposition).
bool negligible_weight(double weight, double tol) {
  return weight * weight <= 100.0 * tol;
}

struct StepRecorder {
  std::vector<ResidualEntry>* table;
  double tol;

  void operator()(const std::string& label, double value) const {
    table->push_back({label, value});
    if (value > tol) {
      std::ostringstream os;
      os << "decompose_gms: step '" << label << "' has residual " << value
         << " > " << tol;
      throw std::runtime_error(os.str());
    }
  }
};

}  // namespace

DecompositionReport decompose_gms(const BipartiteStrategy& input, double tol) {
  const LcsGame gms = glued_magic_square();
  const double wp = winning_probability(gms, input, tol);
  if (wp < 1.0 - tol) {
    std::ostringstream os;
    os << "decompose_gms: winning probability " << wp << " < 1-tol";
    throw std::invalid_argument(os.str());
  }

  DecompositionReport report;
  report.tol = tol;

  // Work on the support so the state has full Schmidt rank; skip the
  // change of basis when it already does.
  BipartiteStrategy strat;
  {
    SchmidtDecomposition d = schmidt(input.state);
    if (d.rank() == input.dim_a() && d.rank() == input.dim_b()) {
      strat = input;
    } else {
      report.restricted = true;
      report.restriction = restrict_to_support(input, tol);
      strat = report.restriction->strategy;
    }
  }
  const Index na = strat.dim_a();
  const Index nb = strat.dim_b();
  StepRecorder step{&report.residuals, tol};

  // Odd-column products of the two parts, from the merged equation.
  const Equation& merged =
      gms.system.equations[odd_equation_index(gms.system)];
  std::vector<int> part1, part2;
  for (int v : merged.support()) (v < 9 ? part1 : part2).push_back(v);

  report.e = ordered_product(strat.alice, part1);
  report.f = ordered_product(strat.alice, part2);
  report.g = ordered_product(strat.bob, part1);
  report.h = ordered_product(strat.bob, part2);

  step("E involution", observable_error(report.e));
  step("F involution", observable_error(report.f));
  step("G involution", observable_error(report.g));
  step("H involution", observable_error(report.h));
  {
    std::vector<int> rev1(part1.rbegin(), part1.rend());
    std::vector<int> rev2(part2.rbegin(), part2.rend());
    step("E factor order",
         apply_alice(report.e - ordered_product(strat.alice, rev1),
                     strat.state)
             .norm());
    step("F factor order",
         apply_alice(report.f - ordered_product(strat.alice, rev2),
                     strat.state)
             .norm());
  }

  // (EF)^+ annihilates the state and E^- + F^- preserves it.
  const Matrix ef_plus = 0.5 * (identity(na) + report.e * report.f);
  step("(EF)+ expectation",
       std::abs(expect_alice(ef_plus, strat.state).real()));
  report.e_minus = Projector{symmetrize(0.5 * (identity(na) - report.e)), 0};
  Projector f_minus{symmetrize(0.5 * (identity(na) - report.f)), 0};
  report.f_minus = f_minus;
  report.g_minus = Projector{symmetrize(0.5 * (identity(nb) - report.g)), 0};
  report.h_minus = Projector{symmetrize(0.5 * (identity(nb) - report.h)), 0};
  step("(E- + F-) preserves state",
       (apply_alice(report.e_minus.mat + report.f_minus.mat, strat.state).amp -
        strat.state.amp)
           .norm());

  // Anti-correlation across the parts kills the mixed blocks.
  step("(F x G) anticorrelation",
       (apply_joint(report.f, report.g, strat.state).amp + strat.state.amp)
           .norm());
  step("(E x H) anticorrelation",
       (apply_joint(report.e, report.h, strat.state).amp + strat.state.amp)
           .norm());
  step("(F- x G-) cross block",
       apply_joint(report.f_minus.mat, report.g_minus.mat, strat.state)
           .amp.norm());
  step("(E- x H-) cross block",
       apply_joint(report.e_minus.mat, report.h_minus.mat, strat.state)
           .amp.norm());

  report.phi1 =
      apply_joint(report.e_minus.mat, report.g_minus.mat, strat.state);
  report.phi2 =
      apply_joint(report.f_minus.mat, report.h_minus.mat, strat.state);
  step("state decomposition",
       (report.phi1.amp + report.phi2.amp - strat.state.amp).norm());

  const double w1 = report.phi1.norm();
  const double w2 = report.phi2.norm();
  step("weight normalisation", std::abs(w1 * w1 + w2 * w2 - 1.0));
  report.degenerate =
      negligible_weight(w1, tol) || negligible_weight(w2, tol);

  // Subspace split: intersect the negative eigenspaces with the (full)
  // support on each side.
  const Projector supp_a{identity(na), na};
  const Projector supp_b{identity(nb), nb};
  report.alice_blocks[1] = intersect_projectors(report.e_minus, supp_a, tol);
  report.alice_blocks[2] = intersect_projectors(report.f_minus, supp_a, tol);
  report.bob_blocks[1] = intersect_projectors(report.g_minus, supp_b, tol);
  report.bob_blocks[2] = intersect_projectors(report.h_minus, supp_b, tol);
  report.e_minus.rank = report.alice_blocks[1].rank;
  report.f_minus.rank = report.alice_blocks[2].rank;
  report.g_minus.rank = report.bob_blocks[1].rank;
  report.h_minus.rank = report.bob_blocks[2].rank;
  report.alice_blocks[0] = Projector{
      identity(na) - report.alice_blocks[1].mat - report.alice_blocks[2].mat,
      na - report.alice_blocks[1].rank - report.alice_blocks[2].rank};
  report.bob_blocks[0] = Projector{
      identity(nb) - report.bob_blocks[1].mat - report.bob_blocks[2].mat,
      nb - report.bob_blocks[1].rank - report.bob_blocks[2].rank};
  step("block completeness Alice",
       operator_norm(report.alice_blocks[0].mat));
  step("block completeness Bob", operator_norm(report.bob_blocks[0].mat));

  // Every observable must preserve both blocks on each side.
  {
    double worst = 0.0;
    std::string worst_name;
    auto leak = [&](const Matrix& obs, const Projector& block,
                    const std::string& name) {
      double v =
          operator_norm((identity(block.mat.rows()) - block.mat) * obs *
                        block.mat);
      if (v > worst) {
        worst = v;
        worst_name = name;
      }
    };
    for (int i = 0; i < strat.num_vars(); ++i) {
      for (int b : {1, 2}) {
        leak(strat.alice[i], report.alice_blocks[b],
             "Alice observable " + std::to_string(i));
        leak(strat.bob[i], report.bob_blocks[b],
             "Bob observable " + std::to_string(i));
      }
    }
    if (worst > tol) {
      std::ostringstream os;
      os << "decompose_gms: " << worst_name
         << " does not preserve the block split (leak " << worst << ")";
      throw std::runtime_error(os.str());
    }
    report.residuals.push_back({"block invariance", worst});
  }

  // Restrict each part to its block and score it on the magic square.
  const LcsGame ms = magic_square();
  for (int k : {1, 2}) {
    SubstrategyRecord& record = report.parts[k - 1];
    record.weight = (k == 1) ? w1 : w2;
    if (negligible_weight(record.weight, tol)) continue;
    record.present = true;

    const Projector& block_a = report.alice_blocks[k];
    const Projector& block_b = report.bob_blocks[k];
    const Matrix qa = projector_basis(block_a, tol);
    const Matrix qb = projector_basis(block_b, tol);
    const BipartiteState& phi = (k == 1) ? report.phi1 : report.phi2;

    BipartiteState unit = phi;
    unit.amp /= record.weight;
    step("phi" + std::to_string(k) + " block support",
         (apply_joint(block_a.mat, block_b.mat, unit).amp - unit.amp).norm());

    record.strategy.state = apply_joint(qa.adjoint(), qb.adjoint(), unit);
    // Active observables: variables 0..8 for part one; the mirrored
    // variables 17..9 for part two (variable 17 - p plays grid cell p).
    record.strategy.alice.resize(9);
    record.strategy.bob.resize(9);
    std::array<Matrix, 9> complementary;
    for (int p = 0; p < 9; ++p) {
      const int active = (k == 1) ? p : 17 - p;
      const int inactive = (k == 1) ? 17 - p : p;
      record.strategy.alice[p] = qa.adjoint() * strat.alice[active] * qa;
      record.strategy.bob[p] = qb.adjoint() * strat.bob[active] * qb;
      complementary[p] = qa.adjoint() * strat.alice[inactive] * qa;
    }
    record.magic_square_value = winning_probability(ms, record.strategy, tol);
    record.representation = verify_representation(complementary, tol);
    record.state_signature = check_state_selftest(record.strategy.state);
  }

  report.full_state_signature = check_state_selftest(strat.state);
  report.max_residual_value = max_residual(report.residuals);

  report.pass = report.max_residual_value <= tol;
  for (const SubstrategyRecord& record : report.parts) {
    if (!record.present) continue;
    report.pass = report.pass &&
                  record.magic_square_value >= 1.0 - tol &&
                  record.representation.pass(tol) &&
                  record.state_signature.pass;
  }
  report.pass = report.pass && report.full_state_signature.pass;
  return report;
}

ConvexDilationReport verify_convex_dilation(
    const BipartiteStrategy& strat, const std::vector<BipartiteStrategy>& ideals,
    const std::vector<DilationWitness>& witnesses,
    const std::vector<double>& weights, double tol) {
  const size_t n = ideals.size();
  if (witnesses.size() != n || weights.size() != n || n == 0)
    throw std::invalid_argument(
        "verify_convex_dilation: ideals, witnesses and weights must align");
  for (const BipartiteStrategy& ideal : ideals)
    if (ideal.num_vars() != strat.num_vars())
      throw std::invalid_argument(
          "verify_convex_dilation: observable count mismatch");

  // Stack the block rows into the full isometries.
  Index rows_a = 0, rows_b = 0;
  for (size_t k = 0; k < n; ++k) {
    const DilationWitness& w = witnesses[k];
    if (w.isometry_a.cols() != strat.dim_a() ||
        w.isometry_b.cols() != strat.dim_b())
      throw std::invalid_argument(
          "verify_convex_dilation: witness domain mismatch");
    if (w.isometry_a.rows() != ideals[k].dim_a() * w.aux.dim_a ||
        w.isometry_b.rows() != ideals[k].dim_b() * w.aux.dim_b)
      throw std::invalid_argument(
          "verify_convex_dilation: witness codomain mismatch");
    rows_a += w.isometry_a.rows();
    rows_b += w.isometry_b.rows();
  }
  Matrix ua(rows_a, strat.dim_a());
  Matrix ub(rows_b, strat.dim_b());
  Index at_a = 0, at_b = 0;
  for (const DilationWitness& w : witnesses) {
    ua.middleRows(at_a, w.isometry_a.rows()) = w.isometry_a;
    ub.middleRows(at_b, w.isometry_b.rows()) = w.isometry_b;
    at_a += w.isometry_a.rows();
    at_b += w.isometry_b.rows();
  }
  require_unitary(ua, tol, "stacked isometry U_A");
  require_unitary(ub, tol, "stacked isometry U_B");

  auto target = [&](const std::vector<BipartiteState>& mapped_states) {
    std::vector<std::pair<double, BipartiteState>> parts;
    parts.reserve(n);
    for (size_t k = 0; k < n; ++k)
      parts.emplace_back(weights[k],
                         tensor_states(mapped_states[k], witnesses[k].aux));
    return embed_direct_sum_state(parts, std::max(tol, 1e-6));
  };

  ConvexDilationReport report;
  std::vector<BipartiteState> plain;
  plain.reserve(n);
  for (const BipartiteStrategy& ideal : ideals) plain.push_back(ideal.state);
  report.state_residual =
      (apply_joint(ua, ub, strat.state).amp - target(plain).amp).norm();

  for (int i = 0; i < strat.num_vars(); ++i) {
    std::vector<BipartiteState> mapped;
    mapped.reserve(n);
    for (const BipartiteStrategy& ideal : ideals)
      mapped.push_back(apply_alice(ideal.alice[i], ideal.state));
    BipartiteState lhs =
        apply_joint(ua, ub, apply_alice(strat.alice[i], strat.state));
    report.alice.push_back({"alice obs " + std::to_string(i),
                            (lhs.amp - target(mapped).amp).norm()});

    mapped.clear();
    for (const BipartiteStrategy& ideal : ideals)
      mapped.push_back(apply_bob(ideal.bob[i], ideal.state));
    lhs = apply_joint(ua, ub, apply_bob(strat.bob[i], strat.state));
    report.bob.push_back({"bob obs " + std::to_string(i),
                          (lhs.amp - target(mapped).amp).norm()});
  }
  report.max_value =
      std::max({report.state_residual, max_residual(report.alice),
                max_residual(report.bob)});
  return report;
}

}  // namespace gluedgames
