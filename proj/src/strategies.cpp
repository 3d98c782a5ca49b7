#include "gluedgames/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gluedgames {

const Matrix& BipartiteStrategy::alice_obs(int equation, int var) const {
  auto it = alice_per_equation.find({equation, var});
  if (it != alice_per_equation.end()) return it->second;
  return alice.at(var);
}

void validate_strategy(const LcsGame& game, const BipartiteStrategy& strat,
                       double tol) {
  if (strat.num_vars() != game.num_vars() ||
      static_cast<int>(strat.bob.size()) != game.num_vars())
    throw std::invalid_argument(
        "strategy: observable count does not match the game's variables");
  require_unit_state(strat.state, std::max(tol, 1e-6), "strategy state");
  for (int i = 0; i < strat.num_vars(); ++i) {
    if (strat.alice[i].rows() != strat.dim_a())
      throw std::invalid_argument("strategy: Alice observable " +
                                  std::to_string(i) + " has wrong dimension");
    if (strat.bob[i].rows() != strat.dim_b())
      throw std::invalid_argument("strategy: Bob observable " +
                                  std::to_string(i) + " has wrong dimension");
    require_observable(strat.alice[i], tol,
                       "Alice observable " + std::to_string(i));
    require_observable(strat.bob[i], tol, "Bob observable " + std::to_string(i));
  }
  for (const auto& [key, obs] : strat.alice_per_equation) {
    const auto& [x, i] = key;
    if (x < 0 || x >= game.num_equations() || i < 0 || i >= game.num_vars())
      throw std::invalid_argument("strategy: per-equation key out of range");
    if (obs.rows() != strat.dim_a())
      throw std::invalid_argument(
          "strategy: per-equation observable has wrong dimension");
    require_observable(obs, tol, "per-equation Alice observable");
  }
}

double winning_probability(const LcsGame& game, const BipartiteStrategy& strat,
                           double tol) {
  validate_strategy(game, strat, tol);
  const Index n = strat.dim_a();
  double total = 0.0;
  for (int x = 0; x < game.num_equations(); ++x) {
    const Equation& eq = game.system.equations[x];
    const std::vector<int> supp = eq.support();
    const int m = static_cast<int>(supp.size());

    std::vector<std::pair<Matrix, Matrix>> projs;  // (answer 0, answer 1)
    projs.reserve(m);
    for (int v : supp) {
      const Matrix& a = strat.alice_obs(x, v);
      projs.emplace_back(0.5 * (identity(n) + a), 0.5 * (identity(n) - a));
    }

    // Walk the binary tree of sequential outcomes; each leaf's squared norm
    // is the probability of that answer string.
    struct Node {
      int depth;
      unsigned bits;
      BipartiteState vec;
    };
    std::vector<Node> stack{{0, 0u, strat.state}};
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (node.depth < m) {
        stack.push_back({node.depth + 1, node.bits,
                         apply_alice(projs[node.depth].first, node.vec)});
        stack.push_back(
            {node.depth + 1, node.bits | (1u << node.depth),
             apply_alice(projs[node.depth].second, node.vec)});
        continue;
      }
      if (__builtin_popcount(node.bits) % 2 != eq.rhs) continue;
      // The equation is satisfied; a pair (x, y) is won iff Bob's outcome
      // matches Alice's value at y.
      for (int t = 0; t < m; ++t) {
        const Matrix& b = strat.bob[supp[t]];
        const int bit = (node.bits >> t) & 1u;
        Matrix proj = bit ? Matrix(0.5 * (identity(strat.dim_b()) - b))
                          : Matrix(0.5 * (identity(strat.dim_b()) + b));
        total += apply_bob(proj, node.vec).amp.squaredNorm();
      }
    }
  }
  return total / static_cast<double>(game.question_pairs.size());
}

double consistency(const BipartiteStrategy& strat, int var) {
  if (var < 0 || var >= strat.num_vars())
    throw std::out_of_range("consistency: variable index out of range");
  return expect_joint(strat.alice[var], strat.bob[var], strat.state).real();
}

namespace {

Matrix pauli2(const Matrix& a, const Matrix& b) { return tensor(a, b); }

}  // namespace

BipartiteStrategy ideal_magic_square() {
  const Matrix x = pauli_x(), y = pauli_y(), z = pauli_z(), i = identity(2);
  BipartiteStrategy s;
  s.state = max_entangled(4);
  s.alice = {pauli2(z, i), pauli2(i, z), pauli2(z, z),
             pauli2(i, x), pauli2(x, i), pauli2(x, x),
             pauli2(z, x), pauli2(x, z), pauli2(y, y)};
  s.bob = s.alice;  // all nine are real symmetric
  return s;
}

BipartiteStrategy ideal_magic_pentagram() {
  const Matrix x = pauli_x(), y = pauli_y(), i = identity(2);
  auto p3 = [&](const Matrix& a, const Matrix& b, const Matrix& c) {
    return tensor(tensor(a, b), c);
  };
  BipartiteStrategy s;
  s.state = max_entangled(8);
  s.alice = {p3(x, i, i), p3(y, x, y), p3(x, x, x), p3(x, y, y), p3(y, y, x),
             p3(i, x, i), p3(i, y, i), p3(y, i, i), p3(i, i, x), p3(i, i, y)};
  // The single-Y nodes are imaginary, so Bob needs the entry-wise transpose
  // for consistency on the maximally entangled state.
  s.bob.reserve(10);
  for (const Matrix& a : s.alice) s.bob.push_back(a.transpose());
  return s;
}

CharacterRepresentation representation_from_characters(
    std::vector<std::array<int, 4>> characters, Matrix basis) {
  if (characters.empty())
    throw std::invalid_argument("representation: need at least one character");
  for (const auto& chi : characters)
    for (int s : chi)
      if (s != 1 && s != -1)
        throw std::invalid_argument("representation: characters must be +/-1");
  if (basis.rows() != static_cast<Index>(characters.size()))
    throw std::invalid_argument(
        "representation: basis dimension does not match character count");
  require_unitary(basis, kDefaultTol, "representation basis");
  return CharacterRepresentation{std::move(characters), std::move(basis)};
}

Matrix representation_image(const CharacterRepresentation& rep,
                            unsigned word_mask) {
  Vector diag(rep.dim());
  for (Index r = 0; r < rep.dim(); ++r) {
    int sign = 1;
    for (int g = 0; g < 4; ++g)
      if (word_mask & (1u << g)) sign *= rep.characters[r][g];
    diag(r) = static_cast<double>(sign);
  }
  return rep.basis * diag.asDiagonal() * rep.basis.adjoint();
}

std::array<Matrix, 9> representation_grid(const CharacterRepresentation& rep) {
  // Grid words over generators e1..e4 (bits 0..3): rows (e1, e2, e1e2),
  // (e3, e4, e3e4), (e1e3, e2e4, e1e2e3e4).
  constexpr unsigned kWords[9] = {0b0001, 0b0010, 0b0011, 0b0100, 0b1000,
                                  0b1100, 0b0101, 0b1010, 0b1111};
  std::array<Matrix, 9> grid;
  for (int p = 0; p < 9; ++p) grid[p] = representation_image(rep, kWords[p]);
  return grid;
}

Matrix bell_basis() {
  Matrix b(4, 4);
  const double r = 1.0 / std::sqrt(2.0);
  b.setZero();
  b(0, 0) = r;  b(3, 0) = r;   // (|00> + |11>)
  b(0, 1) = r;  b(3, 1) = -r;  // (|00> - |11>)
  b(1, 2) = r;  b(2, 2) = r;   // (|01> + |10>)
  b(1, 3) = r;  b(2, 3) = -r;  // (|01> - |10>)
  return b;
}

BipartiteStrategy build_glued_strategy(int part,
                                       const CharacterRepresentation& rep,
                                       double tol) {
  if (part != 1 && part != 2)
    throw std::invalid_argument("build_glued_strategy: part must be 1 or 2");
  if (rep.dim() != 4)
    throw std::invalid_argument(
        "build_glued_strategy: representation must have dimension 4");
  const BipartiteStrategy ideal = ideal_magic_square();
  const std::array<Matrix, 9> grid = representation_grid(rep);

  double worst = 0.0;
  for (const Matrix& g : grid)
    for (int q : {2, 5, 8})
      worst = std::max(worst,
                       operator_norm(g * ideal.alice[q] - ideal.alice[q] * g));
  if (worst > tol) {
    std::ostringstream os;
    os << "build_glued_strategy: representation does not commute with the "
          "ideal odd column (max commutator norm "
       << worst << ")";
    throw std::invalid_argument(os.str());
  }

  BipartiteStrategy s;
  s.state = max_entangled(4);
  s.alice.resize(18);
  for (int p = 0; p < 9; ++p) {
    if (part == 1) {
      s.alice[p] = ideal.alice[p];
      s.alice[17 - p] = grid[p];
    } else {
      s.alice[p] = grid[p];
      s.alice[17 - p] = ideal.alice[p];
    }
  }
  s.bob.resize(18);
  for (int j = 0; j < 18; ++j) s.bob[j] = s.alice[j].transpose();
  return s;
}

BipartiteStrategy convex_combination(
    const std::vector<std::pair<double, BipartiteStrategy>>& parts,
    double tol) {
  if (parts.empty())
    throw std::invalid_argument("convex_combination: no parts");
  const int vars = parts.front().second.num_vars();
  double wsq = 0.0;
  for (const auto& [w, part] : parts) {
    if (part.num_vars() != vars)
      throw std::invalid_argument(
          "convex_combination: parts disagree on the variable count");
    wsq += w * w;
  }
  if (std::abs(wsq - 1.0) > tol)
    throw std::invalid_argument(
        "convex_combination: weights are not l2-normalised");

  BipartiteStrategy out;
  {
    std::vector<std::pair<double, BipartiteState>> states;
    states.reserve(parts.size());
    for (const auto& [w, part] : parts) states.emplace_back(w, part.state);
    out.state = embed_direct_sum_state(states, tol);
  }
  out.alice.reserve(vars);
  out.bob.reserve(vars);
  std::vector<Matrix> blocks(parts.size());
  for (int i = 0; i < vars; ++i) {
    for (size_t k = 0; k < parts.size(); ++k)
      blocks[k] = parts[k].second.alice[i];
    out.alice.push_back(direct_sum(blocks));
    for (size_t k = 0; k < parts.size(); ++k) blocks[k] = parts[k].second.bob[i];
    out.bob.push_back(direct_sum(blocks));
  }
  // Equation-specific observables direct-sum too, falling back to the shared
  // observable in parts that have no override.
  std::vector<std::pair<int, int>> keys;
  for (const auto& [w, part] : parts)
    for (const auto& [key, obs] : part.alice_per_equation) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& key : keys) {
    for (size_t k = 0; k < parts.size(); ++k)
      blocks[k] = parts[k].second.alice_obs(key.first, key.second);
    out.alice_per_equation[key] = direct_sum(blocks);
  }
  return out;
}

BipartiteStrategy example_strategy(double alpha, double beta,
                                   const BipartiteState& xi, double tol) {
  if (alpha <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("example_strategy: weights must be positive");
  if (std::abs(alpha * alpha + beta * beta - 1.0) > tol)
    throw std::invalid_argument(
        "example_strategy: weights are not l2-normalised");
  if (xi.dim_a != 5 || xi.dim_b != 5)
    throw std::invalid_argument(
        "example_strategy: auxiliary state must live on C^5 (x) C^5");
  require_unit_state(xi, tol, "example_strategy auxiliary state");

  const BipartiteStrategy ideal = ideal_magic_square();
  Vector d1(4), d2(4);
  d1 << 1, -1, 1, 1;
  d2 << -1, -1, 1, -1;
  const Matrix gen1 = d1.asDiagonal();  // generator image, block one
  const Matrix gen2 = d2.asDiagonal();  // generator image, block two
  const Matrix i4 = identity(4), i5 = identity(5);
  auto grid_at = [](const Matrix& gen, const Matrix& id, int p) {
    // All four generators share one image, so products of two or four
    // generators collapse to the identity; only positions 0, 1, 3, 4 keep it.
    return (p == 0 || p == 1 || p == 3 || p == 4) ? gen : id;
  };

  BipartiteStrategy s;
  s.state = embed_direct_sum_state(
      {{alpha, max_entangled(4)}, {beta, tensor_states(max_entangled(4), xi)}},
      tol);
  s.alice.resize(18);
  for (int p = 0; p < 9; ++p) {
    s.alice[p] =
        direct_sum({ideal.alice[p], tensor(grid_at(gen1, i4, p), i5)});
    s.alice[17 - p] =
        direct_sum({grid_at(gen2, i4, p), tensor(ideal.alice[p], i5)});
  }
  s.bob = s.alice;  // every block is real symmetric
  return s;
}

BipartiteStrategy conjugate_local(const BipartiteStrategy& strat,
                                  const Matrix& u_a, const Matrix& u_b,
                                  double tol) {
  require_square(u_a, "conjugate_local U_A");
  require_square(u_b, "conjugate_local U_B");
  if (u_a.rows() != strat.dim_a() || u_b.rows() != strat.dim_b())
    throw std::invalid_argument("conjugate_local: dimension mismatch");
  require_unitary(u_a, tol, "conjugate_local U_A");
  require_unitary(u_b, tol, "conjugate_local U_B");
  BipartiteStrategy out;
  out.state = apply_joint(u_a, u_b, strat.state);
  out.alice.reserve(strat.alice.size());
  out.bob.reserve(strat.bob.size());
  for (const Matrix& a : strat.alice)
    out.alice.push_back(u_a * a * u_a.adjoint());
  for (const Matrix& b : strat.bob) out.bob.push_back(u_b * b * u_b.adjoint());
  for (const auto& [key, obs] : strat.alice_per_equation)
    out.alice_per_equation[key] = u_a * obs * u_a.adjoint();
  return out;
}

double max_residual(const std::vector<ResidualEntry>& entries) {
  double m = 0.0;
  for (const ResidualEntry& e : entries) m = std::max(m, e.value);
  return m;
}

OperatorSolutionReport check_operator_solution(const LcsGame& game,
                                               const BipartiteStrategy& strat,
                                               double tol) {
  validate_strategy(game, strat, tol);
  OperatorSolutionReport report;
  const BipartiteState& psi = strat.state;

  // (a) the same variable measured in different equations must agree on the
  // state; only meaningful when equation-specific observables exist.
  if (!strat.alice_per_equation.empty()) {
    for (int i = 0; i < game.num_vars(); ++i) {
      std::vector<int> eqs;
      for (int x = 0; x < game.num_equations(); ++x)
        if (game.system.equations[x].coeffs[i] != 0) eqs.push_back(x);
      for (size_t u = 0; u < eqs.size(); ++u)
        for (size_t v = u + 1; v < eqs.size(); ++v) {
          const Matrix diff =
              strat.alice_obs(eqs[u], i) - strat.alice_obs(eqs[v], i);
          std::ostringstream label;
          label << "alice var " << i << " eq " << eqs[u] << " vs eq " << eqs[v];
          report.cross_equation.push_back(
              {label.str(), apply_alice(diff, psi).norm()});
        }
    }
  }

  // (b) within-equation commutation on the state.
  for (int x = 0; x < game.num_equations(); ++x) {
    const std::vector<int> supp = game.system.equations[x].support();
    for (size_t u = 0; u < supp.size(); ++u)
      for (size_t v = u + 1; v < supp.size(); ++v) {
        const Matrix& a = strat.alice_obs(x, supp[u]);
        const Matrix& b = strat.alice_obs(x, supp[v]);
        std::ostringstream label;
        label << "alice eq " << x << " [" << supp[u] << "," << supp[v] << "]";
        report.commutation.push_back(
            {label.str(), apply_alice(a * b - b * a, psi).norm()});
        const Matrix& ba = strat.bob[supp[u]];
        const Matrix& bb = strat.bob[supp[v]];
        label.str("");
        label << "bob eq " << x << " [" << supp[u] << "," << supp[v] << "]";
        report.commutation.push_back(
            {label.str(), apply_bob(ba * bb - bb * ba, psi).norm()});
      }
  }

  // (c) constraint products in multiplicative form.
  for (int x = 0; x < game.num_equations(); ++x) {
    const Equation& eq = game.system.equations[x];
    const double sign = eq.rhs ? -1.0 : 1.0;
    Matrix prod_a = identity(strat.dim_a());
    Matrix prod_b = identity(strat.dim_b());
    for (int v : eq.support()) {
      prod_a = prod_a * strat.alice_obs(x, v);
      prod_b = prod_b * strat.bob[v];
    }
    std::ostringstream label;
    label << "alice eq " << x << " product";
    report.constraints.push_back(
        {label.str(),
         apply_alice(prod_a - sign * identity(strat.dim_a()), psi).norm()});
    label.str("");
    label << "bob eq " << x << " product";
    report.constraints.push_back(
        {label.str(),
         apply_bob(prod_b - sign * identity(strat.dim_b()), psi).norm()});
  }

  report.max_value =
      std::max({max_residual(report.cross_equation),
                max_residual(report.commutation),
                max_residual(report.constraints)});
  return report;
}

DilationReport verify_local_dilation(const BipartiteStrategy& strat,
                                     const BipartiteStrategy& ideal,
                                     const DilationWitness& witness,
                                     double tol) {
  if (strat.num_vars() != ideal.num_vars())
    throw std::invalid_argument(
        "verify_local_dilation: strategies have different observable counts");
  const Matrix& ua = witness.isometry_a;
  const Matrix& ub = witness.isometry_b;
  if (ua.cols() != strat.dim_a() || ub.cols() != strat.dim_b())
    throw std::invalid_argument(
        "verify_local_dilation: isometry domain mismatch");
  if (ua.rows() != ideal.dim_a() * witness.aux.dim_a ||
      ub.rows() != ideal.dim_b() * witness.aux.dim_b)
    throw std::invalid_argument(
        "verify_local_dilation: isometry codomain mismatch");
  require_unitary(ua, tol, "dilation isometry U_A");
  require_unitary(ub, tol, "dilation isometry U_B");
  require_unit_state(witness.aux, std::max(tol, 1e-6), "auxiliary state");

  DilationReport report;
  const BipartiteState mapped = apply_joint(ua, ub, strat.state);
  const BipartiteState target = tensor_states(ideal.state, witness.aux);
  report.state_residual = (mapped.amp - target.amp).norm();

  for (int i = 0; i < strat.num_vars(); ++i) {
    BipartiteState lhs = apply_joint(ua, ub, apply_alice(strat.alice[i], strat.state));
    BipartiteState rhs =
        tensor_states(apply_alice(ideal.alice[i], ideal.state), witness.aux);
    report.alice.push_back(
        {"alice obs " + std::to_string(i), (lhs.amp - rhs.amp).norm()});

    lhs = apply_joint(ua, ub, apply_bob(strat.bob[i], strat.state));
    rhs = tensor_states(apply_bob(ideal.bob[i], ideal.state), witness.aux);
    report.bob.push_back(
        {"bob obs " + std::to_string(i), (lhs.amp - rhs.amp).norm()});
  }
  report.max_value = std::max({report.state_residual, max_residual(report.alice),
                               max_residual(report.bob)});
  return report;
}

}  // namespace gluedgames
