#include "gluedgames/games.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gluedgames/parallel.hpp"

namespace gluedgames {

std::vector<int> Equation::support() const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(coeffs.size()); ++j)
    if (coeffs[j] != 0) out.push_back(j);
  return out;
}

void validate(const LinearSystem& system) {
  if (system.modulus < 2)
    throw std::invalid_argument("linear system: modulus must be >= 2");
  if (system.num_vars <= 0)
    throw std::invalid_argument("linear system: need at least one variable");
  for (size_t i = 0; i < system.equations.size(); ++i) {
    const Equation& eq = system.equations[i];
    std::ostringstream where;
    where << "linear system, equation " << i;
    if (static_cast<int>(eq.coeffs.size()) != system.num_vars)
      throw std::invalid_argument(where.str() + ": coefficient count " +
                                  std::to_string(eq.coeffs.size()) +
                                  " does not match num_vars");
    if (eq.rhs < 0 || eq.rhs >= system.modulus)
      throw std::invalid_argument(where.str() + ": rhs out of range");
    bool any = false;
    for (int c : eq.coeffs) {
      if (c < 0 || c >= system.modulus)
        throw std::invalid_argument(where.str() + ": coefficient out of range");
      any |= (c != 0);
    }
    if (!any)
      throw std::invalid_argument(where.str() + ": no nonzero coefficient");
  }
}

LcsGame lcs_game(LinearSystem system) {
  validate(system);
  LcsGame game;
  game.system = std::move(system);
  for (int x = 0; x < game.num_equations(); ++x)
    for (int y : game.system.equations[x].support())
      game.question_pairs.emplace_back(x, y);
  return game;
}

bool verify_predicate(const LcsGame& game, int x, int y,
                      const std::vector<int>& a, int b) {
  if (x < 0 || x >= game.num_equations())
    throw std::out_of_range("verify_predicate: equation index out of range");
  if (y < 0 || y >= game.num_vars())
    throw std::out_of_range("verify_predicate: variable index out of range");
  const Equation& eq = game.system.equations[x];
  if (eq.coeffs[y] == 0)
    throw std::out_of_range("verify_predicate: (x, y) is not a question pair");
  if (static_cast<int>(a.size()) != game.num_vars())
    throw std::out_of_range("verify_predicate: assignment length mismatch");
  int sum = 0;
  for (int j = 0; j < game.num_vars(); ++j) sum += eq.coeffs[j] * a[j];
  return sum % game.system.modulus == eq.rhs && a[y] == b;
}

namespace {

Equation sparse_equation(int num_vars, const std::vector<int>& vars, int rhs) {
  Equation eq;
  eq.coeffs.assign(num_vars, 0);
  for (int v : vars) eq.coeffs[v] = 1;
  eq.rhs = rhs;
  return eq;
}

}  // namespace

LcsGame magic_square() {
  LinearSystem sys;
  sys.modulus = 2;
  sys.num_vars = 9;
  sys.equations = {
      sparse_equation(9, {0, 1, 2}, 0), sparse_equation(9, {3, 4, 5}, 0),
      sparse_equation(9, {6, 7, 8}, 0), sparse_equation(9, {0, 3, 6}, 0),
      sparse_equation(9, {1, 4, 7}, 0), sparse_equation(9, {2, 5, 8}, 1),
  };
  return lcs_game(std::move(sys));
}

LcsGame magic_pentagram() {
  LinearSystem sys;
  sys.modulus = 2;
  sys.num_vars = 10;
  sys.equations = {
      sparse_equation(10, {0, 2, 5, 8}, 0), sparse_equation(10, {0, 3, 6, 9}, 0),
      sparse_equation(10, {1, 5, 7, 9}, 0), sparse_equation(10, {4, 6, 7, 8}, 0),
      sparse_equation(10, {1, 2, 3, 4}, 1),
  };
  // Guard against transcription slips: every node lies on exactly two lines
  // and the odd line has four variables.
  std::vector<int> uses(10, 0);
  for (const Equation& eq : sys.equations)
    for (int v : eq.support()) ++uses[v];
  for (int v = 0; v < 10; ++v)
    if (uses[v] != 2)
      throw std::logic_error("magic_pentagram: node degree check failed");
  if (sys.equations[4].support().size() != 4)
    throw std::logic_error("magic_pentagram: odd line size check failed");
  return lcs_game(std::move(sys));
}

int odd_equation_index(const LinearSystem& system) {
  int found = -1;
  for (size_t i = 0; i < system.equations.size(); ++i) {
    if (system.equations[i].rhs != 0) {
      if (found >= 0)
        throw std::invalid_argument("expected exactly one odd equation");
      found = static_cast<int>(i);
    }
  }
  if (found < 0)
    throw std::invalid_argument("expected exactly one odd equation");
  return found;
}

LcsGame glue(const LcsGame& g, const LcsGame& h) {
  if (g.system.modulus != 2 || h.system.modulus != 2)
    throw std::invalid_argument("glue: both games must be binary");
  const int k = g.num_vars();
  const int l = h.num_vars();
  const int odd_g = odd_equation_index(g.system);
  const int odd_h = odd_equation_index(h.system);

  // Mirror relabelling of the second game, j -> k + (l - 1 - j).
  auto relabel = [&](const Equation& eq) {
    Equation out;
    out.coeffs.assign(k + l, 0);
    for (int j = 0; j < l; ++j) out.coeffs[k + (l - 1 - j)] = eq.coeffs[j];
    out.rhs = eq.rhs;
    return out;
  };

  LinearSystem sys;
  sys.modulus = 2;
  sys.num_vars = k + l;
  for (int x = 0; x < g.num_equations(); ++x) {
    if (x == odd_g) continue;
    Equation eq = g.system.equations[x];
    eq.coeffs.resize(k + l, 0);
    sys.equations.push_back(std::move(eq));
  }
  for (int x = 0; x < h.num_equations(); ++x) {
    if (x == odd_h) continue;
    sys.equations.push_back(relabel(h.system.equations[x]));
  }
  Equation merged = g.system.equations[odd_g];
  merged.coeffs.resize(k + l, 0);
  Equation merged_h = relabel(h.system.equations[odd_h]);
  for (int j = 0; j < k + l; ++j) merged.coeffs[j] ^= merged_h.coeffs[j];
  merged.rhs = 1;
  sys.equations.push_back(std::move(merged));
  return lcs_game(std::move(sys));
}

LcsGame glued_magic_square() { return glue(magic_square(), magic_square()); }

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

namespace {

struct EquationMask {
  std::uint32_t support = 0;             // bitmask over variables
  std::vector<std::uint32_t> satisfying; // full-width assignments restricted
                                         // to the support bits
};

EquationMask equation_mask(const Equation& eq) {
  EquationMask m;
  std::vector<int> supp = eq.support();
  for (int v : supp) m.support |= (1u << v);
  const int s = static_cast<int>(supp.size());
  for (std::uint32_t bits = 0; bits < (1u << s); ++bits) {
    int parity = 0;
    std::uint32_t full = 0;
    for (int t = 0; t < s; ++t) {
      if (bits & (1u << t)) {
        parity ^= 1;
        full |= (1u << supp[t]);
      }
    }
    if (parity == eq.rhs) m.satisfying.push_back(full);
  }
  return m;
}

}  // namespace

Rational classical_value(const LcsGame& game) {
  if (game.system.modulus != 2)
    throw std::invalid_argument("classical_value: binary games only");
  if (game.num_vars() > 20)
    throw std::invalid_argument(
        "classical_value: more than 20 variables; exhaustive enumeration "
        "refused (no sampling mode is provided)");

  std::vector<EquationMask> masks;
  masks.reserve(game.num_equations());
  for (const Equation& eq : game.system.equations)
    masks.push_back(equation_mask(eq));

  const std::uint32_t bob_count = 1u << game.num_vars();
  // For a fixed Bob assignment, Alice's best response for each equation is a
  // satisfying assignment agreeing with Bob on as many support variables as
  // possible; each agreement wins one question pair.
  auto best_total = [&](std::uint32_t bob) {
    int total = 0;
    for (const EquationMask& m : masks) {
      int best = 0;
      const int size = __builtin_popcount(m.support);
      for (std::uint32_t a : m.satisfying) {
        int agree = size - __builtin_popcount((a ^ bob) & m.support);
        if (agree > best) best = agree;
      }
      total += best;
    }
    return total;
  };

  const std::size_t chunks = parallel_chunk_count(bob_count);
  std::vector<int> chunk_best(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t lo = static_cast<std::uint64_t>(bob_count) * c / chunks;
    const std::uint64_t hi =
        static_cast<std::uint64_t>(bob_count) * (c + 1) / chunks;
    int best = 0;
    for (std::uint64_t bob = lo; bob < hi; ++bob)
      best = std::max(best, best_total(static_cast<std::uint32_t>(bob)));
    chunk_best[c] = best;
  });
  int best = *std::max_element(chunk_best.begin(), chunk_best.end());
  return make_rational(best,
                       static_cast<std::int64_t>(game.question_pairs.size()));
}

std::vector<int> part_of_variable(const LcsGame& game, int var) {
  if (var < 0 || var >= game.num_vars())
    throw std::out_of_range("part_of_variable: variable index out of range");
  std::vector<std::vector<int>> adj(game.num_vars());
  for (const Equation& eq : game.system.equations) {
    if (eq.rhs != 0) continue;
    std::vector<int> supp = eq.support();
    for (size_t i = 0; i + 1 < supp.size(); ++i) {
      adj[supp[i]].push_back(supp[i + 1]);
      adj[supp[i + 1]].push_back(supp[i]);
    }
  }
  std::vector<char> seen(game.num_vars(), 0);
  std::vector<int> stack{var}, out;
  seen[var] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gluedgames
