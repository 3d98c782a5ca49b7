#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gluedgames {

/// One linear equation sum_j coeffs[j] * e_j = rhs over Z/dZ.
struct Equation {
  std::vector<int> coeffs;
  int rhs = 0;

  /// Indices with a nonzero coefficient, in increasing order.
  std::vector<int> support() const;
};

/// System of linear equations over Z/dZ in num_vars variables.
struct LinearSystem {
  int modulus = 2;
  int num_vars = 0;
  std::vector<Equation> equations;
};

/// Throws std::invalid_argument naming the offending equation/field.
void validate(const LinearSystem& system);

/// Nonlocal game derived from a linear system: Alice receives an equation
/// index, Bob a variable index, sampled uniformly over pairs where the
/// variable occurs in the equation. Alice answers an assignment to the
/// equation's variables, Bob a single value; they win iff the equation is
/// satisfied and the shared variable agrees.
struct LcsGame {
  LinearSystem system;
  std::vector<std::pair<int, int>> question_pairs;

  int num_vars() const { return system.num_vars; }
  int num_equations() const { return static_cast<int>(system.equations.size()); }
};

LcsGame lcs_game(LinearSystem system);

/// True iff assignment a satisfies equation x and a[y] == b.
/// a assigns a value to every variable of the system (entries at variables
/// outside equation x's support are ignored).
bool verify_predicate(const LcsGame& game, int x, int y,
                      const std::vector<int>& a, int b);

/// 3x3 grid game: rows and the first two columns multiply to +1, the last
/// column to -1. Variables are numbered row-major, so the odd column is
/// {2, 5, 8} (0-based).
LcsGame magic_square();

/// Ten variables on the pentagram; four solid lines of four with rhs 0 and
/// one dashed line {1,2,3,4} (0-based) with rhs 1.
LcsGame magic_pentagram();

/// Glue two binary games, each with exactly one odd (rhs 1) equation, into
/// one game: all even equations are kept and the two odd equations merge
/// into a single equation with rhs 1. The second game's variables are
/// relabelled mirror-fashion, j -> k + (l - 1 - j) for j in [0, l), so the
/// glued-magic-square layout places the second square's odd column at
/// {9, 12, 15} (0-based) right after the first square's {2, 5, 8}.
LcsGame glue(const LcsGame& g, const LcsGame& h);

/// glue(magic_square(), magic_square()).
LcsGame glued_magic_square();

/// Exact rational p/q with q > 0 and gcd(p, q) = 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational make_rational(std::int64_t num, std::int64_t den);

/// Exact classical value by enumerating Bob's 2^k assignments; for each,
/// Alice best-responds per equation within that equation's satisfying
/// assignments. Binary games only; guarded at num_vars <= 20.
Rational classical_value(const LcsGame& game);

/// Variables of the game part containing `var`, where parts are the
/// connected components of the co-occurrence graph induced by the even
/// (rhs 0) equations. For a glued game this recovers the constituent game's
/// variable set.
std::vector<int> part_of_variable(const LcsGame& game, int var);

/// The unique equation with nonzero rhs; throws if there is none or many.
int odd_equation_index(const LinearSystem& system);

}  // namespace gluedgames
