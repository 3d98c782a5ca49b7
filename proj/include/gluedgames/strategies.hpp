#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "gluedgames/games.hpp"
#include "gluedgames/linalg.hpp"

namespace gluedgames {

/// Quantum strategy for a binary LCS game: a shared state plus one
/// observable per variable and party. Alice answers an equation by measuring
/// the observables of its variables one after another in increasing variable
/// order; the +1-eigenspace corresponds to answer 0. An entry in
/// alice_per_equation overrides alice[i] when equation x is asked.
struct BipartiteStrategy {
  BipartiteState state;
  std::vector<Matrix> alice;
  std::vector<Matrix> bob;
  std::map<std::pair<int, int>, Matrix> alice_per_equation;  // key (x, i)

  Index dim_a() const { return state.dim_a; }
  Index dim_b() const { return state.dim_b; }
  int num_vars() const { return static_cast<int>(alice.size()); }

  /// alice[i], or the equation-specific override when present.
  const Matrix& alice_obs(int equation, int var) const;
};

/// Throws unless list lengths match the game, dimensions are consistent and
/// every operator satisfies the observable invariants.
void validate_strategy(const LcsGame& game, const BipartiteStrategy& strat,
                       double tol = kDefaultTol);

/// Probability that the strategy wins the game, averaged over the uniform
/// question-pair distribution.
double winning_probability(const LcsGame& game, const BipartiteStrategy& strat,
                           double tol = kDefaultTol);

/// Re <psi| A_i (x) B_i |psi>; equals 1 when both parties always agree on
/// variable i.
double consistency(const BipartiteStrategy& strat, int var);

/// Grid of Pauli observables on two qubits winning the magic square game
/// with certainty on the maximally entangled state of dimension 4.
BipartiteStrategy ideal_magic_square();

/// Mermin's three-qubit construction for the pentagram, on |psi_8>.
BipartiteStrategy ideal_magic_pentagram();

/// Representation of the rank-4 elementary abelian 2-group given by a list
/// of characters (one per dimension, as sign vectors on the four generators)
/// realised diagonally in the given orthonormal basis.
struct CharacterRepresentation {
  std::vector<std::array<int, 4>> characters;
  Matrix basis;

  Index dim() const { return static_cast<Index>(characters.size()); }
};

CharacterRepresentation representation_from_characters(
    std::vector<std::array<int, 4>> characters, Matrix basis);

/// Image of the group word given by a bitmask over the four generators.
Matrix representation_image(const CharacterRepresentation& rep,
                            unsigned word_mask);

/// The nine images laid out on the magic-square grid: generators at
/// positions 0, 1, 3, 4 and the forced products elsewhere. Every row and
/// column of this grid multiplies to the identity.
std::array<Matrix, 9> representation_grid(const CharacterRepresentation& rep);

/// Joint eigenbasis of Z(x)Z and X(x)X; sign representations diagonal here
/// commute with the whole ideal odd column.
Matrix bell_basis();

/// Perfect glued-magic-square strategy that plays the ideal grid on one part
/// (part 1 or 2) and the representation grid on the other. The inactive
/// part's images must commute with the ideal odd-column observables; the
/// mirror variable layout of glue() is assumed. Bob takes entry-wise
/// transposes, which is invisible for the real ideal operators but required
/// for consistency on |psi_4> when the representation basis is complex.
BipartiteStrategy build_glued_strategy(int part,
                                       const CharacterRepresentation& rep,
                                       double tol = kDefaultTol);

/// Direct-sum strategy with state weights alpha_k, sum alpha_k^2 = 1.
BipartiteStrategy convex_combination(
    const std::vector<std::pair<double, BipartiteStrategy>>& parts,
    double tol = kDefaultTol);

/// A perfect glued-magic-square strategy mixing the two parts with weights
/// (alpha, beta) and a free dimension-five auxiliary state |xi>: block one
/// plays the ideal grid on part 1, block two (of shape C^4 (x) C^5) plays it
/// on part 2, and the inactive halves carry the sign representations with
/// generator images diag(1,-1,1,1) and diag(-1,-1,1,-1).
BipartiteStrategy example_strategy(double alpha, double beta,
                                   const BipartiteState& xi,
                                   double tol = kDefaultTol);

/// Rotate a strategy by local unitaries: state (U_A (x) U_B)|psi>,
/// observables U O U^dagger on each side.
BipartiteStrategy conjugate_local(const BipartiteStrategy& strat,
                                  const Matrix& u_a, const Matrix& u_b,
                                  double tol = kDefaultTol);

/// One named residual of a report.
struct ResidualEntry {
  std::string label;
  double value = 0.0;
};

double max_residual(const std::vector<ResidualEntry>& entries);

/// State-measured residuals of the multiplicative-form criteria a perfect
/// strategy must meet: per-variable agreement across equations (when
/// equation-specific observables are present), within-equation commutation,
/// and the constraint products against (-1)^rhs, on both sides.
struct OperatorSolutionReport {
  std::vector<ResidualEntry> cross_equation;
  std::vector<ResidualEntry> commutation;
  std::vector<ResidualEntry> constraints;
  double max_value = 0.0;

  bool pass(double tol = kDefaultTol) const { return max_value <= tol; }
};

OperatorSolutionReport check_operator_solution(const LcsGame& game,
                                               const BipartiteStrategy& strat,
                                               double tol = kDefaultTol);

/// Witness that `ideal` is a local dilation of a strategy: isometries
/// U_A : H_A -> H~_A (x) H_aux,A and U_B likewise (ideal factor major), plus
/// the shared auxiliary state.
struct DilationWitness {
  Matrix isometry_a;
  Matrix isometry_b;
  BipartiteState aux;
};

struct DilationReport {
  double state_residual = 0.0;
  std::vector<ResidualEntry> alice;
  std::vector<ResidualEntry> bob;
  double max_value = 0.0;

  bool pass(double tol = kDefaultTol) const { return max_value <= tol; }
};

/// Checks the three dilation equations: U|psi> = |psi~>|aux| and the
/// one-sided measured-state versions for every observable.
DilationReport verify_local_dilation(const BipartiteStrategy& strat,
                                     const BipartiteStrategy& ideal,
                                     const DilationWitness& witness,
                                     double tol = kDefaultTol);

}  // namespace gluedgames
