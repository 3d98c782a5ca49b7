#pragma once

#include <complex>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gluedgames {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default tolerance for operator/state invariant checks.
inline constexpr double kDefaultTol = 1e-9;
/// Singular values at or below this are treated as zero (Schmidt rank).
inline constexpr double kRankTol = 1e-9;
/// Relative gap used to cluster Schmidt coefficients for multiplicity counts.
inline constexpr double kClusterGap = 1e-6;

enum class Side { Alice, Bob };

/// Orthogonal projector together with its (integer) rank.
struct Projector {
  Matrix mat;
  Index rank = 0;
};

/// Pure state on H_A (x) H_B. amp[i * dim_b + j] is the coefficient of
/// |i>_A |j>_B; the Alice index is the major one. Most operations require
/// unit norm, but the container itself also carries intermediate
/// (projected, unnormalised) vectors.
struct BipartiteState {
  Index dim_a = 0;
  Index dim_b = 0;
  Vector amp;

  double norm() const { return amp.norm(); }
};

/// Result of a Schmidt decomposition: strictly positive coefficients in
/// nonincreasing order, and matching orthonormal local bases as columns.
struct SchmidtDecomposition {
  RealVector coefficients;
  Matrix alice_basis;
  Matrix bob_basis;

  Index rank() const { return coefficients.size(); }
  double min_coefficient() const {
    return coefficients.size() > 0 ? coefficients(coefficients.size() - 1)
                                   : 0.0;
  }
};

// --- operator/state validation -------------------------------------------

double hermiticity_error(const Matrix& m);
double involution_error(const Matrix& m);
double unitarity_error(const Matrix& m);
double projector_error(const Matrix& m);

/// Max of hermiticity and involution error; an observable is a self-adjoint
/// unitary, so zero means +/-1-valued.
double observable_error(const Matrix& m);

bool is_observable(const Matrix& m, double tol = kDefaultTol);
void require_observable(const Matrix& m, double tol, std::string_view what);
void require_unitary(const Matrix& m, double tol, std::string_view what);
void require_unit_state(const BipartiteState& s, double tol,
                        std::string_view what);
void require_square(const Matrix& m, std::string_view what);

// --- constructions ---------------------------------------------------------

/// Kronecker product; the left factor carries the major (Alice-side) index,
/// matching the BipartiteState flattening.
Matrix tensor(const Matrix& a, const Matrix& b);

/// Block-diagonal direct sum; block k occupies the index range of summand k.
Matrix direct_sum(const std::vector<Matrix>& ops);

/// (1/sqrt(k)) sum_i |ii>, k >= 2.
BipartiteState max_entangled(Index k);

/// Weighted direct sum of bipartite states: block (k,k) of the result holds
/// weight_k * state_k, off-diagonal blocks are zero. Weights must satisfy
/// sum w_k^2 = 1 and every part must be a unit state.
BipartiteState embed_direct_sum_state(
    const std::vector<std::pair<double, BipartiteState>>& parts,
    double tol = kDefaultTol);

/// Tensor product of bipartite states, with local factors composed as
/// (first, second) on each side.
BipartiteState tensor_states(const BipartiteState& s, const BipartiteState& t);

// --- spectral / Schmidt ----------------------------------------------------

/// SVD of the dim_a x dim_b coefficient matrix. Coefficients below rank_tol
/// are dropped. Throws on a (near-)zero vector.
SchmidtDecomposition schmidt(const BipartiteState& s,
                             double rank_tol = kRankTol);

/// Rebuild the state sum_i lambda_i |v_i>|w_i| from a decomposition.
BipartiteState schmidt_reconstruct(const SchmidtDecomposition& d);

/// Spectral projectors (P^+, P^-) of an observable, computed as (I +/- A)/2.
/// Validates the observable invariants first.
std::pair<Projector, Projector> eigenprojectors(const Matrix& a,
                                                double tol = kDefaultTol);

/// Projector onto the span of one side's Schmidt vectors.
Projector support_projector(const BipartiteState& s, Side side,
                            double rank_tol = kRankTol);

/// Projector onto Ran(P) intersect Ran(Q) for commuting projectors P, Q.
/// Throws if ||PQ - QP|| exceeds tol.
Projector intersect_projectors(const Projector& p, const Projector& q,
                               double tol = kDefaultTol);

/// Orthonormal basis (columns) of a projector's range.
Matrix projector_basis(const Projector& p, double tol = kDefaultTol);

/// (M + M^dagger)/2; keeps projector arithmetic from drifting off the
/// self-adjoint manifold.
Matrix symmetrize(const Matrix& m);

/// Largest singular value.
double operator_norm(const Matrix& m);

// --- one-sided application and expectation values --------------------------

/// (M (x) I) |s>.
BipartiteState apply_alice(const Matrix& m, const BipartiteState& s);
/// (I (x) M) |s>.
BipartiteState apply_bob(const Matrix& m, const BipartiteState& s);
/// (M (x) N) |s>.
BipartiteState apply_joint(const Matrix& m, const Matrix& n,
                           const BipartiteState& s);

Complex inner(const BipartiteState& a, const BipartiteState& b);
Complex expect_alice(const Matrix& m, const BipartiteState& s);
Complex expect_bob(const Matrix& m, const BipartiteState& s);
Complex expect_joint(const Matrix& m, const Matrix& n,
                     const BipartiteState& s);

// --- small constant matrices ----------------------------------------------

Matrix identity(Index n);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

}  // namespace gluedgames
