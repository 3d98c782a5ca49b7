#include "gluedgames/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace gluedgames {

namespace {

[[noreturn]] void fail(std::string_view what, std::string_view why,
                       double value) {
  std::ostringstream os;
  os << what << ": " << why << " (deviation " << value << ")";
  throw std::invalid_argument(os.str());
}

// Maps amp to the dim_b x dim_a matrix T with T(j, i) = <i j | s>, i.e. the
// transpose of the coefficient matrix. Column-major storage makes this a
// plain view of the flat vector.
Eigen::Map<const Matrix> transposed_coeffs(const BipartiteState& s) {
  return Eigen::Map<const Matrix>(s.amp.data(), s.dim_b, s.dim_a);
}

}  // namespace

double hermiticity_error(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double involution_error(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m * m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

double unitarity_error(const Matrix& m) {
  return (m.adjoint() * m - Matrix::Identity(m.cols(), m.cols()))
      .cwiseAbs()
      .maxCoeff();
}

double projector_error(const Matrix& m) {
  return std::max(hermiticity_error(m),
                  (m * m - m).cwiseAbs().maxCoeff());
}

double observable_error(const Matrix& m) {
  return std::max(hermiticity_error(m), involution_error(m));
}

bool is_observable(const Matrix& m, double tol) {
  return m.rows() == m.cols() && m.allFinite() && observable_error(m) <= tol;
}

void require_observable(const Matrix& m, double tol, std::string_view what) {
  require_square(m, what);
  if (!m.allFinite()) fail(what, "non-finite entries", 0.0);
  if (double e = hermiticity_error(m); e > tol)
    fail(what, "not self-adjoint", e);
  if (double e = involution_error(m); e > tol) fail(what, "not +/-1-valued", e);
}

void require_unitary(const Matrix& m, double tol, std::string_view what) {
  if (!m.allFinite()) fail(what, "non-finite entries", 0.0);
  if (double e = unitarity_error(m); e > tol) fail(what, "not an isometry", e);
}

void require_unit_state(const BipartiteState& s, double tol,
                        std::string_view what) {
  if (s.amp.size() != s.dim_a * s.dim_b)
    throw std::invalid_argument(std::string(what) +
                                ": amplitude length does not match dimensions");
  if (!s.amp.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite amplitudes");
  if (double e = std::abs(s.norm() - 1.0); e > tol)
    fail(what, "not a unit vector", e);
}

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

Matrix direct_sum(const std::vector<Matrix>& ops) {
  Index rows = 0, cols = 0;
  for (const Matrix& op : ops) {
    require_square(op, "direct_sum operand");
    rows += op.rows();
    cols += op.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index at = 0;
  for (const Matrix& op : ops) {
    out.block(at, at, op.rows(), op.cols()) = op;
    at += op.rows();
  }
  return out;
}

BipartiteState max_entangled(Index k) {
  if (k < 2) throw std::invalid_argument("max_entangled: need dimension >= 2");
  BipartiteState s{k, k, Vector::Zero(k * k)};
  const double c = 1.0 / std::sqrt(static_cast<double>(k));
  for (Index i = 0; i < k; ++i) s.amp(i * k + i) = c;
  return s;
}

BipartiteState embed_direct_sum_state(
    const std::vector<std::pair<double, BipartiteState>>& parts, double tol) {
  if (parts.empty())
    throw std::invalid_argument("embed_direct_sum_state: no parts");
  double wsq = 0.0;
  Index dim_a = 0, dim_b = 0;
  for (const auto& [w, part] : parts) {
    require_unit_state(part, tol, "embed_direct_sum_state part");
    wsq += w * w;
    dim_a += part.dim_a;
    dim_b += part.dim_b;
  }
  if (std::abs(wsq - 1.0) > tol)
    fail("embed_direct_sum_state", "weights are not l2-normalised",
         std::abs(wsq - 1.0));

  BipartiteState out{dim_a, dim_b, Vector::Zero(dim_a * dim_b)};
  Index off_a = 0, off_b = 0;
  for (const auto& [w, part] : parts) {
    for (Index i = 0; i < part.dim_a; ++i)
      for (Index j = 0; j < part.dim_b; ++j)
        out.amp((off_a + i) * dim_b + (off_b + j)) =
            w * part.amp(i * part.dim_b + j);
    off_a += part.dim_a;
    off_b += part.dim_b;
  }
  return out;
}

BipartiteState tensor_states(const BipartiteState& s,
                             const BipartiteState& t) {
  BipartiteState out{s.dim_a * t.dim_a, s.dim_b * t.dim_b,
                     Vector(s.dim_a * t.dim_a * s.dim_b * t.dim_b)};
  for (Index i1 = 0; i1 < s.dim_a; ++i1)
    for (Index i2 = 0; i2 < t.dim_a; ++i2)
      for (Index j1 = 0; j1 < s.dim_b; ++j1)
        for (Index j2 = 0; j2 < t.dim_b; ++j2)
          out.amp((i1 * t.dim_a + i2) * out.dim_b + (j1 * t.dim_b + j2)) =
              s.amp(i1 * s.dim_b + j1) * t.amp(i2 * t.dim_b + j2);
  return out;
}

SchmidtDecomposition schmidt(const BipartiteState& s, double rank_tol) {
  if (s.norm() <= rank_tol)
    throw std::invalid_argument("schmidt: zero vector has no decomposition");
  // SVD of the coefficient matrix Psi = U S V^T (conjugate-free on the right
  // so that Psi_{ij} = sum_k sigma_k U_{ik} conj(V)_{jk}... Eigen returns
  // Psi = U S V^adjoint, so Bob's vectors are conj(V) columns.
  Matrix coeffs = transposed_coeffs(s).transpose();
  Eigen::JacobiSVD<Matrix> svd(coeffs,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > rank_tol) ++rank;
  SchmidtDecomposition d;
  d.coefficients = sv.head(rank);
  d.alice_basis = svd.matrixU().leftCols(rank);
  d.bob_basis = svd.matrixV().leftCols(rank).conjugate();
  return d;
}

BipartiteState schmidt_reconstruct(const SchmidtDecomposition& d) {
  const Index da = d.alice_basis.rows(), db = d.bob_basis.rows();
  BipartiteState s{da, db, Vector::Zero(da * db)};
  for (Index k = 0; k < d.rank(); ++k) {
    for (Index i = 0; i < da; ++i)
      for (Index j = 0; j < db; ++j)
        s.amp(i * db + j) +=
            d.coefficients(k) * d.alice_basis(i, k) * d.bob_basis(j, k);
  }
  return s;
}

std::pair<Projector, Projector> eigenprojectors(const Matrix& a, double tol) {
  require_observable(a, tol, "eigenprojectors input");
  const Index n = a.rows();
  Matrix plus = symmetrize(0.5 * (Matrix::Identity(n, n) + a));
  Matrix minus = symmetrize(0.5 * (Matrix::Identity(n, n) - a));
  auto rank_of = [](const Matrix& p) {
    return static_cast<Index>(std::lround(p.real().trace()));
  };
  return {Projector{plus, rank_of(plus)}, Projector{minus, rank_of(minus)}};
}

Projector support_projector(const BipartiteState& s, Side side,
                            double rank_tol) {
  SchmidtDecomposition d = schmidt(s, rank_tol);
  const Matrix& basis = (side == Side::Alice) ? d.alice_basis : d.bob_basis;
  return Projector{symmetrize(basis * basis.adjoint()), d.rank()};
}

Projector intersect_projectors(const Projector& p, const Projector& q,
                               double tol) {
  require_square(p.mat, "intersect_projectors P");
  require_square(q.mat, "intersect_projectors Q");
  if (p.mat.rows() != q.mat.rows())
    throw std::invalid_argument("intersect_projectors: dimension mismatch");
  double comm = operator_norm(p.mat * q.mat - q.mat * p.mat);
  if (comm > tol)
    fail("intersect_projectors", "projectors do not commute", comm);
  // For commuting projectors PQP is again a projector; snapping its unit
  // eigenspace suppresses roundoff.
  Matrix sym = symmetrize(p.mat * q.mat * p.mat);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Index rank = 0;
  Matrix basis(sym.rows(), sym.cols());
  for (Index i = 0; i < sym.rows(); ++i) {
    if (eig.eigenvalues()(i) > 0.5) basis.col(rank++) = eig.eigenvectors().col(i);
  }
  if (rank == 0) return Projector{Matrix::Zero(sym.rows(), sym.cols()), 0};
  Matrix v = basis.leftCols(rank);
  return Projector{symmetrize(v * v.adjoint()), rank};
}

Matrix projector_basis(const Projector& p, double tol) {
  if (double e = projector_error(p.mat); e > std::max(tol, 1e-7))
    fail("projector_basis", "input is not an orthogonal projector", e);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(p.mat));
  Matrix basis(p.mat.rows(), p.rank);
  Index at = 0;
  // Eigenvalues come back ascending; the range is the eigenvalue-1 subspace.
  for (Index i = p.mat.rows() - p.rank; i < p.mat.rows(); ++i)
    basis.col(at++) = eig.eigenvectors().col(i);
  return basis;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

BipartiteState apply_alice(const Matrix& m, const BipartiteState& s) {
  if (m.cols() != s.dim_a)
    throw std::invalid_argument("apply_alice: dimension mismatch");
  BipartiteState out{m.rows(), s.dim_b, Vector(m.rows() * s.dim_b)};
  Eigen::Map<Matrix>(out.amp.data(), s.dim_b, m.rows()) =
      transposed_coeffs(s) * m.transpose();
  return out;
}

BipartiteState apply_bob(const Matrix& m, const BipartiteState& s) {
  if (m.cols() != s.dim_b)
    throw std::invalid_argument("apply_bob: dimension mismatch");
  BipartiteState out{s.dim_a, m.rows(), Vector(s.dim_a * m.rows())};
  Eigen::Map<Matrix>(out.amp.data(), m.rows(), s.dim_a) =
      m * transposed_coeffs(s);
  return out;
}

BipartiteState apply_joint(const Matrix& m, const Matrix& n,
                           const BipartiteState& s) {
  if (m.cols() != s.dim_a || n.cols() != s.dim_b)
    throw std::invalid_argument("apply_joint: dimension mismatch");
  BipartiteState out{m.rows(), n.rows(), Vector(m.rows() * n.rows())};
  Eigen::Map<Matrix>(out.amp.data(), n.rows(), m.rows()) =
      n * transposed_coeffs(s) * m.transpose();
  return out;
}

Complex inner(const BipartiteState& a, const BipartiteState& b) {
  if (a.dim_a != b.dim_a || a.dim_b != b.dim_b)
    throw std::invalid_argument("inner: dimension mismatch");
  return a.amp.dot(b.amp);
}

Complex expect_alice(const Matrix& m, const BipartiteState& s) {
  return inner(s, apply_alice(m, s));
}

Complex expect_bob(const Matrix& m, const BipartiteState& s) {
  return inner(s, apply_bob(m, s));
}

Complex expect_joint(const Matrix& m, const Matrix& n,
                     const BipartiteState& s) {
  return inner(s, apply_joint(m, n, s));
}

Matrix identity(Index n) { return Matrix::Identity(n, n); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace gluedgames
