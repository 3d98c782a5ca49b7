#include "gluedgames/linalg.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace gluedgames;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("tensor: identity and Pauli products") {
  CHECK(max_abs_diff(tensor(identity(2), identity(2)), identity(4)) == 0.0);

  // The maximally entangled pair is fixed by matched local flips.
  BipartiteState psi2 = max_entangled(2);
  BipartiteState flipped = apply_joint(pauli_z(), pauli_z(), psi2);
  CHECK((flipped.amp - psi2.amp).norm() < 1e-15);
  CHECK(std::abs(expect_joint(pauli_z(), pauli_z(), psi2) - Complex(1, 0)) <
        1e-15);

  Matrix prod = tensor(pauli_z(), pauli_z()) * tensor(pauli_x(), pauli_x()) *
                tensor(pauli_y(), pauli_y());
  CHECK(max_abs_diff(prod, -identity(4)) < 1e-15);
}

TEST_CASE("tensor: associativity and bilinearity on random inputs") {
  ggtest::Rng rng(11);
  for (int it = 0; it < 20; ++it) {
    Matrix a = ggtest::random_matrix(3, 3, rng);
    Matrix b = ggtest::random_matrix(2, 4, rng);
    Matrix c = ggtest::random_matrix(2, 2, rng);
    CHECK(max_abs_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))) <=
          1e-12);
    Complex s(0.7, -0.3);
    CHECK(max_abs_diff(tensor(a * s, b), s * tensor(a, b)) <= 1e-12);
    Matrix a2 = ggtest::random_matrix(3, 3, rng);
    CHECK(max_abs_diff(tensor(a + a2, b), tensor(a, b) + tensor(a2, b)) <=
          1e-12);
  }
}

TEST_CASE("direct_sum: diagonal blocks and involution preservation") {
  Matrix one(1, 1), minus_one(1, 1);
  one << 1;
  minus_one << -1;
  Matrix d = direct_sum({one, minus_one});
  Matrix expected(2, 2);
  expected << 1, 0, 0, -1;
  CHECK(max_abs_diff(d, expected) == 0.0);

  Matrix i2_sum = direct_sum({identity(2), -identity(2)});
  CHECK(max_abs_diff(i2_sum * i2_sum, identity(4)) == 0.0);

  ggtest::Rng rng(12);
  for (int it = 0; it < 10; ++it) {
    Matrix a = ggtest::random_observable(3, rng);
    Matrix b = ggtest::random_observable(5, rng);
    CHECK(is_observable(direct_sum({a, b}), 1e-10));
  }
}

TEST_CASE("max_entangled: amplitudes and Schmidt spectrum") {
  BipartiteState psi2 = max_entangled(2);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(psi2.amp(0) - Complex(r, 0)) < 1e-15);
  CHECK(std::abs(psi2.amp(1)) == 0.0);
  CHECK(std::abs(psi2.amp(2)) == 0.0);
  CHECK(std::abs(psi2.amp(3) - Complex(r, 0)) < 1e-15);

  SchmidtDecomposition d4 = schmidt(max_entangled(4));
  REQUIRE(d4.rank() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(d4.coefficients(i) == doctest::Approx(0.5));

  BipartiteState psi8 = max_entangled(8);
  CHECK(psi8.norm() == doctest::Approx(1.0));
  SchmidtDecomposition d8 = schmidt(psi8);
  REQUIRE(d8.rank() == 8);
  for (Index i = 0; i < 8; ++i)
    CHECK(d8.coefficients(i) == doctest::Approx(1.0 / std::sqrt(8.0)));

  CHECK_THROWS(max_entangled(1));
}

TEST_CASE("embed_direct_sum_state: weighted blocks") {
  // sqrt(2/5) psi_2 (+) sqrt(3/5) psi_3 is psi_5 after identifying bases.
  BipartiteState psi3{3, 3, Vector::Zero(9)};
  for (Index i = 0; i < 3; ++i) psi3.amp(i * 3 + i) = 1.0 / std::sqrt(3.0);
  BipartiteState glued = embed_direct_sum_state(
      {{std::sqrt(2.0 / 5.0), max_entangled(2)}, {std::sqrt(3.0 / 5.0), psi3}});
  BipartiteState psi5 = max_entangled(5);
  CHECK((glued.amp - psi5.amp).norm() < 1e-15);

  BipartiteState single = embed_direct_sum_state({{1.0, max_entangled(2)}});
  CHECK((single.amp - max_entangled(2).amp).norm() == 0.0);

  const double r = 1.0 / std::sqrt(2.0);
  BipartiteState both =
      embed_direct_sum_state({{r, max_entangled(4)}, {r, max_entangled(4)}});
  SchmidtDecomposition d = schmidt(both);
  REQUIRE(d.rank() == 8);
  for (Index i = 0; i < 8; ++i)
    CHECK(d.coefficients(i) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));

  CHECK_THROWS(embed_direct_sum_state(
      {{0.9, max_entangled(2)}, {0.9, max_entangled(2)}}));
}

TEST_CASE("schmidt: simple spectra") {
  BipartiteState ket00{2, 2, Vector::Zero(4)};
  ket00.amp(0) = 1.0;
  SchmidtDecomposition d = schmidt(ket00);
  REQUIRE(d.rank() == 1);
  CHECK(d.coefficients(0) == doctest::Approx(1.0));

  BipartiteState skew{2, 2, Vector::Zero(4)};
  skew.amp(0) = 0.6;
  skew.amp(3) = 0.8;
  d = schmidt(skew);
  REQUIRE(d.rank() == 2);
  CHECK(d.coefficients(0) == doctest::Approx(0.8));
  CHECK(d.coefficients(1) == doctest::Approx(0.6));

  d = schmidt(max_entangled(5));
  REQUIRE(d.rank() == 5);
  for (Index i = 0; i < 5; ++i)
    CHECK(d.coefficients(i) == doctest::Approx(1.0 / std::sqrt(5.0)));

  BipartiteState zero{2, 2, Vector::Zero(4)};
  CHECK_THROWS(schmidt(zero));
}

TEST_CASE("schmidt: reconstruction round-trip on random states") {
  ggtest::Rng rng(13);
  for (auto [da, db] : {std::pair<Index, Index>{5, 7},
                        {8, 3},
                        {17, 32},
                        {32, 32}}) {
    BipartiteState s = ggtest::random_state(da, db, rng);
    SchmidtDecomposition d = schmidt(s);
    BipartiteState back = schmidt_reconstruct(d);
    CHECK((back.amp - s.amp).norm() < 1e-10);

    double sumsq = d.coefficients.squaredNorm();
    CHECK(sumsq == doctest::Approx(1.0).epsilon(1e-10));
    // Local bases are orthonormal.
    CHECK((d.alice_basis.adjoint() * d.alice_basis -
           Matrix::Identity(d.rank(), d.rank()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK((d.bob_basis.adjoint() * d.bob_basis -
           Matrix::Identity(d.rank(), d.rank()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("eigenprojectors: Z, identity, odd-column product") {
  auto [zp, zm] = eigenprojectors(pauli_z());
  Matrix e00 = Matrix::Zero(2, 2), e11 = Matrix::Zero(2, 2);
  e00(0, 0) = 1;
  e11(1, 1) = 1;
  CHECK(max_abs_diff(zp.mat, e00) < 1e-15);
  CHECK(max_abs_diff(zm.mat, e11) < 1e-15);
  CHECK(zp.rank == 1);
  CHECK(zm.rank == 1);

  auto [ip, im] = eigenprojectors(identity(3));
  CHECK(max_abs_diff(ip.mat, identity(3)) < 1e-15);
  CHECK(im.rank == 0);

  // Product of the odd-column observables of the ideal grid strategy.
  Matrix e = tensor(pauli_z(), pauli_z()) * tensor(pauli_x(), pauli_x()) *
             tensor(pauli_y(), pauli_y());
  CHECK(max_abs_diff(e, -identity(4)) < 1e-14);
  auto [ep, em] = eigenprojectors(e);
  CHECK(em.rank == 4);
  CHECK(max_abs_diff(em.mat, identity(4)) < 1e-14);

  CHECK_THROWS(eigenprojectors(pauli_x() + pauli_z()));  // not an involution
}

TEST_CASE("eigenprojectors: spectral identities on random observables") {
  ggtest::Rng rng(14);
  for (int it = 0; it < 25; ++it) {
    Matrix a = ggtest::random_observable(6, rng);
    auto [p, m] = eigenprojectors(a);
    CHECK((p.mat * m.mat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(max_abs_diff(p.mat + m.mat, identity(6)) < 1e-10);
    CHECK(max_abs_diff(p.mat - m.mat, a) < 1e-10);
    CHECK(p.rank + m.rank == 6);
  }
}

TEST_CASE("support_projector: rank and fixing property") {
  BipartiteState ket00{2, 2, Vector::Zero(4)};
  ket00.amp(0) = 1.0;
  Projector p = support_projector(ket00, Side::Alice);
  CHECK(p.rank == 1);
  Matrix e00 = Matrix::Zero(2, 2);
  e00(0, 0) = 1;
  CHECK(max_abs_diff(p.mat, e00) < 1e-14);

  Projector full = support_projector(max_entangled(4), Side::Alice);
  CHECK(full.rank == 4);
  CHECK(max_abs_diff(full.mat, identity(4)) < 1e-13);

  ggtest::Rng rng(15);
  for (int it = 0; it < 10; ++it) {
    BipartiteState s = ggtest::random_state(5, 4, rng);
    for (Side side : {Side::Alice, Side::Bob}) {
      Projector proj = support_projector(s, side);
      BipartiteState t = side == Side::Alice ? apply_alice(proj.mat, s)
                                             : apply_bob(proj.mat, s);
      CHECK((t.amp - s.amp).norm() < 1e-10);
    }
  }
}

TEST_CASE("intersect_projectors: diagonal cases and commutation gate") {
  Projector id{identity(4), 4};
  Projector both = intersect_projectors(id, id);
  CHECK(both.rank == 4);
  CHECK(max_abs_diff(both.mat, identity(4)) < 1e-13);

  Vector d1(4), d2(4);
  d1 << 1, 1, 0, 0;
  d2 << 0, 1, 1, 0;
  Projector p{Matrix(d1.asDiagonal()), 2};
  Projector q{Matrix(d2.asDiagonal()), 2};
  Projector r = intersect_projectors(p, q);
  CHECK(r.rank == 1);
  Matrix e11 = Matrix::Zero(4, 4);
  e11(1, 1) = 1;
  CHECK(max_abs_diff(r.mat, e11) < 1e-13);

  // |+><+| and |0><0| do not commute.
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  Matrix zero2 = Matrix::Zero(2, 2);
  zero2(0, 0) = 1;
  CHECK_THROWS(intersect_projectors(Projector{plus, 1}, Projector{zero2, 1}));
}

TEST_CASE("apply/expect: index convention") {
  // On |0>_A |1>_B, Alice's Z reads +1 and Bob's Z reads -1.
  BipartiteState ket01{2, 2, Vector::Zero(4)};
  ket01.amp(1) = 1.0;
  CHECK(std::abs(expect_alice(pauli_z(), ket01) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(expect_bob(pauli_z(), ket01) - Complex(-1, 0)) < 1e-15);

  // X on Alice maps |01> to |11>.
  BipartiteState moved = apply_alice(pauli_x(), ket01);
  CHECK(std::abs(moved.amp(3) - Complex(1, 0)) < 1e-15);

  ggtest::Rng rng(16);
  BipartiteState s = ggtest::random_state(3, 5, rng);
  Matrix a = ggtest::random_matrix(3, 3, rng);
  Matrix b = ggtest::random_matrix(5, 5, rng);
  BipartiteState via_joint = apply_joint(a, b, s);
  BipartiteState via_steps = apply_bob(b, apply_alice(a, s));
  CHECK((via_joint.amp - via_steps.amp).norm() < 1e-12);
  // Against the literal Kronecker matrix.
  Vector direct = tensor(a, b) * s.amp;
  CHECK((via_joint.amp - direct).norm() < 1e-12);
}

TEST_CASE("validation: observable and unitary gates") {
  CHECK(is_observable(pauli_y()));
  CHECK(!is_observable(pauli_x() * 0.5));
  ggtest::Rng rng(17);
  CHECK_THROWS(require_observable(ggtest::random_matrix(3, 3, rng), 1e-9,
                                  "test"));
  CHECK_THROWS(require_unitary(2.0 * identity(2), 1e-9, "test"));
  BipartiteState not_unit{2, 2, Vector::Ones(4)};
  CHECK_THROWS(require_unit_state(not_unit, 1e-9, "test"));
}
