#include "gluedgames/robustness.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "test_util.hpp"

using namespace gluedgames;

namespace {

Matrix rotation2(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Matrix rotated_z(double theta) {
  return std::cos(theta) * pauli_z() + std::sin(theta) * pauli_x();
}

BipartiteStrategy balanced_mix(ggtest::Rng& rng) {
  const double r = 1.0 / std::sqrt(2.0);
  return convex_combination(
      {{r, build_glued_strategy(1, ggtest::random_bell_representation(rng))},
       {r, build_glued_strategy(2, ggtest::random_bell_representation(rng))}});
}

}  // namespace

TEST_CASE("check_lrmul: equality case and rotation closed form") {
  Vector ket0 = Vector::Zero(2);
  ket0(0) = 1.0;
  LemmaRecord same = check_lrmul(ket0, identity(2), identity(2));
  CHECK(same.slack == 0.0);
  CHECK(same.rider_applicable);
  CHECK(same.rider_holds);

  for (double theta : {0.1, 0.3, 0.6}) {
    for (double theta2 : {0.2, 0.5, 0.7}) {
      LemmaRecord record =
          check_lrmul(ket0, rotation2(theta), rotation2(theta2));
      CHECK(record.epsilon == doctest::Approx(1.0 - std::cos(theta)).epsilon(1e-12));
      CHECK(record.measured ==
            doctest::Approx(std::cos(theta + theta2)).epsilon(1e-12));
      const double bound =
          1.0 - std::pow(std::sqrt(1.0 - std::cos(theta)) +
                             std::sqrt(1.0 - std::cos(theta2)),
                         2.0);
      CHECK(std::abs(record.bound - bound) <= 1e-10);
      CHECK(record.slack >= 0.0);
      CHECK(record.rider_applicable);
      CHECK(record.rider_holds);
    }
  }

  CHECK_THROWS(check_lrmul(ket0, 2.0 * identity(2), identity(2)));
}

TEST_CASE("check_lrmul: random sweep keeps nonnegative slack") {
  ggtest::Rng rng(61);
  std::uniform_int_distribution<Index> dims(2, 16);
  for (int it = 0; it < 300; ++it) {
    const Index n = dims(rng);
    Vector psi = ggtest::random_state(n, 1, rng).amp;
    LemmaRecord record = check_lrmul(psi, ggtest::random_unitary(n, rng),
                                     ggtest::random_unitary(n, rng));
    CHECK(record.slack >= -1e-12);
  }
}

TEST_CASE("check_cycling: identity case and random sweep") {
  BipartiteState psi2 = max_entangled(2);
  LemmaRecord same = check_cycling(psi2, identity(2), identity(2), identity(2));
  CHECK(same.epsilon <= 1e-15);
  CHECK(same.slack == doctest::Approx(0.0));

  ggtest::Rng rng(62);
  std::uniform_int_distribution<Index> dims(2, 8);
  for (int it = 0; it < 300; ++it) {
    const Index n = dims(rng);
    BipartiteState psi = ggtest::random_state(n, n, rng);
    // Mix near-identity and far unitaries so large deficits appear.
    Matrix u = (it % 3 == 0) ? ggtest::random_unitary(n, rng)
                             : Matrix(identity(n));
    LemmaRecord record = check_cycling(
        psi, u, ggtest::random_unitary(n, rng), ggtest::random_unitary(n, rng));
    CHECK(record.slack >= -1e-12);
  }
}

TEST_CASE("check_identity_decomposition: whole state and 2x2 closed form") {
  ggtest::Rng rng(63);
  BipartiteState psi = ggtest::random_state(3, 3, rng);
  Matrix a = 0.9 * ggtest::random_observable(3, rng);
  LemmaRecord whole = check_identity_decomposition(psi, psi, a);
  CHECK(whole.slack == doctest::Approx(0.0).epsilon(1e-12));

  const double alpha = 0.6, beta = 0.8, c = 0.3;
  BipartiteState skew{2, 2, Vector::Zero(4)};
  skew.amp(0) = alpha;
  skew.amp(3) = beta;
  BipartiteState phi{2, 2, Vector::Zero(4)};
  phi.amp(0) = alpha;
  Vector diag(2);
  diag << 1.0, 1.0 - c;
  LemmaRecord record =
      check_identity_decomposition(skew, phi, Matrix(diag.asDiagonal()));
  CHECK(record.epsilon == doctest::Approx(beta * beta * c).epsilon(1e-12));
  CHECK(record.measured == doctest::Approx(alpha * alpha).epsilon(1e-12));
  CHECK(record.slack == doctest::Approx(beta * beta * c).epsilon(1e-10));

  // A vector that is not dyad-aligned is rejected.
  BipartiteState crooked{2, 2, Vector::Zero(4)};
  crooked.amp(1) = 1.0;
  CHECK_THROWS(check_identity_decomposition(skew, crooked, a = identity(2)));
}

TEST_CASE("check_identity_decomposition: random dyad rescalings") {
  ggtest::Rng rng(64);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int it = 0; it < 300; ++it) {
    BipartiteState psi = ggtest::random_state(4, 5, rng);
    SchmidtDecomposition d = schmidt(psi);
    BipartiteState phi{4, 5, Vector::Zero(20)};
    for (Index i = 0; i < d.rank(); ++i) {
      const double alpha = (it % 2 == 0) ? (unit(rng) < 0.5 ? 0.0 : 1.0)
                                         : unit(rng);
      for (Index p = 0; p < 4; ++p)
        for (Index q = 0; q < 5; ++q)
          phi.amp(p * 5 + q) += alpha * d.coefficients(i) *
                                d.alice_basis(p, i) * d.bob_basis(q, i);
    }
    Matrix a = 0.95 * ggtest::random_observable(4, rng);
    LemmaRecord record = check_identity_decomposition(psi, phi, a);
    CHECK(record.slack >= -1e-12);
  }
}

TEST_CASE("check_commutation_decomposition: commuting and rotated cases") {
  BipartiteState psi2 = max_entangled(2);
  LemmaRecord same = check_commutation_decomposition(psi2, pauli_z(), pauli_z());
  CHECK(same.epsilon == doctest::Approx(0.0));
  CHECK(same.measured == doctest::Approx(1.0));
  CHECK(same.slack == doctest::Approx(0.0));

  for (double theta : {0.1, 0.2, 0.3}) {
    LemmaRecord record =
        check_commutation_decomposition(psi2, rotated_z(theta), pauli_z());
    CHECK(record.epsilon ==
          doctest::Approx(1.0 - std::cos(2.0 * theta)).epsilon(1e-10));
    CHECK(record.measured ==
          doctest::Approx(std::pow(std::cos(theta), 2.0)).epsilon(1e-10));
    CHECK(record.slack ==
          doctest::Approx(3.0 * std::pow(std::sin(theta), 2.0)).epsilon(1e-9));
  }

  CHECK_THROWS(check_commutation_decomposition(psi2, pauli_z(), identity(2)));
}

TEST_CASE("check_commutation_decomposition: random observable sweep") {
  ggtest::Rng rng(65);
  std::uniform_int_distribution<Index> dims(2, 6);
  int kept = 0;
  for (int it = 0; it < 400 && kept < 300; ++it) {
    const Index n = dims(rng);
    BipartiteState psi = ggtest::random_state(n, n, rng);
    Matrix e = ggtest::random_observable(n, rng);
    if (apply_alice(0.5 * (identity(n) - e), psi).amp.norm() < 1e-3) continue;
    ++kept;
    LemmaRecord record = check_commutation_decomposition(
        psi, ggtest::random_observable(n, rng), e);
    CHECK(record.slack >= -1e-12);
  }
  CHECK(kept >= 300);
}

TEST_CASE("approx_commutation_defect: vanishes exactly on perfect inputs") {
  ggtest::Rng rng(66);
  LcsGame gms = glued_magic_square();
  BipartiteStrategy mix = balanced_mix(rng);
  DefectRecord record =
      approx_commutation_defect(gms, mix, {2, 5, 8}, Side::Alice);
  CHECK(record.max_defect <= 1e-12);

  // Half the squared on-state commutator, when E is self-adjoint.
  CommutationReport commutation =
      check_glue_commutation(gms, mix, {2, 5, 8}, Side::Alice);
  for (size_t i = 0; i < record.defects.size(); ++i) {
    const double squared = commutation.residuals[i].value *
                           commutation.residuals[i].value / 2.0;
    CHECK(std::abs(record.defects[i].value - squared) <= 1e-12);
  }

  DefectRecord bob = approx_commutation_defect(gms, mix, {9, 12, 15}, Side::Bob);
  CHECK(bob.max_defect <= 1e-12);
}

TEST_CASE("perturb_strategy: calibration, determinism, guards") {
  ggtest::Rng rng(67);
  LcsGame gms = glued_magic_square();
  BipartiteStrategy base = balanced_mix(rng);

  BipartiteStrategy untouched = perturb_strategy(gms, base, 0.0, 7);
  CHECK((untouched.state.amp - base.state.amp).norm() == 0.0);

  BipartiteStrategy wobbly = perturb_strategy(gms, base, 1e-3, 7);
  const double deficit = 1.0 - winning_probability(gms, wobbly);
  CHECK(deficit >= 0.9e-3);
  CHECK(deficit <= 1.1e-3);

  BipartiteStrategy again = perturb_strategy(gms, base, 1e-3, 7);
  CHECK((again.state.amp - wobbly.state.amp).norm() == 0.0);
  for (int i = 0; i < 18; ++i)
    CHECK((again.alice[i] - wobbly.alice[i]).cwiseAbs().maxCoeff() == 0.0);

  BipartiteStrategy other_seed = perturb_strategy(gms, base, 1e-3, 8);
  CHECK((other_seed.alice[0] - wobbly.alice[0]).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS(perturb_strategy(gms, base, 0.5, 7));
}

TEST_CASE("perturbed winning probability stays within the calibration band") {
  ggtest::Rng rng(68);
  LcsGame gms = glued_magic_square();
  BipartiteStrategy wobbly =
      perturb_strategy(gms, balanced_mix(rng), 1e-3, 99);
  const double value = winning_probability(gms, wobbly);
  CHECK(value <= 1.0);
  CHECK(value >= 1.0 - 2e-3);
}

TEST_CASE("robust_decompose_gms: exact limit matches the exact pipeline") {
  ggtest::Rng rng(69);
  BipartiteStrategy mix = balanced_mix(rng);
  mix = conjugate_local(mix, ggtest::random_unitary(8, rng),
                        ggtest::random_unitary(8, rng));

  ExtractionReport robust = robust_decompose_gms(mix);
  DecompositionReport exact = decompose_gms(mix);
  CHECK(!robust.degenerate);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(robust.parts[k].present);
    CHECK(robust.parts[k].max_relation_residual <= 1e-10);
    CHECK(robust.parts[k].unitarized_ms_value >= 1.0 - 1e-9);
    CHECK(robust.parts[k].norm_squared ==
          doctest::Approx(exact.parts[k].weight * exact.parts[k].weight)
              .epsilon(1e-9));
    CHECK(std::abs(robust.parts[k].cross_consistency) <= 1e-10);
  }
}

TEST_CASE("robust_decompose_gms: perturbed inputs and degenerate branch") {
  ggtest::Rng rng(70);
  LcsGame gms = glued_magic_square();
  BipartiteStrategy wobbly =
      perturb_strategy(gms, balanced_mix(rng), 1e-3, 11);
  ExtractionReport report = robust_decompose_gms(wobbly);
  CHECK(!report.degenerate);
  for (const ExtractionPart& part : report.parts) {
    REQUIRE(part.present);
    CHECK(part.max_relation_residual > 0.0);
    CHECK(part.max_relation_residual <= 0.2);
    CHECK(part.unitarized_ms_value >= 0.9);
  }

  BipartiteStrategy lone = perturb_strategy(
      gms, build_glued_strategy(1, ggtest::random_bell_representation(rng)),
      1e-3, 12);
  ExtractionReport one_sided = robust_decompose_gms(lone);
  CHECK(one_sided.degenerate);
  CHECK(one_sided.parts[0].present);
  CHECK(!one_sided.parts[1].present);

  BipartiteStrategy too_bad = perturb_strategy(gms, balanced_mix(rng), 0.1, 13);
  CHECK_THROWS(robust_decompose_gms(too_bad));
}

TEST_CASE("robust_decompose_gms: honours the fixed-equation choice") {
  ggtest::Rng rng(71);
  LcsGame gms = glued_magic_square();
  BipartiteStrategy wobbly =
      perturb_strategy(gms, balanced_mix(rng), 1e-3, 21);
  // Same observables, so the choice is invisible.
  ExtractionReport low = robust_decompose_gms(
      wobbly, FixedObservableChoice::kLowestEquation);
  ExtractionReport high = robust_decompose_gms(
      wobbly, FixedObservableChoice::kHighestEquation);
  CHECK(low.parts[0].max_relation_residual ==
        doctest::Approx(high.parts[0].max_relation_residual));

  // An override on the merged equation makes the two choices diverge
  // (variable 2 sits in equation 0 and the merged equation 10).
  std::mt19937_64 rot_rng(5);
  Matrix h = ggtest::random_hermitian(8, rot_rng);
  h /= operator_norm(h);
  Matrix u = (Complex(0, 1) * 0.02 * h).exp();
  wobbly.alice_per_equation[{10, 2}] =
      symmetrize(u * wobbly.alice[2] * u.adjoint());
  ExtractionReport low2 = robust_decompose_gms(
      wobbly, FixedObservableChoice::kLowestEquation);
  ExtractionReport high2 = robust_decompose_gms(
      wobbly, FixedObservableChoice::kHighestEquation);
  CHECK(std::abs(low2.parts[0].max_relation_residual -
                 high2.parts[0].max_relation_residual) > 0.0);
}

TEST_CASE("robust_sweep: slacks, monotone decay, finite slopes") {
  ggtest::Rng rng(72);
  BipartiteStrategy base = balanced_mix(rng);
  RobustSweepResult sweep = robust_sweep(base, {1e-2, 1e-3}, {1, 2});
  CHECK(!sweep.lemma_rows.empty());
  CHECK(sweep.min_lemma_slack >= -1e-12);
  CHECK(sweep.extraction_rows.size() == 4);
  CHECK(sweep.defect_monotone);
  CHECK(sweep.extraction_monotone);
  CHECK(sweep.defect_slope > 0.0);
  CHECK(sweep.extraction_slope > 0.0);
  CHECK(std::isfinite(sweep.defect_slope));
  CHECK(std::isfinite(sweep.extraction_slope));
}

TEST_CASE("robust_sweep: results do not depend on the worker count") {
  ggtest::Rng rng(73);
  BipartiteStrategy base = balanced_mix(rng);
  setenv("GLUEDGAMES_THREADS", "1", 1);
  RobustSweepResult serial = robust_sweep(base, {1e-2, 1e-3}, {4, 5});
  setenv("GLUEDGAMES_THREADS", "2", 1);
  RobustSweepResult parallel = robust_sweep(base, {1e-2, 1e-3}, {4, 5});
  unsetenv("GLUEDGAMES_THREADS");
  REQUIRE(serial.lemma_rows.size() == parallel.lemma_rows.size());
  for (size_t i = 0; i < serial.lemma_rows.size(); ++i) {
    CHECK(serial.lemma_rows[i].lemma == parallel.lemma_rows[i].lemma);
    CHECK(serial.lemma_rows[i].measured == parallel.lemma_rows[i].measured);
    CHECK(serial.lemma_rows[i].slack == parallel.lemma_rows[i].slack);
  }
  CHECK(serial.extraction_slope == parallel.extraction_slope);
}
