#pragma once

#include <random>
#include <vector>

#include "gluedgames/games.hpp"
#include "gluedgames/linalg.hpp"
#include "gluedgames/strategies.hpp"

namespace ggtest {

using gluedgames::BipartiteState;
using gluedgames::Complex;
using gluedgames::Index;
using gluedgames::Matrix;
using gluedgames::Vector;

using Rng = std::mt19937_64;

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
  return m;
}

inline Matrix random_unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phases so the distribution is Haar.
  for (Index i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

/// Random self-adjoint involution with the given number of -1 eigenvalues.
inline Matrix random_involution(Index n, Index minus_rank, Rng& rng) {
  Matrix u = random_unitary(n, rng);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = (i < minus_rank) ? -1.0 : 1.0;
  return gluedgames::symmetrize(u * d.asDiagonal() * u.adjoint());
}

inline Matrix random_observable(Index n, Rng& rng) {
  std::uniform_int_distribution<Index> pick(0, n);
  return random_involution(n, pick(rng), rng);
}

inline Matrix random_hermitian(Index n, Rng& rng) {
  return gluedgames::symmetrize(random_matrix(n, n, rng));
}

inline BipartiteState random_state(Index dim_a, Index dim_b, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector amp(dim_a * dim_b);
  for (Index i = 0; i < amp.size(); ++i)
    amp(i) = Complex(gauss(rng), gauss(rng));
  amp /= amp.norm();
  return BipartiteState{dim_a, dim_b, amp};
}

/// Gaussian elimination over Z/2Z; true iff the system has a solution.
inline bool gf2_satisfiable(const gluedgames::LinearSystem& sys) {
  std::vector<std::vector<int>> rows;
  for (const auto& eq : sys.equations) {
    std::vector<int> row = eq.coeffs;
    row.push_back(eq.rhs);
    rows.push_back(std::move(row));
  }
  int pivot_row = 0;
  for (int col = 0; col < sys.num_vars; ++col) {
    int found = -1;
    for (int r = pivot_row; r < static_cast<int>(rows.size()); ++r)
      if (rows[r][col]) {
        found = r;
        break;
      }
    if (found < 0) continue;
    std::swap(rows[pivot_row], rows[found]);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r != pivot_row && rows[r][col])
        for (int c = 0; c <= sys.num_vars; ++c) rows[r][c] ^= rows[pivot_row][c];
    }
    ++pivot_row;
  }
  for (const auto& row : rows) {
    bool all_zero = true;
    for (int c = 0; c < sys.num_vars; ++c) all_zero &= (row[c] == 0);
    if (all_zero && row[sys.num_vars]) return false;
  }
  return true;
}

inline std::array<int, 4> random_character(Rng& rng) {
  std::array<int, 4> chi;
  for (int& v : chi) v = (rng() & 1u) ? 1 : -1;
  return chi;
}

inline gluedgames::CharacterRepresentation random_bell_representation(
    Rng& rng) {
  std::vector<std::array<int, 4>> chars;
  for (int i = 0; i < 4; ++i) chars.push_back(random_character(rng));
  return gluedgames::representation_from_characters(std::move(chars),
                                                    gluedgames::bell_basis());
}

struct GmsInstance {
  gluedgames::BipartiteStrategy strategy;
  double weight1 = 0.0;
  double weight2 = 0.0;
};

/// Convex mix of the two glued-strategy families with known weights, hidden
/// behind random local unitaries; optionally padded with unused dimensions
/// carrying arbitrary involutions and no state weight.
inline GmsInstance random_gms_convex_instance(Rng& rng, bool conjugate = true,
                                              Index pad = 0) {
  using namespace gluedgames;
  GmsInstance out;
  std::uniform_real_distribution<double> angle(0.15, M_PI / 2 - 0.15);
  const double theta = angle(rng);
  out.weight1 = std::cos(theta);
  out.weight2 = std::sin(theta);
  BipartiteStrategy s1 =
      build_glued_strategy(1, random_bell_representation(rng));
  BipartiteStrategy s2 =
      build_glued_strategy(2, random_bell_representation(rng));
  BipartiteStrategy mix =
      convex_combination({{out.weight1, s1}, {out.weight2, s2}});
  if (pad > 0) {
    BipartiteStrategy padded;
    padded.state = BipartiteState{mix.dim_a() + pad, mix.dim_b() + pad,
                                  Vector::Zero((mix.dim_a() + pad) *
                                               (mix.dim_b() + pad))};
    for (Index i = 0; i < mix.dim_a(); ++i)
      for (Index j = 0; j < mix.dim_b(); ++j)
        padded.state.amp(i * (mix.dim_b() + pad) + j) =
            mix.state.amp(i * mix.dim_b() + j);
    for (int i = 0; i < mix.num_vars(); ++i) {
      padded.alice.push_back(gluedgames::direct_sum(
          {mix.alice[i], random_observable(pad, rng)}));
      padded.bob.push_back(gluedgames::direct_sum(
          {mix.bob[i], random_observable(pad, rng)}));
    }
    mix = std::move(padded);
  }
  if (conjugate) {
    Matrix ua = random_unitary(mix.dim_a(), rng);
    Matrix ub = random_unitary(mix.dim_b(), rng);
    mix = conjugate_local(mix, ua, ub);
  }
  out.strategy = std::move(mix);
  return out;
}

/// Solutions of the homogeneous version of a small GF(2) system, as sign
/// vectors (+1 for bit 0, -1 for bit 1). Used to build inactive-part scalar
/// observables for glued-game strategies.
inline std::vector<int> random_homogeneous_signs(
    const gluedgames::LinearSystem& sys, Rng& rng) {
  const int k = sys.num_vars;
  for (int attempt = 0; attempt < 4096; ++attempt) {
    std::uint32_t bits = static_cast<std::uint32_t>(rng()) & ((1u << k) - 1u);
    bool ok = true;
    for (const auto& eq : sys.equations) {
      int parity = 0;
      for (int j = 0; j < k; ++j)
        if (eq.coeffs[j] && (bits >> j & 1u)) parity ^= 1;
      if (parity != 0) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::vector<int> signs(k);
      for (int j = 0; j < k; ++j) signs[j] = (bits >> j & 1u) ? -1 : 1;
      return signs;
    }
  }
  return std::vector<int>(k, 1);
}

/// Perfect strategy for glue(first, second) playing `active_ideal` on one
/// part and scalar signs solving the other part's homogeneous system on the
/// rest (the mirror relabelling of glue() is honoured).
inline gluedgames::BipartiteStrategy part_active_glued_strategy(
    const gluedgames::LcsGame& first, const gluedgames::LcsGame& second,
    int active_part, const gluedgames::BipartiteStrategy& active_ideal,
    Rng& rng) {
  using gluedgames::BipartiteStrategy;
  using gluedgames::identity;
  const int k = first.num_vars();
  const int l = second.num_vars();
  const gluedgames::LcsGame& inactive = (active_part == 1) ? second : first;
  std::vector<int> signs = random_homogeneous_signs(inactive.system, rng);

  BipartiteStrategy s;
  s.state = active_ideal.state;
  s.alice.resize(k + l);
  s.bob.resize(k + l);
  const Matrix ida = identity(active_ideal.dim_a());
  const Matrix idb = identity(active_ideal.dim_b());
  for (int j = 0; j < k; ++j) {
    if (active_part == 1) {
      s.alice[j] = active_ideal.alice[j];
      s.bob[j] = active_ideal.bob[j];
    } else {
      s.alice[j] = signs[j] * ida;
      s.bob[j] = signs[j] * idb;
    }
  }
  for (int m = 0; m < l; ++m) {
    const int orig = l - 1 - m;  // mirror relabelling of the second part
    if (active_part == 2) {
      s.alice[k + m] = active_ideal.alice[orig];
      s.bob[k + m] = active_ideal.bob[orig];
    } else {
      s.alice[k + m] = signs[orig] * ida;
      s.bob[k + m] = signs[orig] * idb;
    }
  }
  return s;
}

}  // namespace ggtest
