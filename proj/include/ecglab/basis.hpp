#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ecglab/system.hpp"

namespace ecglab {

/// One 3-vector shift per internal coordinate, stored as rows.
using ShiftMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Floating s-type explicitly correlated Gaussian over n internal coordinates,
///   g(x) = exp( -sum_jk A_jk (x_j - s_j) . (x_k - s_k) ),
/// parametrized by the Cholesky factor L of the correlation matrix A = L L^T.
/// Keeping L (positive diagonal) instead of A means any parameter move during
/// optimization stays inside the positive-definite cone.
struct FloatingECG {
  Matrix L;       // n x n lower triangular, diagonal > 0
  ShiftMatrix s;  // n x 3

  int n() const { return static_cast<int>(L.rows()); }

  Matrix correlation() const { return L * L.transpose(); }

  double value(const ShiftMatrix& x) const {
    const ShiftMatrix d = x - s;
    const Matrix a = correlation();
    double q = 0.0;
    for (int j = 0; j < n(); ++j)
      for (int k = 0; k < n(); ++k) q += a(j, k) * d.row(j).dot(d.row(k));
    return std::exp(-q);
  }
};

/// Inversion image of a Gaussian: same correlation matrix, negated shifts.
/// An involution: applying it twice reproduces the input bit for bit.
inline FloatingECG parity_partner(const FloatingECG& g) { return {g.L, -g.s}; }

struct BasisSet {
  std::vector<FloatingECG> members;
  bool parity_closed = false;
  /// pairing[i] is the index of member i's inversion partner (i itself when
  /// the shift is zero). Filled by parity_close, empty otherwise.
  std::vector<int> pairing;

  int size() const { return static_cast<int>(members.size()); }
  int n() const { return members.empty() ? 0 : members.front().n(); }
};

/// Flips every shift in the basis. Used for warm starts at mirrored fields.
inline BasisSet mirror(const BasisSet& basis) {
  BasisSet out = basis;
  for (FloatingECG& g : out.members) g.s = -g.s;
  return out;
}

namespace detail {
inline bool shifts_opposite(const ShiftMatrix& a, const ShiftMatrix& b, double tol = 1e-12) {
  return ((a + b).cwiseAbs().maxCoeff() <= tol);
}
inline bool same_L(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && (a.array() == b.array()).all();
}
}  // namespace detail

/// Returns a basis closed under inversion: keeps all input members and appends
/// the missing partners (shift-matching tolerance 1e-12). At most doubles the
/// size; idempotent on an already closed basis.
inline BasisSet parity_close(const BasisSet& basis) {
  BasisSet out;
  out.members = basis.members;
  const int k0 = out.size();
  std::vector<int> pairing(static_cast<std::size_t>(k0), -1);
  for (int i = 0; i < k0; ++i) {
    if (pairing[static_cast<std::size_t>(i)] >= 0) continue;
    const FloatingECG& gi = out.members[static_cast<std::size_t>(i)];
    if (detail::shifts_opposite(gi.s, gi.s)) {
      pairing[static_cast<std::size_t>(i)] = i;
      continue;
    }
    int match = -1;
    for (int j = i + 1; j < k0 && match < 0; ++j) {
      if (pairing[static_cast<std::size_t>(j)] >= 0) continue;
      const FloatingECG& gj = out.members[static_cast<std::size_t>(j)];
      if (detail::same_L(gi.L, gj.L) && detail::shifts_opposite(gi.s, gj.s)) match = j;
    }
    if (match >= 0) {
      pairing[static_cast<std::size_t>(i)] = match;
      pairing[static_cast<std::size_t>(match)] = i;
    } else {
      out.members.push_back(parity_partner(gi));
      pairing[static_cast<std::size_t>(i)] = out.size() - 1;
      pairing.push_back(i);
    }
  }
  out.parity_closed = true;
  out.pairing = std::move(pairing);
  return out;
}

enum class Placement { Origin, TwoCenter, Random };

struct SeedOptions {
  Placement placement = Placement::Origin;
  double separation = 3.0;   // two-center distance along z
  double scale = 1.0;        // random shift range
  std::uint64_t seed = 1;
};

namespace detail {
/// Deterministic uniform in [0,1) from raw generator bits; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}
}  // namespace detail

/// Deterministic starting basis of K members. Exponent ladders are geometric
/// with L diagonals inside [0.1, 10]; two-center placement splits the members
/// between the origin and (0,0,separation).
inline BasisSet seed_basis(const InternalSpec& spec, int K, const SeedOptions& opts) {
  if (K < 1) throw std::invalid_argument("seed_basis: K must be at least 1");
  const int n = spec.n();
  BasisSet basis;
  basis.members.reserve(static_cast<std::size_t>(K));

  auto ladder = [](int k, int count) {
    // exponents 0.15 .. 6.0, i.e. L diagonals ~0.39 .. 2.45
    const double lo = 0.15, hi = 6.0;
    const double t = count > 1 ? static_cast<double>(k) / (count - 1) : 0.5;
    return lo * std::pow(hi / lo, t);
  };

  switch (opts.placement) {
    case Placement::Origin: {
      for (int k = 0; k < K; ++k) {
        FloatingECG g;
        g.L = std::sqrt(ladder(k, K)) * Matrix::Identity(n, n);
        g.s = ShiftMatrix::Zero(n, 3);
        basis.members.push_back(std::move(g));
      }
      break;
    }
    case Placement::TwoCenter: {
      const int at_origin = (K + 1) / 2;
      for (int k = 0; k < K; ++k) {
        const bool origin = k < at_origin;
        const int local = origin ? k : k - at_origin;
        const int count = origin ? at_origin : K - at_origin;
        FloatingECG g;
        g.L = std::sqrt(ladder(local, count)) * Matrix::Identity(n, n);
        g.s = ShiftMatrix::Zero(n, 3);
        if (!origin) g.s.col(2).setConstant(opts.separation);
        basis.members.push_back(std::move(g));
      }
      break;
    }
    case Placement::Random: {
      std::mt19937_64 rng(opts.seed);
      for (int k = 0; k < K; ++k) {
        FloatingECG g;
        g.L = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
          g.L(i, i) = 0.1 * std::pow(100.0, detail::uniform01(rng));  // in [0.1, 10]
          for (int j = 0; j < i; ++j) g.L(i, j) = detail::uniform(rng, -0.3, 0.3);
        }
        g.s = ShiftMatrix::Zero(n, 3);
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < 3; ++c)
            g.s(i, c) = detail::uniform(rng, -opts.scale, opts.scale);
        basis.members.push_back(std::move(g));
      }
      break;
    }
  }
  return basis;
}

}  // namespace ecglab
