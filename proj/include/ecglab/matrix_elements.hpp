#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "ecglab/basis.hpp"
#include "ecglab/system.hpp"

namespace ecglab {

/// Lowest-order Boys function F0(x) = int_0^1 exp(-x t^2) dt.
/// erf-based branch is accurate to a few ulps on [0, 200]; the short series
/// covers the removable singularity at x -> 0.
inline double boys_f0(double x) {
  if (x < 1e-8) return 1.0 - x / 3.0 + x * x / 10.0;
  const double sx = std::sqrt(x);
  return 0.5 * std::sqrt(std::numbers::pi) * std::erf(sx) / sx;
}

/// Product of two floating Gaussians is again a Gaussian:
///   g_a g_b = exp(-gamma) exp(-(x-e)^T (C (x) I3) (x-e)),
/// with C = A + B, e = C^-1 (A s_a + B s_b) and
/// gamma = sum_d (s_a - s_b)_d^T A C^-1 B (s_a - s_b)_d,
/// the cancellation-free form of the completed square.
struct PairGeometry {
  Matrix A, B, C;
  Eigen::LLT<Matrix> chol;  // of C
  Matrix M_AB;              // A C^-1 B
  ShiftMatrix center;       // e
  double gamma = 0.0;
  double overlap = 0.0;

  static PairGeometry build(const FloatingECG& a, const FloatingECG& b) {
    if (a.n() != b.n())
      throw std::invalid_argument("matrix element: Gaussian dimension mismatch");
    const int n = a.n();
    PairGeometry g;
    g.A = a.correlation();
    g.B = b.correlation();
    g.C = g.A + g.B;
    g.chol.compute(g.C);
    if (g.chol.info() != Eigen::Success)
      throw NumericalError("matrix element: combined correlation matrix not SPD");
    g.M_AB = g.A * g.chol.solve(g.B);
    g.center = g.chol.solve(g.A * a.s + g.B * b.s);
    const ShiftMatrix delta = a.s - b.s;
    g.gamma = (delta.transpose() * g.M_AB * delta).trace();
    double logdet = 0.0;
    const Matrix Lc = g.chol.matrixL();
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(Lc(i, i));
    g.overlap = std::exp(1.5 * (n * std::log(std::numbers::pi) - logdet) - g.gamma);
    return g;
  }
};

namespace detail {

inline double kinetic_from(const PairGeometry& g, const FloatingECG& a, const FloatingECG& b,
                           const Matrix& lambda) {
  // <g_a| 1/2 sum_jk lambda_jk p_j.p_k |g_b>
  //   = S [ 3 sum_jk lambda_jk (A C^-1 B)_jk + 2 tr(v^T lambda w) ],
  // v = A (e - s_a), w = B (e - s_b).
  double quad = 3.0 * lambda.cwiseProduct(g.M_AB).sum();
  const ShiftMatrix v = g.A * (g.center - a.s);
  const ShiftMatrix w = g.B * (g.center - b.s);
  quad += 2.0 * (v.transpose() * lambda * w).trace();
  return g.overlap * quad;
}

inline double coulomb_from(const PairGeometry& g, const CoulombPair& pair, int n) {
  // <g_a| 1/|d.x| |g_b> = S * 2/sqrt(pi beta) * F0(|wbar|^2 / beta),
  // beta = d^T C^-1 d, wbar = e^T d.
  const Vector d = pair_direction(pair, n);
  const double beta = d.dot(g.chol.solve(d));
  const Eigen::Vector3d wbar = g.center.transpose() * d;
  const double x = wbar.squaredNorm() / beta;
  return pair.charge_product * g.overlap * 2.0 / std::sqrt(std::numbers::pi * beta) *
         boys_f0(x);
}

inline double dipole_from(const PairGeometry& g, const Vector& coeffs) {
  // First moment of the product Gaussian: <z_j> = e_{j,z}.
  return g.overlap * coeffs.dot(g.center.col(2));
}

}  // namespace detail

/// <g_a|g_b> over all internal coordinates; positive, symmetric in arguments.
inline double overlap(const FloatingECG& a, const FloatingECG& b) {
  return PairGeometry::build(a, b).overlap;
}

/// <g_a| 1/2 sum_jk lambda_jk p_j.p_k |g_b> with the internal mass matrix lambda.
inline double kinetic(const FloatingECG& a, const FloatingECG& b, const Matrix& lambda) {
  if (lambda.rows() != a.n() || lambda.cols() != a.n())
    throw std::invalid_argument("kinetic: mass matrix dimension mismatch");
  return detail::kinetic_from(PairGeometry::build(a, b), a, b, lambda);
}

/// q_i q_j <g_a| 1/r |g_b> for one pair of the spec's Coulomb table.
inline double coulomb(const FloatingECG& a, const FloatingECG& b, const CoulombPair& pair,
                      const InternalSpec& spec) {
  const int n = a.n();
  if (spec.n() != n) throw std::invalid_argument("coulomb: spec dimension mismatch");
  if (pair.coord_a < 0 || pair.coord_a >= n ||
      (pair.form == PairForm::CoordinateDifference && (pair.coord_b < 0 || pair.coord_b >= n)))
    throw std::invalid_argument("coulomb: pair coordinates out of range");
  return detail::coulomb_from(PairGeometry::build(a, b), pair, n);
}

/// <g_a| sum_j c_j z_j |g_b>; antisymmetric under joint inversion of both shifts.
inline double dipole_z(const FloatingECG& a, const FloatingECG& b, const Vector& coeffs) {
  if (coeffs.size() != a.n())
    throw std::invalid_argument("dipole_z: coefficient dimension mismatch");
  return detail::dipole_from(PairGeometry::build(a, b), coeffs);
}

/// Overlap, kinetic, Coulomb and dipole-z matrices over one basis. All four are
/// exactly symmetric (upper triangle computed, mirrored). The dipole matrix is
/// zero (has_dipole = false) for charged systems.
struct OperatorMatrices {
  Matrix overlap;
  Matrix kinetic;
  Matrix coulomb;
  Matrix dipole;
  bool has_dipole = false;

  Matrix hamiltonian(double epsilon) const {
    if (epsilon != 0.0 && !has_dipole)
      throw std::invalid_argument("hamiltonian: field requires a neutral system");
    if (epsilon == 0.0) return kinetic + coulomb;
    return kinetic + coulomb - epsilon * dipole;
  }
};

namespace detail {

inline void compute_elements(const BasisSet& basis, const InternalSpec& spec, int i, int j,
                             OperatorMatrices& m) {
  // Canonical argument order: incremental row refreshes then reproduce a full
  // assembly bit for bit.
  const FloatingECG& a = basis.members[static_cast<std::size_t>(std::min(i, j))];
  const FloatingECG& b = basis.members[static_cast<std::size_t>(std::max(i, j))];
  const PairGeometry g = PairGeometry::build(a, b);
  const int n = basis.n();
  m.overlap(i, j) = m.overlap(j, i) = g.overlap;
  m.kinetic(i, j) = m.kinetic(j, i) = kinetic_from(g, a, b, spec.lambda);
  double v = 0.0;
  for (const CoulombPair& pair : spec.pairs) v += coulomb_from(g, pair, n);
  m.coulomb(i, j) = m.coulomb(j, i) = v;
  if (m.has_dipole)
    m.dipole(i, j) = m.dipole(j, i) = dipole_from(g, *spec.dipole_coeffs);
}

}  // namespace detail

inline OperatorMatrices assemble_matrices(const BasisSet& basis, const InternalSpec& spec) {
  const int K = basis.size();
  if (K < 1) throw std::invalid_argument("assemble_matrices: empty basis");
  if (basis.n() != spec.n())
    throw std::invalid_argument("assemble_matrices: basis/spec dimension mismatch");
  OperatorMatrices m;
  m.overlap = Matrix::Zero(K, K);
  m.kinetic = Matrix::Zero(K, K);
  m.coulomb = Matrix::Zero(K, K);
  m.dipole = Matrix::Zero(K, K);
  m.has_dipole = spec.dipole_coeffs.has_value();
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j) detail::compute_elements(basis, spec, i, j, m);
  return m;
}

/// Recomputes row/column `member` of all four matrices after that member
/// changed. Lets the optimizer avoid full reassembly.
inline void refresh_member(OperatorMatrices& m, const BasisSet& basis, const InternalSpec& spec,
                           int member) {
  const int K = basis.size();
  for (int j = 0; j < K; ++j) detail::compute_elements(basis, spec, member, j, m);
}

}  // namespace ecglab
