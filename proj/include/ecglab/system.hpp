#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecglab/errors.hpp"

namespace ecglab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One point particle in Hartree atomic units (hbar = m_e = e = 1/(4 pi eps0) = 1).
struct Particle {
  double mass = 0.0;
  double charge = 0.0;
  std::string label;
};

/// Named masses accepted by the config layer, in units of the electron mass.
inline std::optional<double> mass_preset(const std::string& name) {
  if (name == "electron") return 1.0;
  if (name == "proton") return 1836.15267343;
  if (name == "deuteron") return 3670.48296788;
  // Effectively clamps the heavy particle; used for fixed-nucleus benchmarks.
  if (name == "fixed-nucleus") return 1.0e12;
  return std::nullopt;
}

/// A collection of N >= 2 point particles, canonically sorted heaviest-first
/// so the heavy-particle-centered coordinate transformation is well defined.
/// Original labels are preserved through the sort.
class ParticleSystem {
 public:
  explicit ParticleSystem(std::vector<Particle> particles)
      : particles_(std::move(particles)) {
    if (particles_.size() < 2)
      throw std::invalid_argument("ParticleSystem: need at least two particles");
    for (const Particle& p : particles_) {
      if (!(p.mass > 0.0) || !std::isfinite(p.mass))
        throw std::invalid_argument("ParticleSystem: particle mass must be positive ('" +
                                    p.label + "')");
      if (!std::isfinite(p.charge))
        throw std::invalid_argument("ParticleSystem: particle charge must be finite ('" +
                                    p.label + "')");
    }
    std::stable_sort(particles_.begin(), particles_.end(),
                     [](const Particle& a, const Particle& b) { return a.mass > b.mass; });
  }

  int size() const { return static_cast<int>(particles_.size()); }
  const std::vector<Particle>& particles() const { return particles_; }
  const Particle& particle(int i) const { return particles_.at(static_cast<std::size_t>(i)); }

  double total_mass() const {
    double m = 0.0;
    for (const Particle& p : particles_) m += p.mass;
    return m;
  }

  double total_charge() const {
    double q = 0.0;
    for (const Particle& p : particles_) q += p.charge;
    return q;
  }

  double abs_charge_sum() const {
    double q = 0.0;
    for (const Particle& p : particles_) q += std::abs(p.charge);
    return q;
  }

  /// True when the net charge vanishes; required for any dipole work since the
  /// dipole of a charged distribution depends on the choice of origin.
  bool neutral() const {
    return std::abs(total_charge()) <= 1e-12 * std::max(1.0, abs_charge_sum());
  }

 private:
  std::vector<Particle> particles_;
};

enum class TransformKind {
  HeavyNucleusCentered,  // r1' = r_CM, rj' = rj - r1 (heaviest particle)
};

/// Linear coordinate transformation r' = T r separating the center of mass.
/// Row 0 holds the mass fractions (the CM row); row j>0 encodes rj - r0.
inline Matrix build_transformation(const ParticleSystem& sys,
                                   TransformKind kind = TransformKind::HeavyNucleusCentered) {
  if (kind != TransformKind::HeavyNucleusCentered)
    throw std::invalid_argument("build_transformation: unsupported transformation kind");
  const int N = sys.size();
  const double M = sys.total_mass();
  Matrix T = Matrix::Zero(N, N);
  for (int i = 0; i < N; ++i) T(0, i) = sys.particle(i).mass / M;
  for (int j = 1; j < N; ++j) {
    T(j, 0) = -1.0;
    T(j, j) = 1.0;
  }
  // Cannot be singular for this construction; checked anyway.
  Eigen::PartialPivLU<Matrix> lu(T);
  if (std::abs(lu.determinant()) < 1e-14)
    throw NumericalError("build_transformation: internal error, singular transformation");
  return T;
}

/// How a Coulomb pair distance looks in internal coordinates.
enum class PairForm {
  SingleCoordinate,      // r_ij = |x_k|            (pair involving the reference particle)
  CoordinateDifference,  // r_ij = |x_a - x_b|      (pair of two non-reference particles)
};

struct CoulombPair {
  int particle_i = 0;  // canonical (sorted) particle indices, i < j
  int particle_j = 0;
  double charge_product = 0.0;
  PairForm form = PairForm::SingleCoordinate;
  int coord_a = 0;   // internal coordinate index
  int coord_b = -1;  // second internal coordinate (CoordinateDifference only)
};

/// Signed combination of internal coordinates whose norm is the pair distance.
inline Vector pair_direction(const CoulombPair& pair, int n) {
  Vector d = Vector::Zero(n);
  d(pair.coord_a) = 1.0;
  if (pair.form == PairForm::CoordinateDifference) {
    if (pair.coord_b < 0 || pair.coord_b >= n)
      throw std::invalid_argument("pair_direction: bad coordinate index");
    d(pair.coord_b) = -1.0;
  }
  return d;
}

/// Everything the translation-free Hamiltonian needs, derived from a particle
/// system and its CM-separating transformation:
///   T, T^-1        the coordinate transformation and its inverse,
///   lambda         the symmetric positive-definite kinetic coupling matrix
///                  over internal coordinates (kinetic = 1/2 sum lambda_jk pj.pk),
///   pairs          every particle pair mapped onto internal coordinates,
///   dipole_coeffs  effective charges c_j with mu_z = sum_j c_j z_j (neutral only).
struct InternalSpec {
  Matrix T;
  Matrix T_inv;
  Matrix lambda;
  double total_mass = 0.0;
  std::vector<CoulombPair> pairs;
  std::optional<Vector> dipole_coeffs;

  int n() const { return static_cast<int>(lambda.rows()); }
};

/// Builds the internal-coordinate kinetic matrix and pair table from T.
/// Fails if the CM row does not decouple, which would signal a broken T.
inline InternalSpec internal_hamiltonian(const ParticleSystem& sys, const Matrix& T) {
  const int N = sys.size();
  if (T.rows() != N || T.cols() != N)
    throw std::invalid_argument("internal_hamiltonian: transformation size mismatch");
  Matrix full = Matrix::Zero(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k <= j; ++k) {
      double v = 0.0;
      for (int i = 0; i < N; ++i) v += T(j, i) * T(k, i) / sys.particle(i).mass;
      full(j, k) = full(k, j) = v;
    }
  for (int k = 1; k < N; ++k)
    if (std::abs(full(0, k)) > 1e-12)
      throw NumericalError(
          "internal_hamiltonian: center-of-mass kinetic coupling did not vanish");

  InternalSpec spec;
  spec.T = T;
  spec.T_inv = T.inverse();
  spec.total_mass = sys.total_mass();
  spec.lambda = full.block(1, 1, N - 1, N - 1);

  Eigen::LLT<Matrix> llt(spec.lambda);
  if (llt.info() != Eigen::Success)
    throw NumericalError("internal_hamiltonian: kinetic matrix not positive definite");

  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      CoulombPair p;
      p.particle_i = i;
      p.particle_j = j;
      p.charge_product = sys.particle(i).charge * sys.particle(j).charge;
      if (i == 0) {
        p.form = PairForm::SingleCoordinate;
        p.coord_a = j - 1;
      } else {
        p.form = PairForm::CoordinateDifference;
        p.coord_a = i - 1;
        p.coord_b = j - 1;
      }
      spec.pairs.push_back(p);
    }
  return spec;
}

/// Coefficients c_j of the internal coordinates in the dipole operator,
/// c_j = sum_i q_i (T^-1)_ij. The CM coefficient is the total charge and
/// vanishes identically for a neutral system, so it is not stored.
inline Vector effective_dipole_charges(const ParticleSystem& sys, const Matrix& T_inv) {
  if (!sys.neutral())
    throw std::invalid_argument(
        "effective_dipole_charges: dipole is origin-dependent for a charged system");
  const int N = sys.size();
  Vector c(N - 1);
  for (int k = 1; k < N; ++k) {
    double v = 0.0;
    for (int i = 0; i < N; ++i) v += sys.particle(i).charge * T_inv(i, k);
    c(k - 1) = v;
  }
  return c;
}

/// Convenience: transformation + internal Hamiltonian + dipole coefficients.
inline InternalSpec build_internal_spec(
    const ParticleSystem& sys, TransformKind kind = TransformKind::HeavyNucleusCentered) {
  InternalSpec spec = internal_hamiltonian(sys, build_transformation(sys, kind));
  if (sys.neutral()) spec.dipole_coeffs = effective_dipole_charges(sys, spec.T_inv);
  return spec;
}

}  // namespace ecglab
