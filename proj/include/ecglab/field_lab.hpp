#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecglab/variational.hpp"

namespace ecglab {

/// Least-squares polynomial in the monomials eps^p for a fixed power list.
struct PolyFit {
  std::vector<int> powers;  // strictly increasing, >= 0
  Vector coeffs;
  double residual_rms = 0.0;
  double condition_estimate = 1.0;
  bool is_interpolation = false;  // as many coefficients as samples

  bool has_power(int p) const {
    return std::find(powers.begin(), powers.end(), p) != powers.end();
  }
  double coeff_for_power(int p) const {
    for (std::size_t k = 0; k < powers.size(); ++k)
      if (powers[k] == p) return coeffs(static_cast<Eigen::Index>(k));
    throw std::invalid_argument("PolyFit: power not present in fit");
  }
  double evaluate(double eps) const {
    double v = 0.0;
    for (std::size_t k = 0; k < powers.size(); ++k)
      v += coeffs(static_cast<Eigen::Index>(k)) * std::pow(eps, powers[k]);
    return v;
  }
};

/// Least squares of values(fields) in the requested monomial basis. The
/// monomials are scaled by max|field| before solving so the condition estimate
/// reflects the grid geometry rather than raw magnitudes.
inline PolyFit polyfit(const std::vector<double>& fields, const std::vector<double>& values,
                       const std::vector<int>& powers) {
  const std::size_t m = fields.size();
  if (values.size() != m) throw std::invalid_argument("polyfit: sample size mismatch");
  if (powers.empty()) throw std::invalid_argument("polyfit: empty power list");
  for (std::size_t k = 0; k < powers.size(); ++k) {
    if (powers[k] < 0) throw std::invalid_argument("polyfit: negative power");
    if (k > 0 && powers[k] <= powers[k - 1])
      throw std::invalid_argument("polyfit: powers must be strictly increasing");
  }
  if (m < powers.size()) throw std::invalid_argument("polyfit: underdetermined fit");
  {
    std::vector<double> sorted = fields;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("polyfit: duplicate field values");
  }

  double scale = 0.0;
  for (double f : fields) scale = std::max(scale, std::abs(f));
  if (scale == 0.0) scale = 1.0;

  const Eigen::Index rows = static_cast<Eigen::Index>(m);
  const Eigen::Index cols = static_cast<Eigen::Index>(powers.size());
  Matrix D(rows, cols);
  Vector y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    y(i) = values[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < cols; ++k)
      D(i, k) = std::pow(fields[static_cast<std::size_t>(i)] / scale,
                         powers[static_cast<std::size_t>(k)]);
  }

  Eigen::JacobiSVD<Matrix> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector scaled = svd.solve(y);

  PolyFit fit;
  fit.powers = powers;
  fit.coeffs = Vector(cols);
  for (Eigen::Index k = 0; k < cols; ++k)
    fit.coeffs(k) = scaled(k) / std::pow(scale, powers[static_cast<std::size_t>(k)]);
  fit.residual_rms = std::sqrt((D * scaled - y).squaredNorm() / static_cast<double>(m));
  fit.condition_estimate =
      svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  fit.is_interpolation = (m == powers.size());
  return fit;
}

/// mu_z = -e1: the energy slope at zero field is minus the dipole expectation,
/// so the linear fit coefficient carries the dipole with a sign flip.
inline double extract_dipole(const PolyFit& fit) {
  if (!fit.has_power(1))
    throw std::invalid_argument("extract_dipole: even-only fit has no linear term");
  return -fit.coeff_for_power(1);
}

/// Energy and dipole expectation of a solved (fully optimized) state at one field.
struct FieldSolution {
  double energy = 0.0;
  double mz = 0.0;
};
using StateProvider = std::function<FieldSolution(double)>;

/// |dE/deps (central difference) + <mu_z>_eps|. Vanishes, up to convergence
/// and step error, for states optimized in all parameters.
inline double hf_residual(const StateProvider& provider, double epsilon, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("hf_residual: fd_step must be positive");
  const double up = provider(epsilon + fd_step).energy;
  const double down = provider(epsilon - fd_step).energy;
  const double mz = provider(epsilon).mz;
  return std::abs((up - down) / (2.0 * fd_step) + mz);
}

struct ParityDiagnostic {
  double mz_at_zero = std::numeric_limits<double>::quiet_NaN();
  double parity_overlap = std::numeric_limits<double>::quiet_NaN();
};

/// <psi|i|psi> for a zero-field state: overlap of the state with its
/// shift-inverted image, using nothing but member/partner overlaps. Bounded by
/// [-1, 1]; equals 1 exactly when every member sits at the origin.
inline ParityDiagnostic parity_diagnostic(const BasisSet& basis, const InternalSpec& spec,
                                          const VariationalState& state,
                                          const OperatorMatrices& mats) {
  const int K = basis.size();
  if (state.coeff.size() != K)
    throw std::invalid_argument("parity_diagnostic: state/basis size mismatch");
  Matrix flipped(K, K);
  for (int i = 0; i < K; ++i) {
    const FloatingECG gi = basis.members[static_cast<std::size_t>(i)];
    for (int j = 0; j < K; ++j)
      flipped(i, j) =
          overlap(gi, parity_partner(basis.members[static_cast<std::size_t>(j)]));
  }
  ParityDiagnostic d;
  d.parity_overlap = state.coeff.dot(flipped * state.coeff) /
                     state.coeff.dot(mats.overlap * state.coeff);
  d.mz_at_zero =
      mats.has_dipole ? expectation(mats.dipole, state, mats.overlap) : 0.0;
  (void)spec;
  return d;
}

enum class Protocol { Symmetric, PositiveOnly };

inline const char* protocol_name(Protocol p) {
  return p == Protocol::Symmetric ? "symmetric" : "positive-only";
}

/// One-sided grids are tagged positive-only regardless of the actual sign;
/// a grid is symmetric when every nonzero field has its mirror in the list.
inline Protocol classify_protocol(const std::vector<double>& fields) {
  for (double f : fields) {
    if (f == 0.0) continue;
    if (std::find(fields.begin(), fields.end(), -f) == fields.end())
      return Protocol::PositiveOnly;
  }
  return Protocol::Symmetric;
}

struct SweepOptions {
  bool reoptimize_per_field = true;
  OptimizeOptions opt;
  std::vector<int> fit_powers = {0, 1, 2};
  double hf_fd_step = 1e-4;
  bool compute_hf_residuals = true;
};

struct SweepReport {
  std::vector<double> fields;  // sorted ascending
  std::vector<double> energies;
  std::vector<double> mz_expectations;
  std::vector<double> hf_residuals;
  PolyFit fit;
  double e1 = std::numeric_limits<double>::quiet_NaN();
  double extracted_dipole = std::numeric_limits<double>::quiet_NaN();
  ParityDiagnostic parity;
  Protocol protocol = Protocol::Symmetric;
  bool reoptimized = false;
  bool all_converged = true;
  BasisSet zero_field_basis;
};

namespace detail {

struct FieldPoint {
  double energy = 0.0;
  double mz = 0.0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  BasisSet basis;
  VariationalState state;
  OperatorMatrices mats;
  bool converged = true;
};

inline FieldPoint solve_fixed(const BasisSet& basis, const InternalSpec& spec,
                              const OperatorMatrices& mats, double eps, double lin_dep_tol) {
  FieldPoint pt;
  pt.basis = basis;
  pt.mats = mats;
  pt.state = solve_lowest(mats.hamiltonian(eps), mats.overlap, lin_dep_tol);
  pt.energy = pt.state.energy;
  pt.mz = mats.has_dipole ? expectation(mats.dipole, pt.state, mats.overlap) : 0.0;
  (void)spec;
  return pt;
}

}  // namespace detail

/// Energies, dipole expectations and Hellmann-Feynman residuals over a field
/// grid, plus the polynomial fit and parity diagnostics at zero field.
///
/// With reoptimize_per_field the walk visits fields by increasing |eps|, each
/// optimization warm-starting from the previous field's basis so the search
/// cannot hop between distant minima mid-sweep. For a parity-closed basis in
/// parity-constrained mode, a field whose mirror -eps was already optimized is
/// solved on the shift-inverted copy of that result: the mirrored basis is
/// exactly stationary at the mirrored field, and all its matrix elements are
/// bitwise images, so E(eps) == E(-eps) holds to the last bit.
inline SweepReport sweep(const BasisSet& basis0, const InternalSpec& spec,
                         std::vector<double> fields, const SweepOptions& opts) {
  if (fields.size() < 2) throw std::invalid_argument("sweep: need at least two fields");
  {
    std::vector<double> sorted = fields;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("sweep: duplicate field values");
  }
  for (double f : fields)
    if (!std::isfinite(f)) throw std::invalid_argument("sweep: non-finite field");

  std::vector<std::size_t> order(fields.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(fields[a]), fb = std::abs(fields[b]);
    if (fa != fb) return fa < fb;
    return fields[a] < fields[b];
  });

  std::map<double, detail::FieldPoint> points;
  const bool mirror_exact = basis0.parity_closed && opts.opt.parity_constrained &&
                            opts.reoptimize_per_field;

  if (opts.reoptimize_per_field) {
    BasisSet current = basis0;
    for (std::size_t k : order) {
      const double eps = fields[k];
      detail::FieldPoint pt;
      auto mirror_src = points.find(-eps);
      if (mirror_exact && eps != 0.0 && mirror_src != points.end()) {
        pt.basis = mirror(mirror_src->second.basis);
        pt.mats = assemble_matrices(pt.basis, spec);
        pt.state = solve_lowest(pt.mats.hamiltonian(eps), pt.mats.overlap, opts.opt.lin_dep_tol);
        pt.state.stationarity_norm = mirror_src->second.state.stationarity_norm;
        pt.energy = pt.state.energy;
        pt.mz = pt.mats.has_dipole ? expectation(pt.mats.dipole, pt.state, pt.mats.overlap) : 0.0;
        pt.residual = mirror_src->second.residual;
        pt.converged = mirror_src->second.converged;
      } else {
        OptimizeResult r = optimize_nonlinear(current, spec, eps, opts.opt);
        pt.basis = r.basis;
        pt.mats = assemble_matrices(r.basis, spec);
        pt.state = r.state;
        pt.energy = r.state.energy;
        pt.mz = r.mz_expectation;
        pt.converged = r.converged;
        current = r.basis;
        if (opts.compute_hf_residuals) {
          auto provider = [&](double e) -> FieldSolution {
            if (e == eps) return {pt.energy, pt.mz};
            OptimizeResult s = optimize_nonlinear(pt.basis, spec, e, opts.opt);
            return {s.state.energy, s.mz_expectation};
          };
          pt.residual = hf_residual(provider, eps, opts.hf_fd_step);
        }
      }
      points.emplace(eps, std::move(pt));
    }
  } else {
    const OperatorMatrices mats = assemble_matrices(basis0, spec);
    for (std::size_t k : order) {
      const double eps = fields[k];
      detail::FieldPoint pt = detail::solve_fixed(basis0, spec, mats, eps, opts.opt.lin_dep_tol);
      if (opts.compute_hf_residuals) {
        auto provider = [&](double e) -> FieldSolution {
          detail::FieldPoint q = detail::solve_fixed(basis0, spec, mats, e, opts.opt.lin_dep_tol);
          return {q.energy, q.mz};
        };
        pt.residual = hf_residual(provider, eps, opts.hf_fd_step);
      }
      points.emplace(eps, std::move(pt));
    }
  }

  SweepReport rep;
  rep.reoptimized = opts.reoptimize_per_field;
  rep.protocol = classify_protocol(fields);
  for (const auto& [eps, pt] : points) {  // std::map: ascending field order
    rep.fields.push_back(eps);
    rep.energies.push_back(pt.energy);
    rep.mz_expectations.push_back(pt.mz);
    rep.hf_residuals.push_back(pt.residual);
    rep.all_converged = rep.all_converged && pt.converged;
  }

  rep.fit = polyfit(rep.fields, rep.energies, opts.fit_powers);
  if (rep.fit.has_power(1)) {
    rep.e1 = rep.fit.coeff_for_power(1);
    rep.extracted_dipole = -rep.e1;
  }

  auto zero = points.find(0.0);
  if (zero != points.end()) {
    rep.parity = parity_diagnostic(zero->second.basis, spec, zero->second.state,
                                   zero->second.mats);
    rep.zero_field_basis = zero->second.basis;
  } else if (opts.reoptimize_per_field) {
    OptimizeResult r0 = optimize_nonlinear(basis0, spec, 0.0, opts.opt);
    const OperatorMatrices m0 = assemble_matrices(r0.basis, spec);
    rep.parity = parity_diagnostic(r0.basis, spec, r0.state, m0);
    rep.zero_field_basis = r0.basis;
  } else {
    const OperatorMatrices m0 = assemble_matrices(basis0, spec);
    detail::FieldPoint p0 = detail::solve_fixed(basis0, spec, m0, 0.0, opts.opt.lin_dep_tol);
    rep.parity = parity_diagnostic(basis0, spec, p0.state, m0);
    rep.zero_field_basis = basis0;
  }
  return rep;
}

/// Faithful re-enactment of the three-point one-sided finite-field procedure:
/// fields {0, -0.0016, -0.0032}, full quadratic fit, re-optimization at every
/// field, dipole extraction and zero-field parity diagnostics.
inline SweepReport ca_protocol(const BasisSet& basis, const InternalSpec& spec,
                               const OptimizeOptions& opt) {
  SweepOptions so;
  so.reoptimize_per_field = true;
  so.opt = opt;
  so.fit_powers = {0, 1, 2};
  return sweep(basis, spec, {0.0, -0.0016, -0.0032}, so);
}

}  // namespace ecglab
