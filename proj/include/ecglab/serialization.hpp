#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "ecglab/field_lab.hpp"

namespace ecglab {

using nlohmann::json;

/// Members as {L: row-major lower triangle, s: flat [x,y,z] per coordinate}.
/// Doubles survive the round trip bit-exactly: the serializer emits the
/// shortest decimal that parses back to the same value.
inline json basis_to_json(const BasisSet& basis) {
  json members = json::array();
  for (const FloatingECG& g : basis.members) {
    json L = json::array();
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j <= i; ++j) L.push_back(g.L(i, j));
    json s = json::array();
    for (int i = 0; i < g.n(); ++i)
      for (int c = 0; c < 3; ++c) s.push_back(g.s(i, c));
    members.push_back(json{{"L", L}, {"s", s}});
  }
  json out{{"n", basis.n()}, {"members", members}, {"parity_closed", basis.parity_closed}};
  if (!basis.pairing.empty()) out["pairing"] = basis.pairing;
  return out;
}

inline BasisSet basis_from_json(const json& j) {
  BasisSet basis;
  const int n = j.at("n").get<int>();
  if (n < 1) throw ConfigError("basis json: n must be positive");
  for (const json& jm : j.at("members")) {
    FloatingECG g;
    g.L = Matrix::Zero(n, n);
    const auto& L = jm.at("L");
    if (static_cast<int>(L.size()) != n * (n + 1) / 2)
      throw ConfigError("basis json: wrong lower-triangle length");
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj <= i; ++jj) g.L(i, jj) = L[k++].get<double>();
    const auto& s = jm.at("s");
    if (static_cast<int>(s.size()) != 3 * n)
      throw ConfigError("basis json: wrong shift length");
    g.s = ShiftMatrix::Zero(n, 3);
    k = 0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) g.s(i, c) = s[k++].get<double>();
    basis.members.push_back(std::move(g));
  }
  basis.parity_closed = j.value("parity_closed", false);
  if (j.contains("pairing")) basis.pairing = j.at("pairing").get<std::vector<int>>();
  return basis;
}

inline json polyfit_to_json(const PolyFit& fit) {
  json coeffs = json::array();
  for (Eigen::Index k = 0; k < fit.coeffs.size(); ++k) coeffs.push_back(fit.coeffs(k));
  return json{{"powers", fit.powers},
              {"coeffs", coeffs},
              {"residual_rms", fit.residual_rms},
              {"condition_estimate", fit.condition_estimate},
              {"is_interpolation", fit.is_interpolation}};
}

inline json number_or_null(double x) { return std::isnan(x) ? json() : json(x); }

inline json sweep_report_to_json(const SweepReport& rep) {
  json j;
  j["protocol"] = protocol_name(rep.protocol);
  j["reoptimized"] = rep.reoptimized;
  j["all_converged"] = rep.all_converged;
  j["fields"] = rep.fields;
  j["energies"] = rep.energies;
  j["mz_expectations"] = rep.mz_expectations;
  j["hf_residuals"] = rep.hf_residuals;
  j["fit"] = polyfit_to_json(rep.fit);
  j["e1"] = number_or_null(rep.e1);  // null when the fit is even-only
  j["extracted_dipole"] = number_or_null(rep.extracted_dipole);
  j["parity"] = json{{"mz_at_zero", rep.parity.mz_at_zero},
                     {"parity_overlap", rep.parity.parity_overlap}};
  return j;
}

/// Flat CSV for external plotting; header row mandatory, full-precision floats.
inline std::string sweep_report_csv(const SweepReport& rep) {
  std::string out = "epsilon,energy,mz_expectation,hf_residual\n";
  char buf[128];
  for (std::size_t i = 0; i < rep.fields.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", rep.fields[i],
                  rep.energies[i], rep.mz_expectations[i], rep.hf_residuals[i]);
    out += buf;
  }
  return out;
}

/// FNV-1a over a canonical JSON dump; cheap provenance fingerprint.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ecglab
