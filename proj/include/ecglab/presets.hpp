#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecglab/config.hpp"

namespace ecglab {

struct PresetEntry {
  std::string description;
  json config;
};

/// Shipped, fully specified experiment configs. All of them target systems
/// whose exact ground-state dipole is zero by symmetry; they differ in basis
/// symmetry and fit protocol.
inline const std::map<std::string, PresetEntry>& experiment_presets() {
  static const std::map<std::string, PresetEntry> presets = [] {
    std::map<std::string, PresetEntry> m;

    m["hydrogen-ca"] = PresetEntry{
        "one-sided 3-point quadratic fit on a parity-closed hydrogen basis (null dipole)",
        json{{"version", 1},
             {"system",
              {{"particles",
                {{{"mass", "proton"}, {"charge", 1.0}, {"label", "p"}},
                 {{"mass", "electron"}, {"charge", -1.0}, {"label", "e"}}}}}},
             {"basis",
              {{"K", 8},
               {"placement", {{"kind", "two-center"}, {"d", 1.0}}},
               {"seed", 1},
               {"parity_close", true}}},
             {"optimization",
              {{"stat_tol", 1e-7},
               {"max_iters", 4000},
               {"parity_constrained", true},
               {"reoptimize_per_field", true}}},
             {"sweep", {{"preset", "ca-protocol"}}},
             {"fit", {{"powers", {0, 1, 2}}}},
             {"output", {{"directory", "out/hydrogen-ca"}}}}};

    m["hydrogen-symmetric"] = PresetEntry{
        "symmetric 5-point sweep on a parity-closed hydrogen basis (null dipole)",
        json{{"version", 1},
             {"system",
              {{"particles",
                {{{"mass", "proton"}, {"charge", 1.0}, {"label", "p"}},
                 {{"mass", "electron"}, {"charge", -1.0}, {"label", "e"}}}}}},
             {"basis",
              {{"K", 8},
               {"placement", {{"kind", "two-center"}, {"d", 1.0}}},
               {"seed", 1},
               {"parity_close", true}}},
             {"optimization",
              {{"stat_tol", 1e-7},
               {"max_iters", 4000},
               {"parity_constrained", true},
               {"reoptimize_per_field", true}}},
             {"sweep", {{"preset", "symmetric-5pt"}}},
             {"fit", {{"powers", {0, 1, 2}}}},
             {"output", {{"directory", "out/hydrogen-symmetric"}}}}};

    m["stark"] = PresetEntry{
        "fixed-nucleus hydrogen in a symmetric field grid; -2*e2 of the even fit "
        "is the static dipole polarizability (exact value 4.5)",
        json{{"version", 1},
             {"system",
              {{"particles",
                {{{"mass", "fixed-nucleus"}, {"charge", 1.0}, {"label", "n"}},
                 {{"mass", "electron"}, {"charge", -1.0}, {"label", "e"}}}}}},
             {"basis",
              {{"K", 12},
               {"placement", {{"kind", "two-center"}, {"d", 1.0}}},
               {"seed", 1},
               {"parity_close", true}}},
             {"optimization",
              {{"stat_tol", 1e-7},
               {"max_iters", 6000},
               {"parity_constrained", true},
               {"reoptimize_per_field", true}}},
             {"sweep", {{"preset", "stark"}}},
             {"fit", {{"powers", {0, 2}}}},
             {"output", {{"directory", "out/stark"}}}}};

    m["pathology-positive-only"] = PresetEntry{
        "one-sided fit with full powers on a deliberately symmetry-broken basis: "
        "manufactures a large linear term although the true dipole is exactly zero",
        json{{"version", 1},
             {"system",
              {{"particles",
                {{{"mass", 10.0}, {"charge", 1.0}, {"label", "A"}},
                 {{"mass", 1.0}, {"charge", -1.0}, {"label", "b"}}}}}},
             {"basis",
              {{"K", 8},
               {"placement", {{"kind", "two-center"}, {"d", 1.5}}},
               {"seed", 7},
               {"parity_close", false}}},
             {"optimization",
              {{"stat_tol", 1e-5},
               {"max_iters", 40},
               {"parity_constrained", false},
               {"reoptimize_per_field", true}}},
             {"sweep", {{"preset", "ca-protocol"}}},
             {"fit", {{"powers", {0, 1, 2}}}},
             {"output", {{"directory", "out/pathology-positive-only"}}}}};

    m["pathology-symmetric"] = PresetEntry{
        "reference run for the pathology pair: same system, parity-closed basis, "
        "symmetric grid (linear term vanishes)",
        json{{"version", 1},
             {"system",
              {{"particles",
                {{{"mass", 10.0}, {"charge", 1.0}, {"label", "A"}},
                 {{"mass", 1.0}, {"charge", -1.0}, {"label", "b"}}}}}},
             {"basis",
              {{"K", 8},
               {"placement", {{"kind", "two-center"}, {"d", 1.5}}},
               {"seed", 7},
               {"parity_close", true}}},
             {"optimization",
              {{"stat_tol", 1e-5},
               {"max_iters", 40},
               {"parity_constrained", true},
               {"reoptimize_per_field", true}}},
             {"sweep", {{"preset", "symmetric-5pt"}}},
             {"fit", {{"powers", {0, 1, 2}}}},
             {"output", {{"directory", "out/pathology-symmetric"}}}}};

    return m;
  }();
  return presets;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : experiment_presets()) names.push_back(name);
  return names;
}

inline const PresetEntry& preset(const std::string& name) {
  const auto& m = experiment_presets();
  auto it = m.find(name);
  if (it == m.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

}  // namespace ecglab
