#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecglab/basis.hpp"
#include "ecglab/serialization.hpp"
#include "ecglab/system.hpp"

namespace ecglab {

struct BasisConfig {
  int K = 8;
  Placement placement = Placement::Origin;
  double separation = 3.0;
  double scale = 1.0;
  std::uint64_t seed = 1;
  bool parity_close = false;
};

struct OptimizationConfig {
  double stat_tol = 1e-7;
  int max_iters = 400;
  bool parity_constrained = false;
  bool reoptimize_per_field = true;
  double initial_step = 0.25;
};

struct SweepConfig {
  std::vector<double> fields;  // either explicit fields or a named preset
  std::string preset;
  double fd_step = 1e-4;
};

struct FitConfig {
  std::vector<int> powers = {0, 1, 2};
};

struct OutputConfig {
  std::string directory = "out";
  bool write_json = true;
  bool write_csv = true;
};

/// Field grids selectable by name inside "sweep".
inline std::optional<std::vector<double>> sweep_preset_fields(const std::string& name) {
  if (name == "ca-protocol") return std::vector<double>{0.0, -0.0016, -0.0032};
  if (name == "symmetric-5pt")
    return std::vector<double>{-0.002, -0.001, 0.0, 0.001, 0.002};
  if (name == "stark")
    return std::vector<double>{-0.002, -0.001, -0.0005, 0.0, 0.0005, 0.001, 0.002};
  return std::nullopt;
}

struct ExperimentConfig {
  int version = 1;
  std::vector<Particle> particles;
  std::string transformation = "heavy-nucleus-centered";
  BasisConfig basis;
  OptimizationConfig optimization;
  SweepConfig sweep;
  FitConfig fit;
  OutputConfig output;
  json raw;  // the validated config as parsed, for embedding and hashing

  std::vector<double> resolved_fields() const {
    if (!sweep.fields.empty()) return sweep.fields;
    auto f = sweep_preset_fields(sweep.preset);
    if (!f) throw ConfigError("sweep.preset: unknown preset '" + sweep.preset + "'");
    return *f;
  }

  std::string config_hash() const { return fnv1a_hex(raw.dump()); }
};

namespace detail {

inline void collect_unknown(const json& obj, const std::string& path,
                            const std::set<std::string>& allowed,
                            std::vector<std::string>& unknown) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      unknown.push_back(path.empty() ? it.key() : path + "." + it.key());
}

inline double parse_mass(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto m = mass_preset(j.get<std::string>());
    if (m) return *m;
    throw ConfigError(path + ": unknown mass preset '" + j.get<std::string>() + "'");
  }
  throw ConfigError(path + ": mass must be a number or a preset name");
}

}  // namespace detail

/// Strict parser: every unknown key is an error (all offenders listed), every
/// value is range-checked, and errors name the offending field.
inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  std::vector<std::string> unknown;
  detail::collect_unknown(j, "",
                          {"version", "system", "basis", "optimization", "sweep", "fit",
                           "output"},
                          unknown);

  ExperimentConfig cfg;
  cfg.raw = j;

  if (!j.contains("version")) throw ConfigError("config: missing 'version'");
  cfg.version = j.at("version").get<int>();
  if (cfg.version != 1) throw ConfigError("config: unsupported version (expected 1)");

  if (!j.contains("system") || !j.at("system").is_object())
    throw ConfigError("config: missing 'system' object");
  const json& sys = j.at("system");
  detail::collect_unknown(sys, "system", {"particles", "transformation"}, unknown);
  if (!sys.contains("particles") || !sys.at("particles").is_array() ||
      sys.at("particles").size() < 2)
    throw ConfigError("system.particles: need an array of at least two particles");
  int idx = 0;
  for (const json& jp : sys.at("particles")) {
    const std::string path = "system.particles[" + std::to_string(idx) + "]";
    if (!jp.is_object()) throw ConfigError(path + ": must be an object");
    detail::collect_unknown(jp, path, {"mass", "charge", "label"}, unknown);
    Particle p;
    if (!jp.contains("mass")) throw ConfigError(path + ".mass: missing");
    p.mass = detail::parse_mass(jp.at("mass"), path + ".mass");
    if (!(p.mass > 0.0)) throw ConfigError(path + ".mass: must be positive");
    if (!jp.contains("charge")) throw ConfigError(path + ".charge: missing");
    p.charge = jp.at("charge").get<double>();
    p.label = jp.value("label", "p" + std::to_string(idx));
    cfg.particles.push_back(std::move(p));
    ++idx;
  }
  cfg.transformation = sys.value("transformation", "heavy-nucleus-centered");
  if (cfg.transformation == "nucleus-mass-center")
    throw ConfigError("system.transformation: 'nucleus-mass-center' is unsupported");
  if (cfg.transformation != "heavy-nucleus-centered")
    throw ConfigError("system.transformation: unknown value '" + cfg.transformation + "'");

  if (!j.contains("basis") || !j.at("basis").is_object())
    throw ConfigError("config: missing 'basis' object");
  const json& jb = j.at("basis");
  detail::collect_unknown(jb, "basis", {"K", "placement", "seed", "parity_close"}, unknown);
  if (!jb.contains("K")) throw ConfigError("basis.K: missing");
  cfg.basis.K = jb.at("K").get<int>();
  if (cfg.basis.K < 1) throw ConfigError("basis.K: must be at least 1");
  if (jb.contains("placement")) {
    const json& jp = jb.at("placement");
    if (!jp.is_object()) throw ConfigError("basis.placement: must be an object");
    detail::collect_unknown(jp, "basis.placement", {"kind", "d", "scale"}, unknown);
    const std::string kind = jp.value("kind", "origin");
    if (kind == "origin")
      cfg.basis.placement = Placement::Origin;
    else if (kind == "two-center")
      cfg.basis.placement = Placement::TwoCenter;
    else if (kind == "random")
      cfg.basis.placement = Placement::Random;
    else
      throw ConfigError("basis.placement.kind: unknown value '" + kind + "'");
    cfg.basis.separation = jp.value("d", 3.0);
    cfg.basis.scale = jp.value("scale", 1.0);
  }
  cfg.basis.seed = jb.value("seed", std::uint64_t{1});
  cfg.basis.parity_close = jb.value("parity_close", false);

  if (j.contains("optimization")) {
    const json& jo = j.at("optimization");
    if (!jo.is_object()) throw ConfigError("optimization: must be an object");
    detail::collect_unknown(
        jo, "optimization",
        {"stat_tol", "max_iters", "parity_constrained", "reoptimize_per_field", "initial_step"},
        unknown);
    cfg.optimization.stat_tol = jo.value("stat_tol", 1e-7);
    if (!(cfg.optimization.stat_tol > 0.0))
      throw ConfigError("optimization.stat_tol: must be positive");
    cfg.optimization.max_iters = jo.value("max_iters", 400);
    if (cfg.optimization.max_iters < 0)
      throw ConfigError("optimization.max_iters: must be non-negative");
    cfg.optimization.parity_constrained = jo.value("parity_constrained", false);
    cfg.optimization.reoptimize_per_field = jo.value("reoptimize_per_field", true);
    cfg.optimization.initial_step = jo.value("initial_step", 0.25);
    if (!(cfg.optimization.initial_step > 0.0))
      throw ConfigError("optimization.initial_step: must be positive");
  }

  if (!j.contains("sweep") || !j.at("sweep").is_object())
    throw ConfigError("config: missing 'sweep' object");
  const json& js = j.at("sweep");
  detail::collect_unknown(js, "sweep", {"fields", "preset", "fd_step"}, unknown);
  const bool has_fields = js.contains("fields");
  const bool has_preset = js.contains("preset");
  if (has_fields == has_preset)
    throw ConfigError("sweep: exactly one of 'fields' or 'preset' is required");
  if (has_fields) {
    cfg.sweep.fields = js.at("fields").get<std::vector<double>>();
    for (double f : cfg.sweep.fields)
      if (!std::isfinite(f)) throw ConfigError("sweep.fields: values must be finite");
  } else {
    cfg.sweep.preset = js.at("preset").get<std::string>();
    if (!sweep_preset_fields(cfg.sweep.preset))
      throw ConfigError("sweep.preset: unknown preset '" + cfg.sweep.preset + "'");
  }
  cfg.sweep.fd_step = js.value("fd_step", 1e-4);
  if (!(cfg.sweep.fd_step > 0.0)) throw ConfigError("sweep.fd_step: must be positive");

  if (j.contains("fit")) {
    const json& jf = j.at("fit");
    if (!jf.is_object()) throw ConfigError("fit: must be an object");
    detail::collect_unknown(jf, "fit", {"powers"}, unknown);
    if (jf.contains("powers")) {
      cfg.fit.powers = jf.at("powers").get<std::vector<int>>();
      if (cfg.fit.powers.empty()) throw ConfigError("fit.powers: must not be empty");
      for (std::size_t k = 0; k < cfg.fit.powers.size(); ++k) {
        if (cfg.fit.powers[k] < 0) throw ConfigError("fit.powers: negative power");
        if (k > 0 && cfg.fit.powers[k] <= cfg.fit.powers[k - 1])
          throw ConfigError("fit.powers: must be strictly increasing");
      }
    }
  }

  if (j.contains("output")) {
    const json& jo = j.at("output");
    if (!jo.is_object()) throw ConfigError("output: must be an object");
    detail::collect_unknown(jo, "output", {"directory", "formats"}, unknown);
    cfg.output.directory = jo.value("directory", "out");
    if (jo.contains("formats")) {
      cfg.output.write_json = false;
      cfg.output.write_csv = false;
      for (const json& f : jo.at("formats")) {
        const std::string s = f.get<std::string>();
        if (s == "json")
          cfg.output.write_json = true;
        else if (s == "csv")
          cfg.output.write_csv = true;
        else
          throw ConfigError("output.formats: unknown format '" + s + "'");
      }
    }
  }

  if (!unknown.empty()) {
    std::string msg = "config: unknown key(s): ";
    for (std::size_t i = 0; i < unknown.size(); ++i) {
      if (i) msg += ", ";
      msg += unknown[i];
    }
    throw ConfigError(msg);
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace ecglab
