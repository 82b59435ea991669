// Batch experiment runner: validates a JSON experiment config, executes the
// field sweep, and writes report.json / sweep.csv artifacts.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ecglab/presets.hpp"
#include "ecglab/runner.hpp"
#include "ecglab/version.hpp"

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ecglab::ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ecglab::ExperimentConfig load_config(const std::string& arg) {
  if (std::filesystem::exists(arg)) return ecglab::parse_config_text(read_file(arg));
  const auto& presets = ecglab::experiment_presets();
  auto it = presets.find(arg);
  if (it != presets.end()) return ecglab::parse_config(it->second.config);
  throw ecglab::ConfigError("'" + arg + "' is neither a config file nor a preset name");
}

int run_command(const std::string& config_arg, const std::optional<std::string>& out_dir) {
  const ecglab::ExperimentConfig cfg = load_config(config_arg);
  const ecglab::RunResult result = ecglab::run_experiment(cfg, out_dir);

  const auto& rep = result.sweep_report;
  std::printf("fields: %zu  protocol: %s  reoptimized: %s\n", rep.fields.size(),
              ecglab::protocol_name(rep.protocol), rep.reoptimized ? "yes" : "no");
  for (std::size_t i = 0; i < rep.fields.size(); ++i)
    std::printf("  eps = %+.6e   E = %.12f   <mu_z> = %+.6e\n", rep.fields[i],
                rep.energies[i], rep.mz_expectations[i]);
  if (rep.fit.has_power(1))
    std::printf("e1 = %+.9e   extracted dipole = %+.9e\n", rep.e1, rep.extracted_dipole);
  if (rep.fit.has_power(2))
    std::printf("e2 = %+.9e   -2*e2 = %+.9e\n", rep.fit.coeff_for_power(2),
                -2.0 * rep.fit.coeff_for_power(2));
  std::printf("parity overlap = %+.9f   <mu_z>_0 = %+.6e\n", rep.parity.parity_overlap,
              rep.parity.mz_at_zero);
  std::printf("verdict: %s\n",
              result.report["sweep"]["verdict"].get<std::string>().c_str());
  std::printf("artifacts: %s\n", result.out_dir.string().c_str());
  return 0;
}

int compare_command(const std::string& path_a, const std::string& path_b) {
  const ecglab::json a = ecglab::json::parse(read_file(path_a));
  const ecglab::json b = ecglab::json::parse(read_file(path_b));
  std::cout << ecglab::compare_reports(a, b);
  return 0;
}

int presets_command(const std::string& dump_name) {
  if (!dump_name.empty()) {
    std::cout << ecglab::preset(dump_name).config.dump(2) << "\n";
    return 0;
  }
  for (const std::string& name : ecglab::preset_names())
    std::printf("%-26s %s\n", name.c_str(), ecglab::preset(name).description.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-body Coulomb solver and finite-field response laboratory"};
  app.set_version_flag("--version", std::string(ecglab::version_string));
  app.require_subcommand(1);

  std::string config_arg, out_dir, report_a, report_b, dump_name;

  CLI::App* run = app.add_subcommand("run", "run an experiment config (file or preset name)");
  run->add_option("config", config_arg, "config JSON file or preset name")->required();
  CLI::Option* out_opt = run->add_option("--out", out_dir, "override the output directory");

  CLI::App* cmp = app.add_subcommand("compare", "compare two report.json files");
  cmp->add_option("a", report_a, "first report")->required();
  cmp->add_option("b", report_b, "second report")->required();

  CLI::App* pre = app.add_subcommand("presets", "list shipped experiment configs");
  pre->add_option("--dump", dump_name, "print one preset config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (run->parsed())
      return run_command(config_arg,
                         *out_opt ? std::optional<std::string>(out_dir) : std::nullopt);
    if (cmp->parsed()) return compare_command(report_a, report_b);
    if (pre->parsed()) return presets_command(dump_name);
  } catch (const ecglab::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ecglab::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
