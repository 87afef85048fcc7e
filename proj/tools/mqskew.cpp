#include "mqskew/config.hpp"
#include "mqskew/errors.hpp"
#include "mqskew/qinfo.hpp"
#include "mqskew/sweep.hpp"
#include "mqskew/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kConsistencyError = 2, kCapExceeded = 3 };

int run_command(const std::string& config_path, const std::optional<std::string>& format, unsigned threads,
                bool no_timestamp, const std::string& output_path) {
  mqskew::RunConfig config = mqskew::load_config(config_path);
  if (format) config.format = *format == "json" ? mqskew::OutputFormat::json : mqskew::OutputFormat::csv;

  const mqskew::SweepResult result = mqskew::run_sweep(config, {.threads = threads});
  const mqskew::WriteOptions write{.timestamp = !no_timestamp};

  std::ofstream file;
  if (!output_path.empty()) {
    file.open(output_path);
    if (!file) throw mqskew::ConfigError("cannot open output file " + output_path);
  }
  std::ostream& out = output_path.empty() ? std::cout : file;
  if (config.format == mqskew::OutputFormat::json) mqskew::write_json(out, config, result, write);
  else mqskew::write_csv(out, config, result, write);
  mqskew::write_summary(std::cerr, config, result);
  return kOk;
}

int verify_command(std::uint64_t seed, int max_n) {
  const auto checks = mqskew::run_verification({.seed = seed, .max_n = max_n});
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  std::cout << (ok ? "all checks passed" : "verification FAILED") << "\n";
  return ok ? kOk : kConsistencyError;
}

int depth_command(int n, double value) {
  std::cout << "N=" << n << " value=" << value << "\n";
  std::cout << std::setw(6) << "k" << std::setw(16) << "bound" << "  exceeded\n";
  for (int k = 1; k <= n; ++k) {
    const double bound = mqskew::producibility_bound(k, n);
    std::cout << std::setw(6) << k << std::setw(16) << bound << "  " << (value > bound ? "yes" : "no") << "\n";
  }
  std::cout << "entanglement depth: " << mqskew::entanglement_depth(value, n) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-quantum NMR coherences, skew information and entanglement depth"};
  app.require_subcommand(1);

  std::optional<std::string> format;
  unsigned threads = 0;
  bool no_timestamp = false;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--no-header-timestamp", no_timestamp, "Omit the generation timestamp from the output header");

  auto* run = app.add_subcommand("run", "Run a (beta, tau) sweep from a YAML config");
  std::string config_path;
  std::string output_path;
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output", output_path, "Write results to a file instead of stdout");
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_flag("--no-header-timestamp", no_timestamp, "Omit the generation timestamp from the output header");

  auto* verify = app.add_subcommand("verify", "Run the built-in invariant suite");
  std::uint64_t seed = 20201015;
  int max_n = 6;
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--max-n", max_n, "Largest spin count for dense checks")->check(CLI::Range(2, 10));

  auto* depth = app.add_subcommand("depth", "Scan the k-producibility bound for an information value");
  int n = 0;
  double value = 0.0;
  depth->add_option("--n", n, "Number of spins")->required()->check(CLI::PositiveNumber);
  depth->add_option("--value", value, "Information value")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, format, threads, no_timestamp, output_path);
    if (*verify) return verify_command(seed, max_n);
    if (*depth) return depth_command(n, value);
  } catch (const mqskew::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mqskew::SizeError& e) {
    std::cerr << "resource cap exceeded: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConsistencyError;
  }
  return kOk;
}
