#include <doctest.h>

#include "mqskew/config.hpp"
#include "mqskew/errors.hpp"
#include "mqskew/sweep.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mqskew;

namespace {

const std::filesystem::path kSource = MQSKEW_SOURCE_DIR;

std::string csv_of(const RunConfig& cfg, unsigned threads) {
  const auto result = run_sweep(cfg, {.threads = threads});
  std::ostringstream out;
  write_csv(out, cfg, result, {.timestamp = false});
  return out.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int cli_status(const std::string& args) {
  const std::string cmd = std::string(MQSKEW_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("minimal nanopore config") {
  const auto cfg = load_config(kSource / "configs/minimal_nanopore.yaml");
  CHECK(cfg.n_spins() == 201);
  CHECK(std::holds_alternative<NanoporeModel>(cfg.model));
  CHECK(std::get<NanoporeModel>(cfg.model).coupling == 1.0);
  REQUIRE(cfg.beta_grid.size() == 10);
  CHECK(cfg.beta_grid.front() == 0.5);
  CHECK(cfg.beta_grid.back() == doctest::Approx(5.0));
  REQUIRE(cfg.tau_grid.size() == 1);
  CHECK(cfg.tau_grid[0] == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(cfg.resolved_engine() == EngineKind::nanopore);
  CHECK(cfg.tau_mode == TauMode::fixed);
  CHECK(cfg.dense_cap == 14);
  CHECK(cfg.nanopore_cap == 300);
}

TEST_CASE("zigzag sample config routes to the dense engine") {
  const auto cfg = load_config(kSource / "configs/zigzag_6.yaml");
  CHECK(cfg.n_spins() == 6);
  REQUIRE(std::holds_alternative<DenseModelSpec>(cfg.model));
  const auto& spec = std::get<DenseModelSpec>(cfg.model);
  REQUIRE(spec.geometry.has_value());
  CHECK(spec.geometry->positions.size() == 6);
  CHECK(cfg.resolved_engine() == EngineKind::dense);
  CHECK(cfg.tau_mode == TauMode::max_over_grid);
  // couplings round-trip through the geometry builder
  const auto rebuilt = dipolar_couplings_from_geometry(*spec.geometry);
  CHECK((rebuilt.couplings() - spec.system.couplings()).norm() == 0.0);
}

TEST_CASE("all sample configs load") {
  for (const auto& entry : std::filesystem::directory_iterator(kSource / "configs")) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}

TEST_CASE("config rejects both model variants") {
  const auto msg = config_error(R"(model:
  nanopore: {n_spins: 4, coupling: 1}
  dense: {couplings: [[0, 1], [1, 0]]}
beta: [1]
tau: [1]
)");
  CHECK(msg.find("exactly one") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("config reports every violation with line numbers") {
  const auto msg = config_error(R"(model:
  nanopore: {n_spins: 0, coupling: 1}
beta: [1, .nan]
tau: {start: 0, stop: 1, count: 0}
tau_mode: sideways
colour: blue
)");
  CHECK(msg.find("model.nanopore.n_spins") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("tau.count") != std::string::npos);
  CHECK(msg.find("tau_mode") != std::string::npos);
  CHECK(msg.find("line 6") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);
}

TEST_CASE("config parse errors carry a position") {
  const auto msg = config_error("model:\n  nanopore: [1, 2\nbeta: [1]\n");
  CHECK(msg.find("parse error at line") != std::string::npos);
  CHECK_THROWS_AS(load_config(kSource / "configs/does_not_exist.yaml"), ConfigError);
}

TEST_CASE("config grids and options") {
  const auto cfg = parse_config(R"(model:
  dense:
    couplings: [[0, 1, 2], [1, 0, 3], [2, 3, 0]]
beta: {start: 0, stop: 1, count: 5}
tau: [0.5, 1.5]
outputs: [informations]
format: json
engine: dense
seed: 42
limits: {dense_cap: 8, cross_check_cap: 3}
)");
  CHECK(cfg.beta_grid == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(cfg.tau_grid == std::vector<double>{0.5, 1.5});
  CHECK(cfg.wants(OutputGroup::informations));
  CHECK_FALSE(cfg.wants(OutputGroup::spectrum));
  CHECK(cfg.format == OutputFormat::json);
  CHECK(cfg.seed == 42);
  CHECK(cfg.dense_cap == 8);
  CHECK(cfg.cross_check_cap == 3);
  CHECK(std::get<DenseModelSpec>(cfg.model).system.coupling(1, 2) == 3.0);

  CHECK(config_error(R"(model:
  dense:
    couplings: [[0, 1], [2, 0]]
beta: [1]
tau: [1]
)").find("symmetric") != std::string::npos);
  CHECK(config_error(R"(model:
  dense:
    couplings: [[0, 1], [1, 0]]
engine: nanopore
beta: [1]
tau: [1]
)").find("engine") != std::string::npos);
  CHECK(config_error(R"(model:
  nanopore: {n_spins: 3, coupling: 1}
beta: [-1]
tau: [1]
)").find("negative") != std::string::npos);
}

TEST_CASE("rows at beta = 0 carry zero information") {
  auto cfg = parse_config(R"(model:
  nanopore: {n_spins: 12, coupling: 1}
beta: [0, 1]
tau: [0.3, 0.9]
)");
  const auto result = run_sweep(cfg, {.threads = 2});
  REQUIRE(result.rows.size() == 4);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& row = result.rows[i];
    CHECK(row.beta == 0.0);
    CHECK(row.wy == doctest::Approx(0.0));
    CHECK(row.fisher == doctest::Approx(0.0));
    CHECK(row.depth_wy == 1);
    CHECK(row.depth_fisher == 1);
  }
  // beta outer, tau inner
  CHECK(result.rows[0].tau == 0.3);
  CHECK(result.rows[1].tau == 0.9);
  CHECK(result.rows[2].beta == 1.0);
  CHECK(result.rows[3].tau == 0.9);
  CHECK(result.summary.rows == 4);
}

TEST_CASE("dense and nanopore engines give the same table") {
  auto cfg = load_config(kSource / "configs/uniform_6_dense.yaml");
  const auto dense = run_sweep(cfg, {.threads = 2});
  cfg.engine = EngineChoice::nanopore;
  const auto nano = run_sweep(cfg, {.threads = 2});
  REQUIRE(dense.rows.size() == nano.rows.size());
  REQUIRE(dense.rows.size() == 35);
  CHECK(dense.rows.front().engine == EngineKind::dense);
  CHECK(nano.rows.front().engine == EngineKind::nanopore);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (std::size_t i = 0; i < dense.rows.size(); ++i) {
    const auto& a = dense.rows[i];
    const auto& b = nano.rows[i];
    CHECK(a.beta == b.beta);
    CHECK(a.tau == b.tau);
    CHECK(close(a.m2, b.m2));
    CHECK(close(a.m2_half_beta, b.m2_half_beta));
    CHECK(close(a.wy, b.wy));
    CHECK(close(a.fisher, b.fisher));
    CHECK(close(a.fisher_lb, b.fisher_lb));
    CHECK(a.depth_wy == b.depth_wy);
    CHECK(a.depth_fisher == b.depth_fisher);
    for (int n = -6; n <= 6; ++n) CHECK(close(a.intensity(n), b.intensity(n)));
  }
}

TEST_CASE("csv output is deterministic across thread counts") {
  const auto cfg = load_config(kSource / "configs/uniform_6_dense.yaml");
  const auto one = csv_of(cfg, 1);
  CHECK(one == csv_of(cfg, 1));
  CHECK(one == csv_of(cfg, 3));
  CHECK(one.find("# generated") == std::string::npos);

  std::istringstream lines(one);
  std::string line;
  std::getline(lines, line);
  CHECK(line == std::string("# ") + kCsvFormatVersion);
  while (std::getline(lines, line) && line.starts_with("#")) {
  }
  CHECK(line ==
        "engine,N,beta,tau,M2,M2_half_beta,I_WY,I_F,fisher_lb,depth_wy,depth_fisher,J_0,J_2,J_4,J_6");

  const auto result = run_sweep(cfg, {.threads = 1});
  std::ostringstream stamped;
  write_csv(stamped, cfg, result, {.timestamp = true});
  CHECK(stamped.str().find("# generated") != std::string::npos);
}

TEST_CASE("json output parses back") {
  auto cfg = parse_config(R"(model:
  nanopore: {n_spins: 4, coupling: 1}
beta: [0.5, 2]
tau: [1]
format: json
)");
  const auto result = run_sweep(cfg, {.threads = 1});
  std::ostringstream out;
  write_json(out, cfg, result, {.timestamp = false});
  const auto doc = nlohmann::json::parse(out.str());
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][1]["beta"].get<double>() == 2.0);
  CHECK(doc["rows"][1]["I_F"].get<double>() == doctest::Approx(result.rows[1].fisher));
}

TEST_CASE("max-over-grid keeps the tau maximizing I_F") {
  auto cfg = parse_config(R"(model:
  nanopore: {n_spins: 8, coupling: 1}
beta: [0.5, 3]
tau: {start: 0.1, stop: 2.0, count: 12}
)");
  const auto all = run_sweep(cfg, {.threads = 2});
  cfg.tau_mode = TauMode::max_over_grid;
  const auto best = run_sweep(cfg, {.threads = 2});
  REQUIRE(best.rows.size() == 2);
  for (std::size_t b = 0; b < 2; ++b) {
    double top = -1.0;
    double top_tau = 0.0;
    for (std::size_t t = 0; t < 12; ++t) {
      const auto& row = all.rows[b * 12 + t];
      if (row.fisher > top) {
        top = row.fisher;
        top_tau = row.tau;
      }
    }
    CHECK(best.rows[b].tau == top_tau);
    CHECK(best.rows[b].fisher == top);
  }
}

TEST_CASE("sweep errors name the grid point") {
  RunConfig cfg;
  cfg.model = NanoporeModel{5, 1.0};
  cfg.beta_grid = {1.0, -2.0};
  cfg.tau_grid = {0.5};
  try {
    run_sweep(cfg, {.threads = 1});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("tau=0.5") != std::string::npos);
  }

  RunConfig big;
  big.model = DenseModelSpec{SpinSystem::uniform(15, 1.0), std::nullopt};
  big.beta_grid = {1.0};
  big.tau_grid = {1.0};
  CHECK_THROWS_AS(run_sweep(big), SizeError);
}

TEST_CASE("cli exit codes") {
  CHECK(cli_status("depth --n 6 --value 21") == 0);
  CHECK(cli_status("run " + (kSource / "configs/uniform_6_dense.yaml").string() + " --no-header-timestamp") == 0);
  const auto bad = write_temp("mqskew_bad.yaml", "model: {}\nbeta: [1]\ntau: [1]\n");
  CHECK(cli_status("run " + bad.string()) == 1);
  const auto huge = write_temp("mqskew_huge.yaml", "model:\n  nanopore: {n_spins: 20, coupling: 1}\nengine: dense\nbeta: [1]\ntau: [1]\n");
  CHECK(cli_status("run " + huge.string()) == 3);
  CHECK(cli_status("run /nonexistent/config.yaml") == 1);
  const auto incomplete = write_temp("mqskew_incomplete.yaml", "model:\n  nanopore: {n_spins: 4}\nbeta: [1]\ntau: [1]\n");
  CHECK(cli_status("run " + incomplete.string()) == 1);
  std::filesystem::remove(incomplete);
  std::filesystem::remove(bad);
  std::filesystem::remove(huge);
}
