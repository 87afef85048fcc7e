#include "mqskew/sweep.hpp"

#include "mqskew/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace mqskew {

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

ResultRow make_row(const DepthReport& report, double wall_seconds) {
  return ResultRow{.engine = report.engine,
                   .n_spins = report.n_spins,
                   .beta = report.beta,
                   .tau = report.tau,
                   .intensities = report.spectrum.intensities(),
                   .m2 = report.m2,
                   .m2_half_beta = report.m2_half_beta,
                   .wy = report.info.wy,
                   .fisher = report.info.fisher,
                   .fisher_lb = report.info.m2_bound,
                   .depth_wy = report.depth_wy,
                   .depth_fisher = report.depth_fisher,
                   .wall_seconds = wall_seconds};
}

namespace {

using Clock = std::chrono::steady_clock;

std::string point_label(double beta, double tau) {
  std::ostringstream out;
  out << "grid point (beta=" << format_number(beta) << ", tau=" << format_number(tau) << ")";
  return out.str();
}

// Evaluates reports for a contiguous slice of the beta grid at one tau.
struct Task {
  std::size_t tau_index;
  std::size_t beta_begin;
  std::size_t beta_end;
};

struct TaskResult {
  std::vector<DepthReport> reports;
  double wall_seconds = 0.0;
  std::exception_ptr error;
  std::string error_point;
};

template <typename Engine>
std::vector<TaskResult> evaluate(const Engine& engine, const RunConfig& config, const std::vector<Task>& tasks,
                                 unsigned threads) {
  std::vector<TaskResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& task = tasks[i];
      const double tau = config.tau_grid[task.tau_index];
      const std::span<const double> betas(config.beta_grid.data() + task.beta_begin,
                                          task.beta_end - task.beta_begin);
      const auto start = Clock::now();
      try {
        results[i].reports = engine.reports_at_tau(tau, betas);
      } catch (...) {
        results[i].error = std::current_exception();
        std::ostringstream where;
        where << "tau=" << format_number(tau) << ", beta in [" << format_number(betas.front()) << ", "
              << format_number(betas.back()) << "]";
        results[i].error_point = where.str();
      }
      results[i].wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

[[noreturn]] void rethrow_with_point(const TaskResult& r) {
  try {
    std::rethrow_exception(r.error);
  } catch (const SizeError&) {
    throw;
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(std::string(e.what()) + " [" + r.error_point + "]");
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " [" + r.error_point + "]");
  }
}

}  // namespace

SweepResult run_sweep(const RunConfig& config, const SweepOptions& options) {
  const auto start = Clock::now();
  const std::size_t n_beta = config.beta_grid.size();
  const std::size_t n_tau = config.tau_grid.size();
  if (n_beta == 0 || n_tau == 0) throw ConfigError("beta and tau grids must be non-empty");

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;

  // Tasks are one tau each; when there are fewer taus than threads the beta
  // grid is also split so every thread has work.
  const std::size_t chunks_per_tau = std::clamp<std::size_t>((threads + n_tau - 1) / n_tau, 1, n_beta);
  std::vector<Task> tasks;
  for (std::size_t t = 0; t < n_tau; ++t) {
    for (std::size_t c = 0; c < chunks_per_tau; ++c) {
      tasks.push_back({t, c * n_beta / chunks_per_tau, (c + 1) * n_beta / chunks_per_tau});
    }
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));

  std::vector<TaskResult> results;
  if (config.resolved_engine() == EngineKind::nanopore) {
    const auto& model = std::get<NanoporeModel>(config.model);
    const NanoporeEngine engine(model, {.cap = config.nanopore_cap, .allow_negative_beta = config.allow_negative_beta});
    results = evaluate(engine, config, tasks, threads);
  } else {
    const SpinSystem system = std::holds_alternative<DenseModelSpec>(config.model)
                                  ? std::get<DenseModelSpec>(config.model).system
                                  : SpinSystem::uniform(std::get<NanoporeModel>(config.model).n_spins,
                                                        std::get<NanoporeModel>(config.model).coupling);
    const DenseEngine engine(system, {.dense_cap = config.dense_cap,
                                      .cross_check_cap = config.cross_check_cap,
                                      .allow_negative_beta = config.allow_negative_beta});
    results = evaluate(engine, config, tasks, threads);
  }
  for (const auto& r : results) {
    if (r.error) rethrow_with_point(r);
  }

  // grid[beta][tau]
  std::vector<std::vector<const DepthReport*>> grid(n_beta, std::vector<const DepthReport*>(n_tau, nullptr));
  std::vector<std::vector<double>> seconds(n_beta, std::vector<double>(n_tau, 0.0));
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    const auto count = task.beta_end - task.beta_begin;
    for (std::size_t k = 0; k < count; ++k) {
      grid[task.beta_begin + k][task.tau_index] = &results[i].reports[k];
      seconds[task.beta_begin + k][task.tau_index] = results[i].wall_seconds / static_cast<double>(count);
    }
  }

  SweepResult out;
  auto emit = [&](const DepthReport& report, double wall) {
    const auto violations = sandwich_violations(report);
    if (!violations.empty()) {
      std::string msg = "invariant violation at " + point_label(report.beta, report.tau) + ":";
      for (const auto& v : violations) msg += "\n  " + v;
      throw ConsistencyError(msg);
    }
    if (!fisher_bound_holds(report)) ++out.summary.fisher_bound_exceeded;
    out.rows.push_back(make_row(report, wall));
  };

  for (std::size_t b = 0; b < n_beta; ++b) {
    if (config.tau_mode == TauMode::fixed) {
      for (std::size_t t = 0; t < n_tau; ++t) emit(*grid[b][t], seconds[b][t]);
    } else {
      std::size_t best = 0;
      double wall = 0.0;
      for (std::size_t t = 0; t < n_tau; ++t) {
        wall += seconds[b][t];
        if (grid[b][t]->info.fisher > grid[b][best]->info.fisher) best = t;
      }
      emit(*grid[b][best], wall);
    }
  }

  auto& s = out.summary;
  s.rows = out.rows.size();
  s.min_depth_wy = s.min_depth_fisher = config.n_spins();
  s.max_depth_wy = s.max_depth_fisher = 1;
  for (const auto& row : out.rows) {
    s.min_depth_wy = std::min(s.min_depth_wy, row.depth_wy);
    s.max_depth_wy = std::max(s.max_depth_wy, row.depth_wy);
    s.min_depth_fisher = std::min(s.min_depth_fisher, row.depth_fisher);
    s.max_depth_fisher = std::max(s.max_depth_fisher, row.depth_fisher);
  }
  if (s.fisher_bound_exceeded > 0) {
    std::ostringstream w;
    w << "2*M2 exceeded I_F at " << s.fisher_bound_exceeded << " of " << s.rows
      << " rows (M2 is normalized by Tr(rho_eq^2); 2*Tr(rho_eq^2)*M2 is the guaranteed lower bound)";
    s.warnings.push_back(w.str());
  }
  if (config.resolved_engine() == EngineKind::dense && config.n_spins() > config.cross_check_cap) {
    s.warnings.push_back("sqrt(rho) cross-check skipped: N=" + std::to_string(config.n_spins()) +
                         " exceeds cross_check_cap=" + std::to_string(config.cross_check_cap));
  }
  s.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

namespace {

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::vector<std::string> column_names(const RunConfig& config) {
  std::vector<std::string> cols{"engine", "N", "beta", "tau"};
  if (config.wants(OutputGroup::moments)) cols.insert(cols.end(), {"M2", "M2_half_beta"});
  if (config.wants(OutputGroup::informations)) cols.insert(cols.end(), {"I_WY", "I_F", "fisher_lb"});
  if (config.wants(OutputGroup::depths)) cols.insert(cols.end(), {"depth_wy", "depth_fisher"});
  if (config.wants(OutputGroup::spectrum)) {
    for (int n = 0; n <= config.n_spins(); n += 2) cols.push_back("J_" + std::to_string(n));
  }
  return cols;
}

}  // namespace

void write_csv(std::ostream& out, const RunConfig& config, const SweepResult& result, const WriteOptions& options) {
  const auto cols = column_names(config);
  out << "# " << kCsvFormatVersion << "\n";
  out << "# engine=" << engine_name(config.resolved_engine()) << " N=" << config.n_spins()
      << " tau_mode=" << to_string(config.tau_mode) << "\n";
  if (config.wants(OutputGroup::spectrum)) {
    out << "# J_n listed for even n >= 0 only: J_-n = J_n and odd orders vanish under H_MQ\n";
  }
  out << "# depth_wy applies the k-producibility bound to I_WY\n";
  if (options.timestamp) out << "# generated " << timestamp_now() << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";

  for (const auto& row : result.rows) {
    out << engine_name(row.engine) << "," << row.n_spins << "," << format_number(row.beta) << ","
        << format_number(row.tau);
    if (config.wants(OutputGroup::moments)) out << "," << format_number(row.m2) << "," << format_number(row.m2_half_beta);
    if (config.wants(OutputGroup::informations)) {
      out << "," << format_number(row.wy) << "," << format_number(row.fisher) << "," << format_number(row.fisher_lb);
    }
    if (config.wants(OutputGroup::depths)) out << "," << row.depth_wy << "," << row.depth_fisher;
    if (config.wants(OutputGroup::spectrum)) {
      for (int n = 0; n <= row.n_spins; n += 2) out << "," << format_number(row.intensity(n));
    }
    out << "\n";
  }
}

void write_json(std::ostream& out, const RunConfig& config, const SweepResult& result, const WriteOptions& options) {
  nlohmann::ordered_json doc;
  doc["format"] = "mqskew-json/1";
  if (options.timestamp) doc["generated"] = timestamp_now();
  doc["engine"] = engine_name(config.resolved_engine());
  doc["n_spins"] = config.n_spins();
  doc["tau_mode"] = to_string(config.tau_mode);
  doc["columns"] = column_names(config);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json r;
    r["engine"] = engine_name(row.engine);
    r["N"] = row.n_spins;
    r["beta"] = row.beta;
    r["tau"] = row.tau;
    if (config.wants(OutputGroup::moments)) {
      r["M2"] = row.m2;
      r["M2_half_beta"] = row.m2_half_beta;
    }
    if (config.wants(OutputGroup::informations)) {
      r["I_WY"] = row.wy;
      r["I_F"] = row.fisher;
      r["fisher_lb"] = row.fisher_lb;
    }
    if (config.wants(OutputGroup::depths)) {
      r["depth_wy"] = row.depth_wy;
      r["depth_fisher"] = row.depth_fisher;
    }
    if (config.wants(OutputGroup::spectrum)) {
      // Full J_n, n = -N..N.
      r["J"] = row.intensities;
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  const auto& s = result.summary;
  doc["summary"] = {{"rows", s.rows},
                    {"depth_wy", {s.min_depth_wy, s.max_depth_wy}},
                    {"depth_fisher", {s.min_depth_fisher, s.max_depth_fisher}},
                    {"fisher_bound_exceeded", s.fisher_bound_exceeded},
                    {"warnings", s.warnings}};
  out << doc.dump(2) << "\n";
}

void write_summary(std::ostream& out, const RunConfig& config, const SweepResult& result) {
  const auto& s = result.summary;
  out << "engine " << engine_name(config.resolved_engine()) << ", N=" << config.n_spins() << ", "
      << config.beta_grid.size() << " beta x " << config.tau_grid.size() << " tau (" << to_string(config.tau_mode)
      << "), " << s.rows << " rows in " << std::fixed << std::setprecision(2) << s.wall_seconds << " s\n";
  out << "depth_wy " << s.min_depth_wy << ".." << s.max_depth_wy << ", depth_fisher " << s.min_depth_fisher << ".."
      << s.max_depth_fisher << "\n";
  for (const auto& w : s.warnings) out << "warning: " << w << "\n";
}

}  // namespace mqskew
