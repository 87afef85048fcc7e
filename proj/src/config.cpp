#include "mqskew/config.hpp"

#include "mqskew/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mqskew {

const char* to_string(TauMode mode) { return mode == TauMode::fixed ? "fixed" : "max-over-grid"; }
const char* to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "json"; }
const char* to_string(OutputGroup group) {
  switch (group) {
    case OutputGroup::spectrum: return "spectrum";
    case OutputGroup::moments: return "moments";
    case OutputGroup::informations: return "informations";
    case OutputGroup::depths: return "depths";
  }
  return "?";
}

int RunConfig::n_spins() const {
  if (const auto* dense = std::get_if<DenseModelSpec>(&model)) return dense->system.n_spins();
  return std::get<NanoporeModel>(model).n_spins;
}

bool RunConfig::wants(OutputGroup group) const {
  return std::find(outputs.begin(), outputs.end(), group) != outputs.end();
}

EngineKind RunConfig::resolved_engine() const {
  if (std::holds_alternative<DenseModelSpec>(model)) return EngineKind::dense;
  return engine == EngineChoice::dense ? EngineKind::dense : EngineKind::nanopore;
}

namespace {

class Diagnostics {
 public:
  void add(const YAML::Node& node, const std::string& field, const std::string& message) {
    std::ostringstream out;
    if (node.IsDefined() && node.Mark().line >= 0) out << "line " << node.Mark().line + 1 << ": ";
    out << field << ": " << message;
    errors_.push_back(out.str());
  }
  void add(const std::string& field, const std::string& message) { errors_.push_back(field + ": " + message); }
  bool empty() const { return errors_.empty(); }
  std::size_t count() const { return errors_.size(); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::optional<double> read_number(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  if (!node.IsDefined()) {
    diag.add(field, "missing");
    return std::nullopt;
  }
  if (!node.IsScalar()) {
    diag.add(node, field, "expected a number");
    return std::nullopt;
  }
  try {
    const double v = node.as<double>();
    if (!std::isfinite(v)) {
      diag.add(node, field, "must be finite");
      return std::nullopt;
    }
    return v;
  } catch (const YAML::Exception&) {
    diag.add(node, field, "'" + node.Scalar() + "' is not a number");
    return std::nullopt;
  }
}

std::optional<long long> read_integer(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  if (!node.IsDefined()) {
    diag.add(field, "missing");
    return std::nullopt;
  }
  if (!node.IsScalar()) {
    diag.add(node, field, "expected an integer");
    return std::nullopt;
  }
  try {
    return node.as<long long>();
  } catch (const YAML::Exception&) {
    diag.add(node, field, "'" + node.Scalar() + "' is not an integer");
    return std::nullopt;
  }
}

std::optional<bool> read_bool(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  if (!node.IsDefined()) {
    diag.add(field, "missing");
    return std::nullopt;
  }
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    diag.add(node, field, "expected true or false");
    return std::nullopt;
  }
}

std::optional<std::string> read_string(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  if (!node.IsDefined()) {
    diag.add(field, "missing");
    return std::nullopt;
  }
  if (!node.IsScalar()) {
    diag.add(node, field, "expected a string");
    return std::nullopt;
  }
  return node.Scalar();
}

void reject_unknown_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed,
                         Diagnostics& diag) {
  for (const auto& kv : map) {
    const auto key = kv.first.Scalar();
    if (!allowed.contains(key)) diag.add(kv.first, where.empty() ? key : where + "." + key, "unknown key");
  }
}

// Either an explicit list or {start, stop, count} (inclusive endpoints).
std::vector<double> read_grid(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  std::vector<double> grid;
  const std::size_t errors_before = diag.count();
  if (!node.IsDefined() || node.IsNull()) {
    diag.add(field, "missing");
    return grid;
  }
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (auto v = read_number(node[i], field + "[" + std::to_string(i) + "]", diag)) grid.push_back(*v);
    }
  } else if (node.IsMap()) {
    reject_unknown_keys(node, field, {"start", "stop", "count"}, diag);
    const auto start = read_number(node["start"], field + ".start", diag);
    const auto stop = read_number(node["stop"], field + ".stop", diag);
    const auto count = read_integer(node["count"], field + ".count", diag);
    if (start && stop && count) {
      if (*count < 1) {
        diag.add(node["count"], field + ".count", "must be >= 1");
      } else if (*count == 1) {
        grid.push_back(*start);
      } else {
        for (long long i = 0; i < *count; ++i) {
          grid.push_back(*start + (*stop - *start) * static_cast<double>(i) / static_cast<double>(*count - 1));
        }
      }
    }
  } else {
    diag.add(node, field, "expected a list or {start, stop, count}");
  }
  if (grid.empty() && diag.count() == errors_before) diag.add(node, field, "grid is empty");
  return grid;
}

std::optional<Eigen::Vector3d> read_vec3(const YAML::Node& node, const std::string& field, Diagnostics& diag) {
  if (!node.IsSequence() || node.size() != 3) {
    diag.add(node, field, "expected [x, y, z]");
    return std::nullopt;
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    const auto c = read_number(node[i], field, diag);
    if (!c) return std::nullopt;
    v(i) = *c;
  }
  return v;
}

std::optional<DenseModelSpec> read_dense(const YAML::Node& node, Diagnostics& diag) {
  if (!node.IsMap()) {
    diag.add(node, "model.dense", "expected a mapping");
    return std::nullopt;
  }
  reject_unknown_keys(node, "model.dense", {"couplings", "geometry"}, diag);
  const bool has_couplings = node["couplings"].IsDefined();
  const bool has_geometry = node["geometry"].IsDefined();
  if (has_couplings == has_geometry) {
    diag.add(node, "model.dense", "set exactly one of 'couplings' or 'geometry'");
    return std::nullopt;
  }

  if (has_couplings) {
    const auto rows = node["couplings"];
    if (!rows.IsSequence() || rows.size() == 0) {
      diag.add(rows, "model.dense.couplings", "expected a non-empty square matrix");
      return std::nullopt;
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd d(n, n);
    bool ok = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto row = rows[static_cast<std::size_t>(j)];
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != n) {
        diag.add(row, "model.dense.couplings[" + std::to_string(j) + "]", "row length must be " + std::to_string(n));
        ok = false;
        continue;
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto v = read_number(row[static_cast<std::size_t>(k)], "model.dense.couplings", diag);
        if (!v) ok = false;
        else d(j, k) = *v;
      }
    }
    if (!ok) return std::nullopt;
    try {
      return DenseModelSpec{SpinSystem(std::move(d)), std::nullopt};
    } catch (const Error& e) {
      diag.add(rows, "model.dense.couplings", e.what());
      return std::nullopt;
    }
  }

  const auto g = node["geometry"];
  if (!g.IsMap()) {
    diag.add(g, "model.dense.geometry", "expected a mapping");
    return std::nullopt;
  }
  reject_unknown_keys(g, "model.dense.geometry", {"positions", "field_axis", "prefactor"}, diag);
  Geometry geom;
  bool ok = true;
  if (g["prefactor"].IsDefined()) {
    if (auto p = read_number(g["prefactor"], "model.dense.geometry.prefactor", diag)) geom.prefactor = *p;
    else ok = false;
  }
  if (g["field_axis"].IsDefined()) {
    if (auto a = read_vec3(g["field_axis"], "model.dense.geometry.field_axis", diag)) geom.field_axis = *a;
    else ok = false;
  }
  const auto positions = g["positions"];
  if (!positions.IsSequence() || positions.size() == 0) {
    diag.add(positions, "model.dense.geometry.positions", "expected a non-empty list of [x, y, z]");
    return std::nullopt;
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (auto p = read_vec3(positions[i], "model.dense.geometry.positions[" + std::to_string(i) + "]", diag)) {
      geom.positions.push_back(*p);
    } else {
      ok = false;
    }
  }
  if (!ok) return std::nullopt;
  try {
    SpinSystem system = dipolar_couplings_from_geometry(geom);
    return DenseModelSpec{std::move(system), std::move(geom)};
  } catch (const Error& e) {
    diag.add(g, "model.dense.geometry", e.what());
    return std::nullopt;
  }
}

std::optional<NanoporeModel> read_nanopore(const YAML::Node& node, Diagnostics& diag) {
  if (!node.IsMap()) {
    diag.add(node, "model.nanopore", "expected a mapping");
    return std::nullopt;
  }
  reject_unknown_keys(node, "model.nanopore", {"n_spins", "coupling"}, diag);
  const auto n = read_integer(node["n_spins"], "model.nanopore.n_spins", diag);
  const auto d = read_number(node["coupling"], "model.nanopore.coupling", diag);
  if (!n || !d) return std::nullopt;
  if (*n < 1) {
    diag.add(node["n_spins"], "model.nanopore.n_spins", "must be >= 1");
    return std::nullopt;
  }
  return NanoporeModel{static_cast<int>(*n), *d};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << source_name << ": parse error at line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": "
        << e.msg;
    throw ConfigError(msg.str());
  }
  if (!root.IsMap()) throw ConfigError(source_name + ": top level must be a mapping");

  Diagnostics diag;
  reject_unknown_keys(root, "",
                      {"model", "beta", "tau", "tau_mode", "outputs", "format", "seed", "engine", "limits",
                       "allow_negative_beta"},
                      diag);

  std::optional<ModelSpec> model;
  const auto model_node = root["model"];
  if (!model_node.IsMap()) {
    diag.add(model_node, "model", "missing or not a mapping");
  } else {
    reject_unknown_keys(model_node, "model", {"dense", "nanopore"}, diag);
    const bool dense = model_node["dense"].IsDefined();
    const bool nano = model_node["nanopore"].IsDefined();
    if (dense && nano) {
      diag.add(model_node, "model", "exactly one of 'dense' or 'nanopore' may be set, found both");
    } else if (!dense && !nano) {
      diag.add(model_node, "model", "one of 'dense' or 'nanopore' is required");
    } else if (dense) {
      if (auto m = read_dense(model_node["dense"], diag)) model = std::move(*m);
    } else if (auto m = read_nanopore(model_node["nanopore"], diag)) {
      model = *m;
    }
  }

  std::vector<double> betas = read_grid(root["beta"], "beta", diag);
  std::vector<double> taus = read_grid(root["tau"], "tau", diag);

  RunConfig cfg;
  if (model) cfg.model = std::move(*model);
  cfg.beta_grid = std::move(betas);
  cfg.tau_grid = std::move(taus);

  if (auto n = root["allow_negative_beta"]; n.IsDefined()) {
    if (auto v = read_bool(n, "allow_negative_beta", diag)) cfg.allow_negative_beta = *v;
  }
  for (std::size_t i = 0; i < cfg.beta_grid.size(); ++i) {
    if (cfg.beta_grid[i] < 0.0 && !cfg.allow_negative_beta) {
      diag.add(root["beta"], "beta", "negative value " + std::to_string(cfg.beta_grid[i]) +
                                         " requires allow_negative_beta: true");
      break;
    }
  }

  if (auto n = root["tau_mode"]; n.IsDefined()) {
    if (auto s = read_string(n, "tau_mode", diag)) {
      if (*s == "fixed") cfg.tau_mode = TauMode::fixed;
      else if (*s == "max-over-grid") cfg.tau_mode = TauMode::max_over_grid;
      else diag.add(n, "tau_mode", "expected 'fixed' or 'max-over-grid', got '" + *s + "'");
    }
  }

  if (auto n = root["outputs"]; n.IsDefined()) {
    cfg.outputs.clear();
    if (!n.IsSequence() || n.size() == 0) {
      diag.add(n, "outputs", "expected a non-empty list");
    } else {
      for (std::size_t i = 0; i < n.size(); ++i) {
        const auto s = read_string(n[i], "outputs", diag);
        if (!s) continue;
        if (*s == "spectrum") cfg.outputs.push_back(OutputGroup::spectrum);
        else if (*s == "moments") cfg.outputs.push_back(OutputGroup::moments);
        else if (*s == "informations") cfg.outputs.push_back(OutputGroup::informations);
        else if (*s == "depths") cfg.outputs.push_back(OutputGroup::depths);
        else diag.add(n[i], "outputs", "unknown output group '" + *s + "'");
      }
    }
  }

  if (auto n = root["format"]; n.IsDefined()) {
    if (auto s = read_string(n, "format", diag)) {
      if (*s == "csv") cfg.format = OutputFormat::csv;
      else if (*s == "json") cfg.format = OutputFormat::json;
      else diag.add(n, "format", "expected 'csv' or 'json', got '" + *s + "'");
    }
  }

  if (auto n = root["seed"]; n.IsDefined()) {
    if (auto v = read_integer(n, "seed", diag)) cfg.seed = static_cast<std::uint64_t>(*v);
  }

  if (auto n = root["engine"]; n.IsDefined()) {
    if (auto s = read_string(n, "engine", diag)) {
      if (*s == "auto") cfg.engine = EngineChoice::automatic;
      else if (*s == "dense") cfg.engine = EngineChoice::dense;
      else if (*s == "nanopore") cfg.engine = EngineChoice::nanopore;
      else diag.add(n, "engine", "expected 'auto', 'dense' or 'nanopore', got '" + *s + "'");
    }
    if (model && std::holds_alternative<DenseModelSpec>(*model) && cfg.engine == EngineChoice::nanopore) {
      diag.add(n, "engine", "the nanopore engine requires a nanopore model (all couplings equal)");
    }
  }

  if (auto limits = root["limits"]; limits.IsDefined()) {
    if (!limits.IsMap()) {
      diag.add(limits, "limits", "expected a mapping");
    } else {
      reject_unknown_keys(limits, "limits", {"dense_cap", "nanopore_cap", "cross_check_cap"}, diag);
      auto read_cap = [&](const char* key, int& target) {
        if (auto n = limits[key]; n.IsDefined()) {
          if (auto v = read_integer(n, std::string("limits.") + key, diag)) {
            if (*v < 1) diag.add(n, std::string("limits.") + key, "must be >= 1");
            else target = static_cast<int>(*v);
          }
        }
      };
      read_cap("dense_cap", cfg.dense_cap);
      read_cap("nanopore_cap", cfg.nanopore_cap);
      read_cap("cross_check_cap", cfg.cross_check_cap);
    }
  }

  if (!diag.empty()) {
    std::ostringstream msg;
    msg << source_name << ": invalid configuration (" << diag.errors().size() << " problem"
        << (diag.errors().size() == 1 ? "" : "s") << ")";
    for (const auto& e : diag.errors()) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace mqskew
