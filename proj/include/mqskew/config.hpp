#pragma once

#include "mqskew/nanopore.hpp"
#include "mqskew/spin_core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mqskew {

enum class TauMode { fixed, max_over_grid };
enum class OutputFormat { csv, json };
enum class OutputGroup { spectrum, moments, informations, depths };
enum class EngineChoice { automatic, dense, nanopore };

const char* to_string(TauMode mode);
const char* to_string(OutputFormat format);
const char* to_string(OutputGroup group);

// Arbitrary couplings, given directly or derived from a geometry.
struct DenseModelSpec {
  SpinSystem system;
  std::optional<Geometry> geometry;
};

using ModelSpec = std::variant<NanoporeModel, DenseModelSpec>;

struct RunConfig {
  ModelSpec model;
  std::vector<double> beta_grid;
  std::vector<double> tau_grid;
  TauMode tau_mode = TauMode::fixed;
  std::vector<OutputGroup> outputs{OutputGroup::moments, OutputGroup::informations, OutputGroup::depths,
                                   OutputGroup::spectrum};
  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 0;
  EngineChoice engine = EngineChoice::automatic;
  int dense_cap = kDefaultDenseCap;
  int nanopore_cap = kDefaultNanoporeCap;
  int cross_check_cap = 10;
  bool allow_negative_beta = false;

  int n_spins() const;
  bool wants(OutputGroup group) const;
  // Engine that will actually run the sweep.
  EngineKind resolved_engine() const;
};

// Parses and validates YAML text. Throws ConfigError carrying every
// violation found, each with its line number where one is available.
RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mqskew
