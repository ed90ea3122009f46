#pragma once

// Declarative run configuration (JSON). Unknown keys are rejected; every
// validation failure raises ConfigError carrying a JSON pointer to the
// offending field, or "line N, column M" for syntax errors.

#include "tsr/cavity.hpp"
#include "tsr/noise.hpp"
#include "tsr/sweep.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsr {

inline constexpr int kConfigSchemaVersion = 1;

struct GridConfig {
  double f_min = 10.0;
  double f_max = 5000.0;
  std::size_t points = 600;
  sweep::Spacing spacing = sweep::Spacing::Log;

  std::vector<double> make() const;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

enum class TopologyKind { Tsr, DetunedSr };

/// Topology as written in the config. A TSR SRM is either given explicitly or
/// designed for a splitting; a detuned SR is either given a detuning or put on
/// resonance for one sideband.
struct TopologyConfig {
  TopologyKind kind = TopologyKind::Tsr;
  // tsr
  double l1 = 1200.0;
  double l2 = 1200.0;
  MirrorSpec tsrm = MirrorSpec::lossless_reflectivity(0.963);
  std::optional<MirrorSpec> srm;  // empty: designed from splitting_hz
  double splitting_hz = 1000.0;
  CouplingDesign srm_design = CouplingDesign::Ideal;
  // detuned_sr
  double length = 1200.0;
  MirrorSpec recycling_mirror = MirrorSpec::lossless_reflectivity(0.99);
  std::optional<double> detuning;  // empty: resonant for `sideband`
  double resonance_hz = 1000.0;
  Sideband sideband = Sideband::Upper;

  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct CompareConfig {
  MirrorSpec sr_mirror = MirrorSpec::lossless_reflectivity(0.99);
  double resonance_hz = 1000.0;
  CouplingDesign srm_design = CouplingDesign::Ideal;
  MatchMode match = MatchMode::Tangent;
  double sr_readout_angle = 0.0;

  friend bool operator==(const CompareConfig&, const CompareConfig&) = default;
};

struct SqueezingConfig {
  bool enabled = false;
  double r = 0.0;
  double angle = 0.0;
  bool optimal_angle = false;  // fixed angle chosen at the vacuum NSD minimum

  SqueezedInput input() const { return {r, angle, enabled}; }
  friend bool operator==(const SqueezingConfig&, const SqueezingConfig&) = default;
};

struct DoubletConfig {
  GridConfig grid{-3000.0, 3000.0, 6001, sweep::Spacing::Linear};
  DoubletObservable observable = DoubletObservable::InputCavityPower;

  friend bool operator==(const DoubletConfig&, const DoubletConfig&) = default;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
  OutputFormat format = OutputFormat::Csv;
  std::string path;  // empty: standard output
  NsdUnits units = NsdUnits::Phase;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  InterferometerParams interferometer;
  TopologyConfig topology;
  CompareConfig compare;
  SqueezingConfig squeezing;
  double readout_angle = 0.5 * std::numbers::pi;
  GridConfig grid;
  DoubletConfig doublet;
  OutputConfig output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::string_view json_text);
/// Throws IoError if the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Concrete topology; designs the SRM or detuning when the config asks for it.
Topology resolve_topology(const RunConfig& config);
ComparisonOptions comparison_options(const RunConfig& config);

OutputFormat parse_output_format(const std::string& name);
std::string to_string(OutputFormat format);

}  // namespace tsr
