#include "cli.hpp"

#include "tsr/cavity.hpp"
#include "tsr/config.hpp"
#include "tsr/errors.hpp"
#include "tsr/noise.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace tsr::cli {

namespace {

using nlohmann::json;

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column
  json summary = json::object();
};

std::string number(double x) { return fmt::format("{:.16e}", x); }

std::string render_csv(const Table& t) {
  std::string s;
  for (const auto& [k, v] : t.metadata) s += fmt::format("# {}: {}\n", k, v);
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    s += t.columns[c];
    s += c + 1 < t.columns.size() ? ',' : '\n';
  }
  const std::size_t rows = t.data.empty() ? 0 : t.data.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < t.data.size(); ++c) {
      s += number(t.data[c][r]);
      s += c + 1 < t.data.size() ? ',' : '\n';
    }
  }
  return s;
}

std::string render_json(const Table& t) {
  json meta = json::object();
  for (const auto& [k, v] : t.metadata) meta[k] = v;
  json data = json::object();
  for (std::size_t c = 0; c < t.columns.size(); ++c) data[t.columns[c]] = t.data[c];
  const json doc = {{"metadata", meta}, {"summary", t.summary}, {"columns", t.columns}, {"data", data}};
  return doc.dump(2) + "\n";
}

struct Destination {
  std::string path;  // empty: `out`
  OutputFormat format = OutputFormat::Csv;
};

void emit(const Table& table, const Destination& dest, std::ostream& out) {
  const std::string text = dest.format == OutputFormat::Csv ? render_csv(table) : render_json(table);
  if (dest.path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(dest.path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot open output '{}'", dest.path));
  file << text;
  file.flush();
  if (!file) throw IoError(fmt::format("cannot write output '{}'", dest.path));
}

std::string parameter_hash(RunConfig config) {
  config.output = OutputConfig{};
  return fmt::format("{:016x}", fnv1a(serialize_config(config)));
}

std::string optional_hz(const std::optional<double>& f) { return f ? number(*f) : "none"; }

Table cmd_doublet(const RunConfig& config) {
  const auto grid = config.doublet.grid.make();
  const Topology topology = resolve_topology(config);
  const CavityChain chain = signal_chain(topology, config.interferometer);
  std::vector<double> response;
  if (chain.size() >= 3) {
    response = doublet_response(chain, grid, config.doublet.observable);
  } else {
    // A single cavity has one resonance; peak search reports it as such.
    response = sweep::map(
        grid,
        [&](double hz) {
          const auto fields = chain_response(chain, SidebandFrequency::from_hz(hz));
          return config.doublet.observable == DoubletObservable::Transmission
                     ? std::norm(fields.transmission)
                     : std::norm(fields.forward.front());
        },
        sweep::Execution::Parallel);
  }
  const DoubletResult peaks = find_doublet_peaks(grid, response);

  Table t;
  t.metadata = {{"command", "doublet"},
                {"topology", describe(topology)},
                {"observable", to_string(config.doublet.observable)},
                {"parameter_hash", parameter_hash(config)},
                {"f_minus_hz", number(peaks.f_minus)},
                {"f_plus_hz", number(peaks.f_plus)},
                {"splitting_hz", number(peaks.splitting())},
                {"bandwidth_minus_hz", number(peaks.bandwidths[0])},
                {"bandwidth_plus_hz", number(peaks.bandwidths[1])},
                {"peak_minus", number(peaks.peak_magnitudes[0])},
                {"peak_plus", number(peaks.peak_magnitudes[1])}};
  t.columns = {"frequency_hz", "response"};
  t.data = {grid, response};
  t.summary = {{"f_minus_hz", peaks.f_minus},
               {"f_plus_hz", peaks.f_plus},
               {"splitting_hz", peaks.splitting()},
               {"bandwidths_hz", peaks.bandwidths},
               {"peak_magnitudes", peaks.peak_magnitudes}};
  return t;
}

struct DesignInputs {
  double fsp_hz;
  double l1;
  double l2;
  double rho_end;
};

Table cmd_design(const DesignInputs& in, const RunConfig& config, std::ostream& err) {
  if (!(std::isfinite(in.fsp_hz) && in.fsp_hz >= 0.0)) throw ConfigError("--fsp", "must be non-negative");
  if (!(in.l1 > 0.0)) throw ConfigError("--l1", "must be positive");
  if (!(in.l2 > 0.0)) throw ConfigError("--l2", "must be positive");
  if (!(in.rho_end >= 0.0 && in.rho_end <= 1.0)) throw ConfigError("--rho-end", "must lie in [0, 1]");
  const MirrorSpec end = MirrorSpec::lossless_reflectivity(in.rho_end * in.rho_end);
  const double omega = kTwoPi * in.fsp_hz;

  Table t;
  t.metadata = {{"command", "design"},
                {"fsp_hz", number(in.fsp_hz)},
                {"l1_m", number(in.l1)},
                {"l2_m", number(in.l2)},
                {"rho_end", number(in.rho_end)}};
  t.columns = {"quantity_index", "value"};

  std::vector<std::pair<std::string, double>> rows;
  if (in.fsp_hz == 0.0) {
    err << "warning: zero splitting is degenerate; coupling transmission is 0\n";
    rows.emplace_back("t_general", 0.0);
  } else {
    rows.emplace_back("t_general", solve_coupling_transmission(omega, in.l1, in.l2, end));
  }
  const double t_general = rows.front().second;
  if (in.l1 == in.l2) {
    const double eq = coupling_transmission_equal_lengths(omega, in.l1, end);
    const double ideal = coupling_transmission_ideal(omega, in.l1);
    rows.emplace_back("t_equal_lengths", eq);
    rows.emplace_back("t_ideal", ideal);
    rows.emplace_back("relative_difference_general_equal_lengths",
                      eq > 0.0 ? std::abs(t_general - eq) / eq : std::abs(t_general - eq));
  }
  rows.emplace_back("srm_reflectivity", 1.0 - t_general);
  rows.emplace_back("tsrm_reflectivity", config.topology.tsrm.reflectivity());

  std::vector<double> index;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.metadata.emplace_back(rows[i].first, number(rows[i].second));
    t.summary[rows[i].first] = rows[i].second;
    index.push_back(static_cast<double>(i));
    values.push_back(rows[i].second);
  }
  t.data = {index, values};
  return t;
}

SqueezedInput effective_squeezing(const RunConfig& config, const Topology& topology,
                                  const HomodyneReadout& readout, std::span<const double> grid) {
  SqueezedInput sq = config.squeezing.input();
  if (config.squeezing.optimal_angle && sq.enabled && sq.r > 0.0) {
    sq.angle = squeeze_angle_at_minimum(topology, config.interferometer, readout, grid);
  }
  return sq;
}

std::string units_name(NsdUnits u) { return u == NsdUnits::Phase ? "rad/sqrt(Hz)" : "1/sqrt(Hz) strain"; }

Table cmd_nsd(const RunConfig& config) {
  const auto grid = config.grid.make();
  const Topology topology = resolve_topology(config);
  const HomodyneReadout readout(config.readout_angle);
  const SqueezedInput sq = effective_squeezing(config, topology, readout, grid);
  const auto spectrum = noise_spectral_density(topology, config.interferometer, sq, readout, grid,
                                               {BackAction::On, config.output.units});
  Table t;
  t.metadata = {{"command", "nsd"},
                {"topology", spectrum.metadata.topology},
                {"squeezing_enabled", sq.enabled ? "true" : "false"},
                {"r", number(sq.r)},
                {"squeeze_angle", number(sq.angle)},
                {"readout_angle", number(readout.angle())},
                {"units", units_name(config.output.units)},
                {"parameter_hash", parameter_hash(config)}};
  t.columns = {"frequency_hz", "nsd"};
  t.data = {spectrum.frequencies, spectrum.nsd};
  const auto it = std::min_element(spectrum.nsd.begin(), spectrum.nsd.end());
  const auto at = static_cast<std::size_t>(it - spectrum.nsd.begin());
  t.summary = {{"minimum_nsd", *it}, {"minimum_at_hz", spectrum.frequencies[at]}};
  t.metadata.emplace_back("minimum_at_hz", number(spectrum.frequencies[at]));
  return t;
}

Table cmd_compare(const RunConfig& config) {
  const auto grid = config.grid.make();
  const auto options = comparison_options(config);
  SqueezedInput sq = config.squeezing.input();
  const auto result = compare_topologies(config.interferometer, sq, grid, options);
  const double scale =
      config.output.units == NsdUnits::Strain ? 1.0 / config.interferometer.strain_calibration() : 1.0;
  auto scaled = [&](const NoiseSpectrum& s) {
    std::vector<double> v = s.nsd;
    for (double& x : v) x *= scale;
    return v;
  };
  Table t;
  t.metadata = {{"command", "compare"},
                {"tsr", result.tsr.metadata.topology},
                {"sr_upper", result.sr_upper.metadata.topology},
                {"sr_lower", result.sr_lower.metadata.topology},
                {"tsrm_reflectivity", number(result.tsr_topology.tsrm.reflectivity())},
                {"match", to_string(options.match)},
                {"match_residual", number(result.match_residual)},
                {"crossover_hz", optional_hz(result.crossover_hz)},
                {"max_improvement", number(result.max_improvement)},
                {"squeezing_enabled", sq.enabled ? "true" : "false"},
                {"r", number(sq.r)},
                {"squeeze_angle_tsr", number(result.tsr.metadata.squeezing.angle)},
                {"readout_angle_tsr", number(options.tsr_readout.angle())},
                {"readout_angle_sr", number(options.sr_readout.angle())},
                {"units", units_name(config.output.units)},
                {"parameter_hash", parameter_hash(config)}};
  t.columns = {"frequency_hz", "tsr", "sr_upper", "sr_lower"};
  t.data = {grid, scaled(result.tsr), scaled(result.sr_upper), scaled(result.sr_lower)};
  t.summary = {{"tsrm_reflectivity", result.tsr_topology.tsrm.reflectivity()},
               {"match_residual", result.match_residual},
               {"crossover_hz", result.crossover_hz ? json(*result.crossover_hz) : json(nullptr)},
               {"max_improvement", result.max_improvement}};
  return t;
}

void report(const Table& t, std::ostream& err) {
  for (const auto& [k, v] : t.metadata) {
    if (k != "command") err << k << ": " << v << '\n';
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Twin signal-recycling interferometer simulator", "tsr-sim"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;
  std::string format;
  DesignInputs design{std::nan(""), std::nan(""), std::nan(""), std::nan("")};

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "run configuration (JSON)");
    if (config_required) opt->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* doublet = app.add_subcommand("doublet", "resonance doublet of the coupled cavities");
  auto* design_cmd = app.add_subcommand("design", "SRM transmission for a target splitting");
  auto* nsd = app.add_subcommand("nsd", "quantum noise spectral density");
  auto* compare = app.add_subcommand("compare", "TSR vs detuned SR (upper and lower sideband)");
  add_common(doublet, true);
  add_common(design_cmd, false);
  add_common(nsd, true);
  add_common(compare, true);
  design_cmd->add_option("--fsp", design.fsp_hz, "splitting f_sp in Hz");
  design_cmd->add_option("--l1", design.l1, "TSRM-SRM length in m");
  design_cmd->add_option("--l2", design.l2, "SRM-Michelson length in m");
  design_cmd->add_option("--rho-end", design.rho_end, "end-mirror amplitude reflectivity");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    Destination dest{config.output.path, config.output.format};
    if (!out_path.empty()) dest.path = out_path;
    if (!format.empty()) dest.format = parse_output_format(format);

    Table table;
    if (doublet->parsed()) {
      table = cmd_doublet(config);
    } else if (design_cmd->parsed()) {
      const auto& topo = config.topology;
      if (std::isnan(design.fsp_hz)) design.fsp_hz = topo.splitting_hz;
      if (std::isnan(design.l1)) design.l1 = topo.l1;
      if (std::isnan(design.l2)) design.l2 = topo.l2;
      if (std::isnan(design.rho_end)) design.rho_end = config.interferometer.michelson.rho();
      table = cmd_design(design, config, err);
    } else if (nsd->parsed()) {
      table = cmd_nsd(config);
    } else {
      table = cmd_compare(config);
    }
    emit(table, dest, out);
    if (!dest.path.empty()) {
      report(table, err);
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NoRootInBracket& e) {
    err << "no solution: " << e.what()
        << "\n  (the splitting must stay below a quarter of the free spectral range of the longer cavity)\n";
    return kNumericalFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace tsr::cli
