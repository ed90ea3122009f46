#include "tsr/config.hpp"

#include "tsr/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tsr {

using nlohmann::json;

namespace {

// Cursor over one JSON object that records which keys were consumed so
// leftovers can be reported as unknown fields.
class Section {
 public:
  Section(const json& node, std::string pointer) : node_(node), pointer_(std::move(pointer)) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  std::string path(const std::string& key) const { return pointer_ + "/" + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(key.empty() ? (pointer_.empty() ? "/" : pointer_) : path(key), what);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return number(key);
  }

  double number(const std::string& key) {
    if (!has(key)) fail(key, "required field is missing");
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) {
    if (!has(key)) fail(key, "required section is missing");
    return Section(at(key), path(key));
  }

  // Wraps a library parser so its InvalidArgument carries this field's pointer.
  template <class Fn>
  auto convert(const std::string& key, Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const InvalidArgument& e) {
      fail(key, e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.contains(key)) fail(key, "unknown field");
    }
  }

 private:
  const json& node_;
  std::string pointer_;
  std::set<std::string> used_;
};

MirrorSpec read_mirror(Section& parent, const std::string& key, const MirrorSpec& fallback) {
  if (!parent.has(key)) return fallback;
  Section s(parent.at(key), parent.path(key));
  const bool has_r = s.has("reflectivity");
  const bool has_t = s.has("transmissivity");
  if (!has_r && !has_t) s.fail("", "mirror needs reflectivity and/or transmissivity");
  const double loss = s.number("loss", 0.0);
  const double r = has_r ? s.number("reflectivity") : 1.0 - loss - s.number("transmissivity");
  const double t = has_t ? s.number("transmissivity") : 1.0 - loss - r;
  s.finish();
  return s.convert("", [&] { return MirrorSpec(r, std::max(t, 0.0), loss); });
}

json write_mirror(const MirrorSpec& m) {
  return {{"reflectivity", m.reflectivity()},
          {"transmissivity", m.transmissivity()},
          {"loss", m.loss()}};
}

GridConfig read_grid(Section& parent, const std::string& key, const GridConfig& fallback) {
  if (!parent.has(key)) return fallback;
  Section s(parent.at(key), parent.path(key));
  GridConfig g = fallback;
  g.f_min = s.number("f_min", g.f_min);
  g.f_max = s.number("f_max", g.f_max);
  if (s.has("points")) {
    const json& v = s.at("points");
    if (!v.is_number_integer() || v.get<long long>() < 0) s.fail("points", "expected a non-negative integer");
    g.points = v.get<std::size_t>();
  }
  const std::string spacing = s.string("spacing", sweep::to_string(g.spacing));
  g.spacing = s.convert("spacing", [&] { return sweep::parse_spacing(spacing); });
  s.finish();
  if (!(g.f_min < g.f_max)) s.fail("f_max", "f_min must be below f_max");
  if (g.points < 16) s.fail("points", "need at least 16 points");
  if (g.spacing == sweep::Spacing::Log && !(g.f_min > 0.0)) {
    s.fail("f_min", "logarithmic grid needs f_min > 0");
  }
  return g;
}

json write_grid(const GridConfig& g) {
  return {{"f_min", g.f_min},
          {"f_max", g.f_max},
          {"points", g.points},
          {"spacing", sweep::to_string(g.spacing)}};
}

CouplingDesign parse_design(const std::string& name) {
  if (name == "ideal") return CouplingDesign::Ideal;
  if (name == "equal_lengths") return CouplingDesign::EqualLengths;
  if (name == "general") return CouplingDesign::General;
  throw InvalidArgument(fmt::format("unknown SRM design '{}' (expected ideal|equal_lengths|general)", name));
}

std::string to_string(CouplingDesign d) {
  switch (d) {
    case CouplingDesign::Ideal: return "ideal";
    case CouplingDesign::EqualLengths: return "equal_lengths";
    case CouplingDesign::General: return "general";
  }
  return "ideal";
}

Sideband parse_sideband(const std::string& name) {
  if (name == "upper") return Sideband::Upper;
  if (name == "lower") return Sideband::Lower;
  throw InvalidArgument(fmt::format("unknown sideband '{}' (expected upper|lower)", name));
}

NsdUnits parse_units(const std::string& name) {
  if (name == "phase") return NsdUnits::Phase;
  if (name == "strain") return NsdUnits::Strain;
  throw InvalidArgument(fmt::format("unknown units '{}' (expected phase|strain)", name));
}

// Readout angles may be given as radians or by quadrature name.
double read_angle(Section& s, const std::string& key, double fallback) {
  if (!s.has(key)) return fallback;
  const json& v = s.at(key);
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (name == "amplitude") return 0.0;
    if (name == "phase") return 0.5 * std::numbers::pi;
    s.fail(key, "expected radians, \"amplitude\" or \"phase\"");
  }
  return s.number(key);
}

InterferometerParams read_interferometer(Section& root) {
  InterferometerParams p;
  if (!root.has("interferometer")) return p;
  Section s = root.child("interferometer");
  p.wavelength = s.positive("wavelength", p.wavelength);
  p.power_at_bs = s.positive("power_at_bs", p.power_at_bs);
  p.mirror_mass = s.positive("mirror_mass", p.mirror_mass);
  p.arm_length = s.positive("arm_length", p.arm_length);
  p.michelson = read_mirror(s, "michelson", p.michelson);
  if (s.has("arm_mirror_bounces")) {
    const json& v = s.at("arm_mirror_bounces");
    if (!v.is_array() || v.empty()) s.fail("arm_mirror_bounces", "expected a non-empty array");
    p.arm_mirror_bounces.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long long>() <= 0) {
        throw ConfigError(s.path("arm_mirror_bounces") + "/" + std::to_string(i),
                          "expected a positive integer");
      }
      p.arm_mirror_bounces.push_back(v[i].get<int>());
    }
  }
  s.finish();
  return p;
}

TopologyConfig read_topology(Section& root) {
  TopologyConfig t;
  if (!root.has("topology")) return t;
  Section s = root.child("topology");
  const std::string type = s.string("type", "tsr");
  if (type == "tsr") {
    t.kind = TopologyKind::Tsr;
    t.l1 = s.positive("l1", t.l1);
    t.l2 = s.positive("l2", t.l2);
    t.tsrm = read_mirror(s, "tsrm", t.tsrm);
    if (s.has("srm")) t.srm = read_mirror(s, "srm", MirrorSpec::transparent());
    t.splitting_hz = s.number("splitting_hz", t.splitting_hz);
    if (t.splitting_hz < 0.0) s.fail("splitting_hz", "must be non-negative");
    const auto design = s.string("srm_design", to_string(t.srm_design));
    t.srm_design = s.convert("srm_design", [&] { return parse_design(design); });
  } else if (type == "detuned_sr") {
    t.kind = TopologyKind::DetunedSr;
    t.length = s.positive("length", t.length);
    t.recycling_mirror = read_mirror(s, "recycling_mirror", t.recycling_mirror);
    if (s.has("detuning")) {
      const double d = s.number("detuning");
      t.detuning = d;
    }
    t.resonance_hz = s.positive("resonance_hz", t.resonance_hz);
    const auto side = s.string("sideband", "upper");
    t.sideband = s.convert("sideband", [&] { return parse_sideband(side); });
  } else {
    s.fail("type", "expected \"tsr\" or \"detuned_sr\"");
  }
  s.finish();
  return t;
}

json write_topology(const TopologyConfig& t) {
  if (t.kind == TopologyKind::Tsr) {
    json j = {{"type", "tsr"},
              {"l1", t.l1},
              {"l2", t.l2},
              {"tsrm", write_mirror(t.tsrm)},
              {"splitting_hz", t.splitting_hz},
              {"srm_design", to_string(t.srm_design)}};
    if (t.srm) j["srm"] = write_mirror(*t.srm);
    return j;
  }
  json j = {{"type", "detuned_sr"},
            {"length", t.length},
            {"recycling_mirror", write_mirror(t.recycling_mirror)},
            {"resonance_hz", t.resonance_hz},
            {"sideband", t.sideband == Sideband::Upper ? "upper" : "lower"}};
  if (t.detuning) j["detuning"] = *t.detuning;
  return j;
}

CompareConfig read_compare(Section& root) {
  CompareConfig c;
  if (!root.has("compare")) return c;
  Section s = root.child("compare");
  c.sr_mirror = read_mirror(s, "sr_mirror", c.sr_mirror);
  c.resonance_hz = s.positive("resonance_hz", c.resonance_hz);
  const auto design = s.string("srm_design", to_string(c.srm_design));
  c.srm_design = s.convert("srm_design", [&] { return parse_design(design); });
  const auto match = s.string("match", to_string(c.match));
  c.match = s.convert("match", [&] { return parse_match_mode(match); });
  c.sr_readout_angle = read_angle(s, "sr_readout_angle", c.sr_readout_angle);
  s.finish();
  return c;
}

SqueezingConfig read_squeezing(Section& root) {
  SqueezingConfig q;
  if (!root.has("squeezing")) return q;
  Section s = root.child("squeezing");
  q.r = s.number("r", q.r);
  if (q.r < 0.0) s.fail("r", "squeeze parameter must be non-negative");
  q.enabled = s.boolean("enabled", q.r > 0.0);
  if (s.has("angle")) {
    const json& v = s.at("angle");
    if (v.is_string()) {
      if (v.get<std::string>() != "optimal") s.fail("angle", "expected radians or \"optimal\"");
      q.optimal_angle = true;
    } else {
      q.angle = s.number("angle");
    }
  }
  s.finish();
  return q;
}

DoubletConfig read_doublet(Section& root) {
  DoubletConfig d;
  if (!root.has("doublet")) return d;
  Section s = root.child("doublet");
  if (s.has("grid")) {
    Section g(s.at("grid"), s.path("grid"));
    // Doublet grids are offsets around the carrier and may be negative.
    GridConfig grid = d.grid;
    grid.f_min = g.number("f_min", grid.f_min);
    grid.f_max = g.number("f_max", grid.f_max);
    if (g.has("points")) {
      const json& v = g.at("points");
      if (!v.is_number_integer() || v.get<long long>() < 0) g.fail("points", "expected a non-negative integer");
      grid.points = v.get<std::size_t>();
    }
    const auto spacing = g.string("spacing", "linear");
    grid.spacing = g.convert("spacing", [&] { return sweep::parse_spacing(spacing); });
    g.finish();
    if (!(grid.f_min < grid.f_max)) g.fail("f_max", "f_min must be below f_max");
    if (grid.points < 16) g.fail("points", "need at least 16 points");
    if (grid.spacing == sweep::Spacing::Log && !(grid.f_min > 0.0)) {
      g.fail("f_min", "logarithmic grid needs f_min > 0");
    }
    d.grid = grid;
  }
  const auto obs = s.string("observable", to_string(d.observable));
  d.observable = s.convert("observable", [&] { return parse_doublet_observable(obs); });
  s.finish();
  return d;
}

OutputConfig read_output(Section& root) {
  OutputConfig o;
  if (!root.has("output")) return o;
  Section s = root.child("output");
  const auto format = s.string("format", "csv");
  o.format = s.convert("format", [&] { return parse_output_format(format); });
  o.path = s.string("path", "");
  const auto units = s.string("units", "phase");
  o.units = s.convert("units", [&] { return parse_units(units); });
  s.finish();
  return o;
}

std::string line_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

}  // namespace

std::vector<double> GridConfig::make() const { return sweep::make_grid(f_min, f_max, points, spacing); }

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw InvalidArgument(fmt::format("unknown output format '{}' (expected csv|json)", name));
}

std::string to_string(OutputFormat format) { return format == OutputFormat::Csv ? "csv" : "json"; }

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(line_column(json_text, e.byte), "malformed JSON");
  }
  Section root(doc, "");
  RunConfig c;
  if (root.has("schema_version")) {
    const json& v = root.at("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != kConfigSchemaVersion) {
      root.fail("schema_version", fmt::format("unsupported schema version (expected {})", kConfigSchemaVersion));
    }
  }
  c.interferometer = read_interferometer(root);
  c.topology = read_topology(root);
  c.compare = read_compare(root);
  c.squeezing = read_squeezing(root);
  if (root.has("readout")) {
    Section s = root.child("readout");
    c.readout_angle = read_angle(s, "angle", c.readout_angle);
    s.finish();
  }
  c.grid = read_grid(root, "grid", c.grid);
  c.doublet = read_doublet(root);
  c.output = read_output(root);
  root.finish();
  // Normalise so serialisation round-trips exactly.
  c.readout_angle = HomodyneReadout(c.readout_angle).angle();
  c.compare.sr_readout_angle = HomodyneReadout(c.compare.sr_readout_angle).angle();
  if (c.topology.detuning) {
    const double d = *c.topology.detuning;
    if (d <= -std::numbers::pi || d > std::numbers::pi) {
      throw ConfigError("/topology/detuning", "must lie in (-pi, pi]");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("cannot read config '{}'", path.string()));
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  const auto& p = c.interferometer;
  json squeezing = {{"enabled", c.squeezing.enabled}, {"r", c.squeezing.r}};
  if (c.squeezing.optimal_angle) {
    squeezing["angle"] = "optimal";
  } else {
    squeezing["angle"] = c.squeezing.angle;
  }
  const json doc = {
      {"schema_version", c.schema_version},
      {"interferometer",
       {{"wavelength", p.wavelength},
        {"power_at_bs", p.power_at_bs},
        {"mirror_mass", p.mirror_mass},
        {"arm_length", p.arm_length},
        {"michelson", write_mirror(p.michelson)},
        {"arm_mirror_bounces", p.arm_mirror_bounces}}},
      {"topology", write_topology(c.topology)},
      {"compare",
       {{"sr_mirror", write_mirror(c.compare.sr_mirror)},
        {"resonance_hz", c.compare.resonance_hz},
        {"srm_design", to_string(c.compare.srm_design)},
        {"match", to_string(c.compare.match)},
        {"sr_readout_angle", c.compare.sr_readout_angle}}},
      {"squeezing", squeezing},
      {"readout", {{"angle", c.readout_angle}}},
      {"grid", write_grid(c.grid)},
      {"doublet", {{"grid", write_grid(c.doublet.grid)}, {"observable", to_string(c.doublet.observable)}}},
      {"output",
       {{"format", to_string(c.output.format)},
        {"path", c.output.path},
        {"units", c.output.units == NsdUnits::Phase ? "phase" : "strain"}}},
  };
  return doc.dump(2) + "\n";
}

Topology resolve_topology(const RunConfig& c) {
  const auto& t = c.topology;
  if (t.kind == TopologyKind::Tsr) {
    MirrorSpec srm = t.srm ? *t.srm
                           : MirrorSpec::lossless_transmission(design_srm_transmission(
                                 t.splitting_hz, t.l1, t.l2, c.interferometer.michelson, t.srm_design));
    return TwinSR{t.l1, t.l2, srm, t.tsrm};
  }
  if (t.detuning) return DetunedSR{*t.detuning, t.recycling_mirror, t.length};
  return DetunedSR::resonant_sideband(t.resonance_hz, t.sideband, t.recycling_mirror, t.length);
}

ComparisonOptions comparison_options(const RunConfig& c) {
  ComparisonOptions o;
  o.sr_mirror = c.compare.sr_mirror;
  o.resonance_hz = c.compare.resonance_hz;
  o.cavity_length = c.topology.kind == TopologyKind::Tsr ? c.topology.l1 : c.topology.length;
  o.srm_design = c.compare.srm_design;
  o.match = c.compare.match;
  o.optimize_squeeze_angle = c.squeezing.optimal_angle;
  o.sr_readout = HomodyneReadout(c.compare.sr_readout_angle);
  o.tsr_readout = HomodyneReadout(c.readout_angle);
  return o;
}

}  // namespace tsr
