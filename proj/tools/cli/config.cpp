#include "config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "fuse/units.hpp"

namespace fuse::cli {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream out;
  out << issues.size() << " configuration error(s)";
  for (const auto& i : issues) out << "\n  " << i.path << ": " << i.message;
  return out.str();
}

// Key suffix -> unit a quoted value must carry. Longest suffix first.
constexpr std::array<std::pair<std::string_view, std::string_view>, 10> kUnitSuffixes{{
    {"_db_per_km", "dB/km"},
    {"_dbm", "dBm"},
    {"_ghz", "GHz"},
    {"_hz", "Hz"},
    {"_db", "dB"},
    {"_nm", "nm"},
    {"_pm", "pm"},
    {"_km", "km"},
    {"_mw", "mW"},
    {"_s", "s"},
}};

std::optional<std::string_view> unit_for_key(std::string_view key) {
  for (const auto& [suffix, unit] : kUnitSuffixes)
    if (key.size() > suffix.size() && key.ends_with(suffix)) return unit;
  return std::nullopt;
}

class Section {
 public:
  Section(std::string name, const toml::table* table, std::vector<ConfigIssue>& issues)
      : name_(std::move(name)), table_(table), issues_(issues) {}

  bool present() const { return table_ != nullptr; }
  bool has(std::string_view key) const { return table_ && table_->contains(key); }

  std::string path(std::string_view key) const {
    if (name_.empty() || key.empty()) return name_.empty() ? std::string(key) : name_;
    return name_ + "." + std::string(key);
  }

  void error(std::string_view key, std::string message) const {
    issues_.push_back({path(key), std::move(message)});
  }

  std::optional<double> number(std::string_view key) {
    const toml::node* node = fetch(key);
    if (!node) return std::nullopt;
    return to_number(*node, key);
  }

  std::optional<std::vector<double>> numbers(std::string_view key) {
    const toml::node* node = fetch(key);
    if (!node) return std::nullopt;
    const toml::array* arr = node->as_array();
    if (!arr) {
      error(key, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& item : *arr) {
      auto v = to_number(item, key);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::vector<std::vector<double>>> number_rows(std::string_view key) {
    const toml::node* node = fetch(key);
    if (!node) return std::nullopt;
    const toml::array* arr = node->as_array();
    if (!arr) {
      error(key, "expected an array of [on, off] pairs");
      return std::nullopt;
    }
    std::vector<std::vector<double>> rows;
    for (const auto& item : *arr) {
      const toml::array* row = item.as_array();
      if (!row) {
        error(key, "expected an array of [on, off] pairs");
        return std::nullopt;
      }
      std::vector<double> r;
      for (const auto& x : *row) {
        auto v = to_number(x, key);
        if (!v) return std::nullopt;
        r.push_back(*v);
      }
      rows.push_back(std::move(r));
    }
    return rows;
  }

  std::optional<std::string> string(std::string_view key) {
    const toml::node* node = fetch(key);
    if (!node) return std::nullopt;
    if (auto s = node->value<std::string>()) return s;
    error(key, "expected a string");
    return std::nullopt;
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* node = fetch(key);
    if (!node) return std::nullopt;
    if (auto b = node->value<bool>()) return b;
    error(key, "expected true or false");
    return std::nullopt;
  }

  void mark(std::string_view key) { seen_.insert(std::string(key)); }
  const toml::node* raw(std::string_view key) { return fetch(key); }

  void reject_unknown() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_)
      if (!seen_.contains(std::string(k.str()))) error(k.str(), "unknown key");
  }

 private:
  const toml::node* fetch(std::string_view key) {
    mark(key);
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<double> to_number(const toml::node& node, std::string_view key) const {
    if (node.is_integer() || node.is_floating_point()) return node.value<double>();
    const auto unit = unit_for_key(key);
    if (auto s = node.value<std::string>()) {
      if (!unit) {
        error(key, "expected a number");
        return std::nullopt;
      }
      std::istringstream in(*s);
      double v = 0.0;
      std::string given;
      in >> v;
      if (!in) {
        error(key, "cannot read a number from \"" + *s + "\"");
        return std::nullopt;
      }
      in >> given;
      std::string rest;
      if (given.empty() || (in >> rest)) {
        error(key, "expected \"<number> " + std::string(*unit) + "\", got \"" + *s + "\"");
        return std::nullopt;
      }
      if (given != *unit) {
        error(key, "unit mismatch: expected " + std::string(*unit) + ", got " + given);
        return std::nullopt;
      }
      return v;
    }
    error(key, "expected a number");
    return std::nullopt;
  }

  std::string name_;
  const toml::table* table_;
  std::vector<ConfigIssue>& issues_;
  std::set<std::string> seen_;
};

const toml::table* subtable(const toml::table& root, std::string_view name,
                            std::vector<ConfigIssue>& issues) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (const toml::table* t = node->as_table()) return t;
  issues.push_back({std::string(name), "expected a [" + std::string(name) + "] section"});
  return nullptr;
}

// Either an explicit list under `list_key` or a start/stop/step triple.
std::vector<double> read_grid(Section& s, std::string_view list_key, std::string_view stem,
                              std::string_view unit, std::string_view step_unit, bool required) {
  const std::string start_key = std::string(stem) + "_start_" + std::string(unit);
  const std::string stop_key = std::string(stem) + "_stop_" + std::string(unit);
  const std::string step_key = std::string(stem) + "_step_" + std::string(step_unit);
  auto list = s.numbers(list_key);
  auto start = s.number(start_key);
  auto stop = s.number(stop_key);
  auto step = s.number(step_key);
  const bool any_range = start || stop || step;
  if (list && any_range) {
    s.error(list_key, "conflicts with " + start_key + "/" + stop_key + "/" + step_key);
    return {};
  }
  if (list) {
    if (list->empty() && required) s.error(list_key, "must not be empty");
    return *list;
  }
  if (any_range) {
    if (!start || !stop || !step) {
      s.error(start_key, "a range needs all of " + start_key + ", " + stop_key + ", " + step_key);
      return {};
    }
    try {
      return inclusive_range(*start, *stop, *step);
    } catch (const ValidationError& e) {
      s.error(step_key, e.what());
      return {};
    }
  }
  if (required) s.error(list_key, "missing (give a list or a " + start_key + " range)");
  return {};
}

void read_device(Section s, RunConfig& cfg) {
  DeviceSpec& d = cfg.device;
  if (auto v = s.number("q_loaded")) d.q_loaded = *v;
  if (auto v = s.number("fsr_ghz")) d.nominal_fsr_hz = *v * kGiga;
  if (auto v = s.number("attack_resonance_nm")) d.attack_resonance_m = *v * kNano;
  if (auto v = s.number("signal_wavelength_nm")) d.signal_wavelength_m = *v * kNano;
  if (const toml::node* split = s.raw("split")) {
    if (split->value<std::string>() == "equal_thirds") {
      d.split = ring::SplitPolicy::equal_thirds();
    } else if (auto f = s.numbers("split"); f && f->size() == 3) {
      try {
        d.split = ring::SplitPolicy::custom((*f)[0], (*f)[1], (*f)[2]);
      } catch (const std::exception& e) {
        s.error("split", e.what());
      }
    } else if (!split->is_array()) {
      s.error("split", "expected \"equal_thirds\" or [intrinsic, upper, lower] fractions");
    } else if (f) {
      s.error("split", "expected three fractions");
    }
  }
  s.reject_unknown();
  try {
    (void)make_resonator(d);
  } catch (const std::exception& e) {
    s.error("", std::string("invalid device: ") + e.what());
  }
}

void read_pr(Section s, RunConfig& cfg, const std::filesystem::path& base_dir) {
  PrConfig& p = cfg.pr;
  if (auto v = s.number("dt_s")) {
    if (*v > 0.0)
      p.dt_s = *v;
    else
      s.error("dt_s", "must be positive");
  }
  if (auto file = s.string("anchors_file")) {
    std::filesystem::path path = *file;
    if (path.is_relative()) path = base_dir / path;
    if (!std::filesystem::exists(path))
      s.error("anchors_file", "file not found: " + path.string());
    else
      p.anchors_file = path;
  }
  constexpr std::array<std::string_view, 5> kModelKeys{"max_shift_ghz", "reference_power_mw",
                                                       "exponent", "rise_time_s", "fall_time_s"};
  std::array<std::optional<double>, 5> m;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.number(kModelKeys[i]);
  const auto given = std::count_if(m.begin(), m.end(), [](const auto& x) { return x.has_value(); });
  if (given > 0 && s.has("anchors_file")) {
    s.error("anchors_file", "conflicts with an explicit model (max_shift_ghz, ...)");
  } else if (given > 0 && given < 5) {
    for (std::size_t i = 0; i < m.size(); ++i)
      if (!m[i]) s.error(kModelKeys[i], "missing; an explicit model needs all five parameters");
  } else if (given == 5) {
    try {
      p.model = pr::PrModel::make(hz_to_rad_s(*m[0] * kGiga), *m[1] * 1e-3, *m[2], *m[3], *m[4]);
    } catch (const std::exception& e) {
      s.error("", std::string("invalid model: ") + e.what());
    }
  }
  s.reject_unknown();
}

void read_source(Section s, RunConfig& cfg) {
  auto name = s.string("preset");
  auto shape = s.string("shape");
  auto center = s.number("center_nm");
  auto fwhm = s.number("fwhm_ghz");
  auto power = s.number("power_mw");
  const bool explicit_keys = shape || center || fwhm || power;
  if (name && explicit_keys) {
    s.error("preset", "conflicts with explicit source keys (shape, center_nm, fwhm_ghz, power_mw)");
  } else if (name) {
    try {
      cfg.source = source::preset(*name);
    } catch (const std::exception& e) {
      s.error("preset", e.what());
    }
  } else if (explicit_keys) {
    source::Shape sh = source::Shape::delta;
    if (!shape)
      s.error("shape", "missing (delta, gaussian or lorentzian)");
    else if (*shape == "gaussian")
      sh = source::Shape::gaussian;
    else if (*shape == "lorentzian")
      sh = source::Shape::lorentzian;
    else if (*shape != "delta")
      s.error("shape", "expected delta, gaussian or lorentzian");
    try {
      const double c = center ? wavelength_to_frequency(*center * kNano)
                              : wavelength_to_frequency(cfg.device.signal_wavelength_m);
      cfg.source = source::SourceSpectrum::make(c, fwhm.value_or(0.0) * kGiga, sh,
                                                power.value_or(5e-4) * 1e-3);
    } catch (const std::exception& e) {
      s.error("", std::string("invalid source: ") + e.what());
    }
  }
  s.reject_unknown();
}

void read_qkd(Section s, RunConfig& cfg) {
  QkdConfig& q = cfg.qkd;
  qkd::ChannelModel& ch = q.channel;
  if (auto v = s.number("length_km")) ch.length_km = *v;
  if (auto v = s.number("fiber_loss_db_per_km")) ch.fiber_loss_db_per_km = *v;
  if (auto v = s.number("extra_loss_db")) ch.extra_loss_db = *v;
  if (auto v = s.number("ec_efficiency")) ch.ec_efficiency = *v;
  if (auto v = s.number("sifting")) ch.sifting = *v;
  if (auto v = s.number("rep_rate_hz")) ch.rep_rate_hz = *v;
  auto eff = s.number("detector_efficiency");
  auto dark = s.number("dark_count_prob");
  auto e_d = s.number("misalignment_error");
  if (eff) ch.detector_efficiency = *eff;
  if (dark) ch.dark_count_prob = *dark;
  if (e_d) ch.misalignment_error = *e_d;

  qkd::DecoyParams& dp = q.decoy;
  if (auto v = s.number("mu")) dp.mu = *v;
  if (auto v = s.number("nu")) dp.nu = *v;
  if (auto v = s.number("vacuum")) dp.vacuum = *v;
  if (auto v = s.number("p_mu")) dp.p_mu = *v;
  if (auto v = s.number("p_nu")) dp.p_nu = *v;
  if (auto v = s.number("p_vacuum")) dp.p_vacuum = *v;

  if (auto v = s.boolean("calibrate")) q.calibrate = *v;
  if (auto v = s.number("target_sifted_rate")) q.targets.sifted_rate_per_pulse = *v;
  if (auto v = s.number("target_qber")) q.targets.qber = *v;
  auto sup_loss = s.number("target_suppression_loss_db");
  auto sup_ratio = s.number("target_suppression_ratio");
  if (sup_loss.has_value() != sup_ratio.has_value()) {
    s.error(sup_loss ? "target_suppression_ratio" : "target_suppression_loss_db",
            "the suppression anchor needs both target_suppression_loss_db and target_suppression_ratio");
  } else if (sup_loss) {
    q.targets.suppression = qkd::SuppressionAnchor{*sup_loss, *sup_ratio};
  }
  if (auto v = s.boolean("dark_count_from_suppression"); v && !*v) q.targets.suppression.reset();

  if (q.calibrate) {
    if (eff) s.error("detector_efficiency", "is solved by calibration; set calibrate = false to fix it");
    if (e_d) s.error("misalignment_error", "is solved by calibration; set calibrate = false to fix it");
    if (dark && q.targets.suppression)
      s.error("dark_count_prob",
              "is solved from the suppression anchor; set dark_count_from_suppression = false");
  }
  s.reject_unknown();
  try {
    ch.validate();
  } catch (const std::exception& e) {
    s.error("", e.what());
  }
  try {
    dp.validate();
  } catch (const std::exception& e) {
    s.error("", e.what());
  }
}

std::optional<ScenarioKind> parse_kind(std::string_view s) {
  static const std::map<std::string_view, ScenarioKind> kinds{
      {"static", ScenarioKind::static_power},   {"sweep", ScenarioKind::sweep},
      {"timeseries", ScenarioKind::timeseries}, {"skr-power", ScenarioKind::skr_power},
      {"skr-distance", ScenarioKind::skr_distance}, {"spectrum", ScenarioKind::spectrum}};
  auto it = kinds.find(s);
  if (it == kinds.end()) return std::nullopt;
  return it->second;
}

void read_scenario(Section s, RunConfig& cfg) {
  ScenarioConfig& sc = cfg.scenario;
  if (!s.present()) {
    s.error("", "missing [scenario] section (exactly one scenario is required)");
    return;
  }
  auto kind_name = s.string("kind");
  if (!kind_name) {
    if (!s.has("kind"))
      s.error("kind", "missing (static, sweep, timeseries, skr-power, skr-distance or spectrum)");
    return;
  }
  auto kind = parse_kind(*kind_name);
  if (!kind) {
    s.error("kind", "unknown scenario kind \"" + *kind_name + "\"");
    return;
  }
  sc.kind = *kind;

  switch (sc.kind) {
    case ScenarioKind::static_power:
      if (auto v = s.number("wavelength_nm")) sc.wavelength_m = *v * kNano;
      sc.powers_dbm = read_grid(s, "powers_dbm", "power", "dbm", "db", true);
      break;
    case ScenarioKind::sweep: {
      if (auto v = s.number("center_nm")) sc.sweep.center_wavelength_m = *v * kNano;
      if (auto v = s.number("span_pm")) sc.sweep.span_m = *v * kPico;
      if (auto v = s.number("step_pm")) sc.sweep.step_m = *v * kPico;
      if (auto v = s.number("tx_dbm")) sc.sweep.target_tx_power_w = dbm_to_watts(*v);
      try {
        sc.sweep.validate();
      } catch (const std::exception& e) {
        s.error("", e.what());
      }
      break;
    }
    case ScenarioKind::timeseries: {
      if (auto v = s.number("wavelength_nm")) sc.wavelength_m = *v * kNano;
      if (auto v = s.number("power_dbm"))
        sc.power_dbm = *v;
      else if (!s.has("power_dbm"))
        s.error("power_dbm", "missing");
      if (auto v = s.number("duration_s"))
        sc.duration_s = *v;
      else if (!s.has("duration_s"))
        s.error("duration_s", "missing");
      if (auto rows = s.number_rows("schedule_s")) {
        for (const auto& r : *rows) {
          if (r.size() != 2) {
            s.error("schedule_s", "each interval is [on, off]");
            break;
          }
          sc.schedule.push_back({r[0], r[1]});
        }
      } else if (!s.has("schedule_s")) {
        s.error("schedule_s", "missing");
      }
      try {
        (void)attack::AttackScenario::forward(sc.wavelength_m, dbm_to_watts(sc.power_dbm), sc.schedule);
        if (!sc.schedule.empty() && sc.schedule.back().off_s > sc.duration_s)
          s.error("duration_s", "does not cover the attack schedule");
      } catch (const std::exception& e) {
        s.error("schedule_s", e.what());
      }
      break;
    }
    case ScenarioKind::skr_power:
      sc.powers_dbm = read_grid(s, "powers_dbm", "power", "dbm", "db", true);
      break;
    case ScenarioKind::skr_distance:
      sc.powers_dbm = read_grid(s, "powers_dbm", "power", "dbm", "db", true);
      sc.distances_km = read_grid(s, "distances_km", "distance", "km", "km", true);
      if (std::any_of(sc.distances_km.begin(), sc.distances_km.end(), [](double d) { return d < 0.0; }))
        s.error("distances_km", "distances must be non-negative");
      break;
    case ScenarioKind::spectrum: {
      auto center = s.number("center_nm");
      auto span = s.number("span_pm");
      auto step = s.number("step_pm");
      if (center) sc.center_m = *center * kNano;
      if (!span || !(*span > 0.0))
        s.error("span_pm", "missing or not positive");
      else
        sc.span_m = *span * kPico;
      if (!step || !(*step > 0.0))
        s.error("step_pm", "missing or not positive");
      else
        sc.step_m = *step * kPico;
      sc.powers_dbm = read_grid(s, "powers_dbm", "power", "dbm", "db", false);
      break;
    }
  }
  s.reject_unknown();
}

void read_output(Section s, RunConfig& cfg) {
  if (auto v = s.string("dir")) cfg.output.dir = *v;
  if (auto v = s.string("file")) {
    if (v->empty() || v->find('/') != std::string::npos)
      s.error("file", "must be a plain file name");
    else
      cfg.output.file = *v;
  }
  s.reject_unknown();
}

// Section-wise overlay of `top` onto `base`.
toml::table overlay(toml::table base, const toml::table& top) {
  for (const auto& [k, v] : top) {
    toml::table* dst = base[k].as_table();
    const toml::table* src = v.as_table();
    if (dst && src) {
      for (const auto& [sk, sv] : *src) dst->insert_or_assign(sk, sv);
    } else {
      base.insert_or_assign(k, v);
    }
  }
  return base;
}

toml::table parse_table(std::string_view text, std::string_view source_name) {
  try {
    return toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream where;
    where << e.source().begin.line << ":" << e.source().begin.column;
    throw ConfigError(std::vector<ConfigIssue>{{std::string(source_name) + ":" + where.str(), std::string(e.description())}});
  }
}

RunConfig build(const toml::table& root, const std::filesystem::path& base_dir) {
  std::vector<ConfigIssue> issues;
  RunConfig cfg;
  Section top("", &root, issues);
  if (auto n = top.string("name")) cfg.name = *n;
  for (std::string_view sec : {"device", "pr", "source", "qkd", "scenario", "output"}) top.mark(sec);
  top.mark("preset");
  top.reject_unknown();

  read_device(Section("device", subtable(root, "device", issues), issues), cfg);
  read_pr(Section("pr", subtable(root, "pr", issues), issues), cfg, base_dir);
  read_source(Section("source", subtable(root, "source", issues), issues), cfg);
  read_qkd(Section("qkd", subtable(root, "qkd", issues), issues), cfg);
  const toml::table* scen = subtable(root, "scenario", issues);
  if (!scen && !root.contains("scenario"))
    issues.push_back({"scenario", "missing [scenario] section (exactly one scenario is required)"});
  else if (scen)
    read_scenario(Section("scenario", scen, issues), cfg);
  read_output(Section("output", subtable(root, "output", issues), issues), cfg);

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

// Built-in presets, one per reproduced figure panel.
const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"fig2b", R"(name = "fig2b"
[scenario]
kind = "spectrum"
center_nm = 1549.486
span_pm = 4000
step_pm = 1
)"},
      {"fig3a", R"(name = "fig3a"
[scenario]
kind = "spectrum"
center_nm = 1548.292
span_pm = 200
step_pm = 0.5
powers_dbm = [-20, -10, -5, 0, 5, 10]
)"},
      {"fig3b", R"(name = "fig3b"
[source]
preset = "cw_signal_1550_68"
[scenario]
kind = "static"
wavelength_nm = 1548.292
power_start_dbm = -35
power_stop_dbm = 10
power_step_db = 1
)"},
      {"fig3c", R"(name = "fig3c"
[source]
preset = "cw_signal_1550_68"
[scenario]
kind = "timeseries"
wavelength_nm = 1548.292
power_dbm = 0
schedule_s = [[5, 65]]
duration_s = 80
)"},
      {"fig3d", R"(name = "fig3d"
[source]
preset = "cw_signal_1550_68"
[scenario]
kind = "static"
wavelength_nm = 1548.091
power_start_dbm = -35
power_stop_dbm = 10
power_step_db = 1
)"},
      {"fig4b", R"(name = "fig4b"
[source]
preset = "pulsed_signal_10GHz"
[scenario]
kind = "static"
wavelength_nm = 1548.292
power_start_dbm = -35
power_stop_dbm = 10
power_step_db = 1
)"},
      {"fig4c", R"(name = "fig4c"
[source]
preset = "pulsed_signal_10GHz"
[scenario]
kind = "sweep"
center_nm = 1548.292
span_pm = 400
step_pm = 20
tx_dbm = -20
)"},
      {"fig5a", R"(name = "fig5a"
[source]
preset = "pulsed_signal_10GHz"
[qkd]
length_km = 30
[scenario]
kind = "skr-power"
power_start_dbm = -35
power_stop_dbm = 10
power_step_db = 1
)"},
      {"fig5b", R"(name = "fig5b"
[source]
preset = "pulsed_signal_10GHz"
[scenario]
kind = "skr-distance"
powers_dbm = [-20, -10, 0, 10]
distance_start_km = 0
distance_stop_km = 200
distance_step_km = 2
)"},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues)) {}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::static_power: return "static";
    case ScenarioKind::sweep: return "sweep";
    case ScenarioKind::timeseries: return "timeseries";
    case ScenarioKind::skr_power: return "skr-power";
    case ScenarioKind::skr_distance: return "skr-distance";
    case ScenarioKind::spectrum: return "spectrum";
  }
  return "?";
}

std::vector<double> inclusive_range(double start, double stop, double step) {
  if (!(step > 0.0)) throw ValidationError("range step must be positive");
  if (stop < start) throw ValidationError("range stop is below its start");
  const double n = (stop - start) / step;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw ValidationError("range step must divide stop - start");
  std::vector<double> out;
  const long count = std::lround(n);
  out.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : presets()) n.push_back(k);
    return n;
  }();
  return names;
}

std::string_view preset_text(std::string_view name) {
  auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError(std::vector<ConfigIssue>{{"preset", "unknown preset \"" + std::string(name) + "\" (known: " + known + ")"}});
  }
  return it->second;
}

RunConfig preset_config(std::string_view name) {
  return build(parse_table(preset_text(name), name), {});
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       std::string_view source_name) {
  toml::table root = parse_table(text, source_name);
  if (const toml::node* p = root.get("preset")) {
    auto name = p->value<std::string>();
    if (!name) throw ConfigError(std::vector<ConfigIssue>{{"preset", "expected a preset name"}});
    toml::table merged = overlay(parse_table(preset_text(*name), *name), root);
    merged.erase("preset");
    return build(merged, base_dir);
  }
  return build(root, base_dir);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::vector<ConfigIssue>{{path.string(), "cannot read config file"}});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), path.string());
}

}  // namespace fuse::cli
