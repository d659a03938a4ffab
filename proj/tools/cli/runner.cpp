#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "fuse/units.hpp"

namespace fuse::cli {

namespace {

double dbm(double watts) { return watts_to_dbm(watts); }

Table static_table(const RunConfig& cfg, const Physics& physics) {
  Table t{"attack",
          {"wavelength_nm", "detuning_pm", "onchip_dbm", "tx_dbm", "atten_db", "shift_pm", "converged"},
          {},
          {}};
  for (double p_dbm : cfg.scenario.powers_dbm) {
    const auto r = attack::run_static(
        attack::AttackScenario::forward(cfg.scenario.wavelength_m, dbm_to_watts(p_dbm)), cfg.source,
        physics);
    t.rows.push_back({r.wavelength_m / kNano, r.detuning_pm, p_dbm, dbm(r.attack_power_at_tx_w),
                      r.signal_attenuation_db, r.pr_shift_pm, r.converged ? 1.0 : 0.0});
    if (!r.note.empty() && t.notes.empty()) t.notes.push_back(r.note);
  }
  return t;
}

Table sweep_table(const RunConfig& cfg, const Physics& physics) {
  Table t{"attack",
          {"wavelength_nm", "detuning_pm", "onchip_dbm", "tx_dbm", "atten_db", "shift_pm", "converged"},
          {},
          {}};
  for (const auto& r : attack::wavelength_sweep(cfg.scenario.sweep, cfg.source, physics)) {
    t.rows.push_back({r.wavelength_m / kNano, r.detuning_pm, dbm(r.on_chip_attack_power_w),
                      dbm(r.attack_power_at_tx_w), r.signal_attenuation_db, r.pr_shift_pm,
                      r.converged ? 1.0 : 0.0});
    if (!r.converged) t.notes.push_back("detuning " + std::to_string(r.detuning_pm) + " pm: " + r.note);
  }
  return t;
}

Table timeseries_table(const RunConfig& cfg, const Physics& physics) {
  Table t{"timeseries", {"t_s", "onchip_dbm", "transmission", "atten_db", "shift_pm"}, {}, {}};
  const auto scenario = attack::AttackScenario::forward(
      cfg.scenario.wavelength_m, dbm_to_watts(cfg.scenario.power_dbm), cfg.scenario.schedule);
  for (const auto& s : attack::run_timeseries(scenario, cfg.source, cfg.pr.dt_s,
                                              cfg.scenario.duration_s, physics)) {
    t.rows.push_back({s.t_s, dbm(s.attack_power_w), s.transmission, -ratio_to_db(s.transmission),
                      pr::shift_to_pm(s.shift, physics.resonator)});
  }
  return t;
}

Table skr_table(const RunConfig& cfg, const Physics& physics, std::vector<double> distances) {
  Table t{"skr",
          {"distance_km", "attack_dbm", "atten_db", "skr_per_pulse", "skr_bps", "qber_mu", "skr_ratio"},
          {},
          {}};
  const qkd::ChannelModel channel = build_channel(cfg);
  std::vector<double> powers;
  for (double p : cfg.scenario.powers_dbm) powers.push_back(dbm_to_watts(p));
  const auto points =
      qkd::skr_vs_distance(distances, powers, cfg.source, physics, channel, cfg.qkd.decoy);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    t.rows.push_back({pt.distance_km, cfg.scenario.powers_dbm[i % powers.size()], pt.attenuation_db,
                      pt.report.skr_per_pulse, pt.report.skr_bps, pt.report.qber, pt.ratio});
  }
  return t;
}

Table spectrum_table(const RunConfig& cfg, const Physics& physics) {
  Table t{"spectrum", {"onchip_dbm", "shift_pm", "wavelength_nm", "frequency_hz", "drop", "through"}, {}, {}};
  const long n = std::lround(cfg.scenario.span_m / cfg.scenario.step_m);
  std::vector<double> wavelengths;
  std::vector<double> grid;
  for (long i = 0; i <= n; ++i) {
    const double lambda = cfg.scenario.center_m - 0.5 * cfg.scenario.span_m +
                          static_cast<double>(i) * cfg.scenario.step_m;
    wavelengths.push_back(lambda);
    grid.push_back(wavelength_to_frequency(lambda));
  }
  // Cold cavity first, then one trace per resonant attack power.
  std::vector<std::pair<double, double>> traces{{-INFINITY, 0.0}};
  const double attack_m = frequency_to_wavelength(physics.resonator.geometry.base_resonance_hz);
  for (double p_dbm : cfg.scenario.powers_dbm) {
    const pr::Drive drive{dbm_to_watts(p_dbm), wavelength_to_frequency(attack_m)};
    traces.emplace_back(p_dbm, pr::steady_state(drive, physics.model, physics.resonator, physics.solver).shift);
  }
  for (const auto& [p_dbm, shift] : traces) {
    const auto pts = ring::spectrum(grid, physics.resonator, shift);
    const double shift_pm = pr::shift_to_pm(shift, physics.resonator);
    for (std::size_t i = 0; i < pts.size(); ++i)
      t.rows.push_back({p_dbm, shift_pm, wavelengths[i] / kNano, pts[i].frequency_hz, pts[i].drop,
                        pts[i].through});
  }
  return t;
}

}  // namespace

Physics build_physics(const RunConfig& cfg) {
  Physics p;
  p.resonator = make_resonator(cfg.device);
  p.solver.dt = cfg.pr.dt_s;
  if (cfg.pr.model) {
    p.model = *cfg.pr.model;
  } else {
    const auto anchors = cfg.pr.anchors_file ? pr::load_anchors_csv(*cfg.pr.anchors_file)
                                             : pr::default_anchors();
    p.model = pr::calibrate(anchors, p.resonator).model;
  }
  return p;
}

qkd::ChannelModel build_channel(const RunConfig& cfg) {
  if (!cfg.qkd.calibrate) return cfg.qkd.channel;
  return qkd::calibrate_channel(cfg.qkd.targets, cfg.qkd.channel, cfg.qkd.decoy);
}

Table simulate(const RunConfig& cfg) {
  const Physics physics = build_physics(cfg);
  switch (cfg.scenario.kind) {
    case ScenarioKind::static_power: return static_table(cfg, physics);
    case ScenarioKind::sweep: return sweep_table(cfg, physics);
    case ScenarioKind::timeseries: return timeseries_table(cfg, physics);
    case ScenarioKind::skr_power: return skr_table(cfg, physics, {cfg.qkd.channel.length_km});
    case ScenarioKind::skr_distance: return skr_table(cfg, physics, cfg.scenario.distances_km);
    case ScenarioKind::spectrum: return spectrum_table(cfg, physics);
  }
  throw ValidationError("unhandled scenario kind");
}

std::string render_csv(const Table& table) {
  std::string out = "# schema: " + table.schema + " v" + std::to_string(kCsvSchemaVersion) + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof buf, "%.16e", row[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::filesystem::filesystem_error("cannot open for writing", tmp,
                                                      std::make_error_code(std::errc::io_error));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::filesystem::filesystem_error("write failed", tmp,
                                                      std::make_error_code(std::errc::io_error));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fuse::cli
