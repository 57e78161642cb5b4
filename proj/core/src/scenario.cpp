#include "xlnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace xlnav {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw std::runtime_error("scenario config: " + where + ": " + msg);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where + "/" + it.key(), "unknown key");
  }
}

double get_num(const json& j, const std::string& where, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) fail(where + "/" + key, "expected a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& where, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) fail(where + "/" + key, "expected a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) fail(where + "/" + key, "expected a string");
  return j[key].get<std::string>();
}

Eigen::Vector3d get_vec3(const json& j, const std::string& where, const char* key,
                         const Eigen::Vector3d& def) {
  if (!j.contains(key)) return def;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
      !a[2].is_number()) {
    fail(where + "/" + key, "expected an array of 3 numbers");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

TwoWayCombiner parse_combiner(const std::string& s, const std::string& where) {
  if (s == "rss") return TwoWayCombiner::rss;
  if (s == "quadratic_mean") return TwoWayCombiner::quadratic_mean;
  fail(where, "expected 'rss' or 'quadratic_mean'");
}

void parse_srp(const json& j, const std::string& where, SrpConfig& srp) {
  check_keys(j, where, {"area_m2", "reflectivity", "mass_kg"});
  srp.area_m2 = get_num(j, where, "area_m2", srp.area_m2);
  srp.reflectivity = get_num(j, where, "reflectivity", srp.reflectivity);
  srp.mass_kg = get_num(j, where, "mass_kg", srp.mass_kg);
}

void parse_spacecraft(const json& j, const std::string& where, SpacecraftConfig& sc) {
  check_keys(j, where, {"position", "velocity", "elements_mci", "srp"});
  sc.initial_state.epoch = 0.0;
  sc.initial_state.pos = get_vec3(j, where, "position", sc.initial_state.pos);
  sc.initial_state.vel = get_vec3(j, where, "velocity", sc.initial_state.vel);
  if (j.contains("elements_mci")) {
    const json& e = j["elements_mci"];
    const std::string ew = where + "/elements_mci";
    check_keys(e, ew, {"sma_km", "ecc", "inc_deg", "raan_deg", "argp_deg",
                       "true_anomaly_deg", "central_gm"});
    KeplerianElements k;
    k.sma_km = get_num(e, ew, "sma_km", 0.0);
    k.ecc = get_num(e, ew, "ecc", 0.0);
    k.inc_deg = get_num(e, ew, "inc_deg", 0.0);
    k.raan_deg = get_num(e, ew, "raan_deg", 0.0);
    k.argp_deg = get_num(e, ew, "argp_deg", 0.0);
    k.true_anomaly_deg = get_num(e, ew, "true_anomaly_deg", 0.0);
    k.central_gm = get_num(e, ew, "central_gm", constants::gm_moon);
    sc.initial_elements_mci = k;
  }
  if (j.contains("srp")) parse_srp(j["srp"], where + "/srp", sc.srp);
}

}  // namespace

double ScenarioConfig::measurement_sigma() const {
  switch (measurement) {
    case MeasurementType::pn_range:
      return link.pn_two_way_sigma_m() / 1000.0;  // km
    case MeasurementType::time_derived_range:
      return link.td_two_way_sigma_m() / 1000.0;  // km
    case MeasurementType::range_rate:
      return link.range_rate_sigma_mm_s * 1e-6;  // km/s
  }
  throw std::logic_error("measurement_sigma: unknown measurement type");
}

IntegratorConfig ScenarioConfig::integrator_nd() const {
  IntegratorConfig c = integrator;
  c.max_step = max_step_s / crtbp.time_unit_s();
  c.fixed_step = fixed_step_s / crtbp.time_unit_s();
  return c;
}

IntegratorConfig ScenarioConfig::integrator_s() const {
  IntegratorConfig c = integrator;
  c.max_step = max_step_s;
  c.fixed_step = fixed_step_s;
  return c;
}

void ScenarioConfig::validate() const {
  crtbp.validate();
  integrator.validate();
  if (!(duration_days > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(cadence_s > 0.0)) throw std::invalid_argument("scenario: cadence_s must be positive");
  if (montecarlo.runs < 1) throw std::invalid_argument("scenario: runs must be >= 1");
  if (bias_truth_m < 0.0) throw std::invalid_argument("scenario: bias_truth_m must be >= 0");
  if (!(filter.process_noise_sigma >= 0.0)) {
    throw std::invalid_argument("scenario: process_noise_sigma must be >= 0");
  }
  if (!(measurement_sigma() > 0.0)) {
    throw std::invalid_argument("scenario: measurement sigma must be positive");
  }
  sc1.srp.validate();
  sc2.srp.validate();
  if (nbody.ephemeris_provider != "analytic" && nbody.ephemeris_provider != "csv") {
    throw std::invalid_argument("scenario: ephemeris_provider must be 'analytic' or 'csv'");
  }
  if (nbody.ephemeris_provider == "csv" && nbody.ephemeris_csv_path.empty()) {
    throw std::invalid_argument("scenario: csv provider requires ephemeris_csv_path");
  }
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.sc1.name = "halo_orbiter";
  cfg.sc1.initial_state =
      RotatingState{0.0, {1.1473302, 0.0, -0.15142308}, {0.0, -0.21994554, 0.0}};
  cfg.sc1.srp = SrpConfig{0.41, 1.08, 22.0};

  cfg.sc2.name = "lunar_orbiter";
  cfg.sc2.initial_state = RotatingState{
      0.0, {0.98512134, 0.00147649, 0.00492546}, {-0.87329730, -1.61190048, 0.0}};
  cfg.sc2.srp = SrpConfig{3.0, 1.8, 280.0};
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + e.what());
  }

  ScenarioConfig cfg = default_scenario();
  check_keys(j, path, {"dynamics", "spacecraft", "link", "filter", "montecarlo"});

  if (j.contains("dynamics")) {
    const json& d = j["dynamics"];
    const std::string dw = path + "/dynamics";
    check_keys(d, dw, {"model", "duration_days", "crtbp", "integrator", "nbody"});
    const std::string model = get_str(d, dw, "model", "crtbp");
    if (model == "crtbp") {
      cfg.dynamics = DynamicsModel::crtbp;
    } else if (model == "nbody") {
      cfg.dynamics = DynamicsModel::nbody;
    } else {
      fail(dw + "/model", "expected 'crtbp' or 'nbody'");
    }
    cfg.duration_days = get_num(d, dw, "duration_days", cfg.duration_days);
    if (d.contains("crtbp")) {
      const json& c = d["crtbp"];
      const std::string cw = dw + "/crtbp";
      check_keys(c, cw, {"mu", "t_star_days", "l_star_km"});
      cfg.crtbp.mu = get_num(c, cw, "mu", cfg.crtbp.mu);
      cfg.crtbp.t_star_days = get_num(c, cw, "t_star_days", cfg.crtbp.t_star_days);
      cfg.crtbp.l_star_km = get_num(c, cw, "l_star_km", cfg.crtbp.l_star_km);
    }
    if (d.contains("integrator")) {
      const json& i = d["integrator"];
      const std::string iw = dw + "/integrator";
      check_keys(i, iw, {"method", "rel_tol", "abs_tol", "max_step_s", "fixed_step_s"});
      const std::string method = get_str(i, iw, "method", "adaptive");
      if (method == "adaptive") {
        cfg.integrator.method = StepMethod::adaptive_rk45;
      } else if (method == "fixed") {
        cfg.integrator.method = StepMethod::fixed_rk4;
      } else {
        fail(iw + "/method", "expected 'adaptive' or 'fixed'");
      }
      cfg.integrator.rel_tol = get_num(i, iw, "rel_tol", cfg.integrator.rel_tol);
      cfg.integrator.abs_tol = get_num(i, iw, "abs_tol", cfg.integrator.abs_tol);
      cfg.max_step_s = get_num(i, iw, "max_step_s", cfg.max_step_s);
      cfg.fixed_step_s = get_num(i, iw, "fixed_step_s", cfg.fixed_step_s);
    }
    if (d.contains("nbody")) {
      const json& n = d["nbody"];
      const std::string nw = dw + "/nbody";
      check_keys(n, nw,
                 {"gm_earth", "gm_moon", "gm_sun", "enable_sun", "enable_srp",
                  "ephemeris_provider", "ephemeris_csv_path", "moon_eccentricity",
                  "sun_initial_longitude_deg", "epoch_utc"});
      if (n.contains("gm_earth")) cfg.nbody.gm_earth = get_num(n, nw, "gm_earth", 0.0);
      if (n.contains("gm_moon")) cfg.nbody.gm_moon = get_num(n, nw, "gm_moon", 0.0);
      cfg.nbody.gm_sun = get_num(n, nw, "gm_sun", cfg.nbody.gm_sun);
      cfg.nbody.enable_sun = get_bool(n, nw, "enable_sun", cfg.nbody.enable_sun);
      cfg.nbody.enable_srp = get_bool(n, nw, "enable_srp", cfg.nbody.enable_srp);
      cfg.nbody.ephemeris_provider =
          get_str(n, nw, "ephemeris_provider", cfg.nbody.ephemeris_provider);
      cfg.nbody.ephemeris_csv_path =
          get_str(n, nw, "ephemeris_csv_path", cfg.nbody.ephemeris_csv_path);
      cfg.nbody.moon_eccentricity =
          get_num(n, nw, "moon_eccentricity", cfg.nbody.moon_eccentricity);
      cfg.nbody.sun_initial_longitude_deg =
          get_num(n, nw, "sun_initial_longitude_deg", cfg.nbody.sun_initial_longitude_deg);
      cfg.nbody.epoch_utc = get_str(n, nw, "epoch_utc", cfg.nbody.epoch_utc);
    }
  }

  if (j.contains("spacecraft")) {
    const json& s = j["spacecraft"];
    const std::string sw = path + "/spacecraft";
    check_keys(s, sw, {"halo_orbiter", "lunar_orbiter"});
    if (s.contains("halo_orbiter")) {
      parse_spacecraft(s["halo_orbiter"], sw + "/halo_orbiter", cfg.sc1);
    }
    if (s.contains("lunar_orbiter")) {
      parse_spacecraft(s["lunar_orbiter"], sw + "/lunar_orbiter", cfg.sc2);
    }
  }

  if (j.contains("link")) {
    const json& l = j["link"];
    const std::string lw = path + "/link";
    check_keys(l, lw, {"measurement", "cadence_s", "bias_truth_m", "pn", "time_derived",
                       "doppler", "range_rate_sigma_mm_s"});
    const std::string meas = get_str(l, lw, "measurement", "pn_range");
    if (meas == "pn_range") {
      cfg.measurement = MeasurementType::pn_range;
    } else if (meas == "time_derived_range") {
      cfg.measurement = MeasurementType::time_derived_range;
    } else if (meas == "range_rate") {
      cfg.measurement = MeasurementType::range_rate;
    } else {
      fail(lw + "/measurement", "expected 'pn_range', 'time_derived_range' or 'range_rate'");
    }
    cfg.cadence_s = get_num(l, lw, "cadence_s", cfg.cadence_s);
    cfg.bias_truth_m = get_num(l, lw, "bias_truth_m", cfg.bias_truth_m);
    cfg.link.range_rate_sigma_mm_s =
        get_num(l, lw, "range_rate_sigma_mm_s", cfg.link.range_rate_sigma_mm_s);
    if (l.contains("pn")) {
      const json& p = l["pn"];
      const std::string pw = lw + "/pn";
      check_keys(p, pw, {"f_rc_hz", "loop_bandwidth_hz", "prc_over_n0_dbhz", "f_chip_hz",
                         "delta_f_chip_hz", "integration_time_s", "two_way_combiner"});
      cfg.link.pn.f_rc_hz = get_num(p, pw, "f_rc_hz", cfg.link.pn.f_rc_hz);
      cfg.link.pn.loop_bandwidth_hz =
          get_num(p, pw, "loop_bandwidth_hz", cfg.link.pn.loop_bandwidth_hz);
      cfg.link.pn.prc_over_n0_dbhz =
          get_num(p, pw, "prc_over_n0_dbhz", cfg.link.pn.prc_over_n0_dbhz);
      cfg.link.pn.f_chip_hz = get_num(p, pw, "f_chip_hz", cfg.link.pn.f_chip_hz);
      cfg.link.pn.delta_f_chip_hz =
          get_num(p, pw, "delta_f_chip_hz", cfg.link.pn.delta_f_chip_hz);
      cfg.link.pn.integration_time_s =
          get_num(p, pw, "integration_time_s", cfg.link.pn.integration_time_s);
      cfg.link.pn_combiner =
          parse_combiner(get_str(p, pw, "two_way_combiner", "rss"), pw + "/two_way_combiner");
    }
    if (l.contains("time_derived")) {
      const json& t = l["time_derived"];
      const std::string tw = lw + "/time_derived";
      check_keys(t, tw, {"symbol_rate_down_sps", "symbol_rate_up_sps", "correlator_time_s",
                         "es_over_n0_db", "two_way_combiner"});
      cfg.link.time_derived.symbol_rate_down_sps =
          get_num(t, tw, "symbol_rate_down_sps", cfg.link.time_derived.symbol_rate_down_sps);
      cfg.link.time_derived.symbol_rate_up_sps =
          get_num(t, tw, "symbol_rate_up_sps", cfg.link.time_derived.symbol_rate_up_sps);
      cfg.link.time_derived.correlator_time_s =
          get_num(t, tw, "correlator_time_s", cfg.link.time_derived.correlator_time_s);
      cfg.link.time_derived.es_over_n0_db =
          get_num(t, tw, "es_over_n0_db", cfg.link.time_derived.es_over_n0_db);
      cfg.link.td_combiner = parse_combiner(
          get_str(t, tw, "two_way_combiner", "quadratic_mean"), tw + "/two_way_combiner");
    }
    if (l.contains("doppler")) {
      const json& dop = l["doppler"];
      const std::string dw2 = lw + "/doppler";
      check_keys(dop, dw2,
                 {"carrier_hz", "count_time_s", "loop_snr", "pc_over_n0_dbhz",
                  "turnaround_ratio", "loop_bandwidth_hz", "transmit_hz",
                  "phase_count_time_s", "phase_noise_rad"});
      cfg.link.doppler.carrier_hz = get_num(dop, dw2, "carrier_hz", cfg.link.doppler.carrier_hz);
      cfg.link.doppler.count_time_s =
          get_num(dop, dw2, "count_time_s", cfg.link.doppler.count_time_s);
      cfg.link.doppler.loop_snr = get_num(dop, dw2, "loop_snr", cfg.link.doppler.loop_snr);
      cfg.link.doppler.pc_over_n0_dbhz =
          get_num(dop, dw2, "pc_over_n0_dbhz", cfg.link.doppler.pc_over_n0_dbhz);
      cfg.link.doppler.turnaround_ratio =
          get_num(dop, dw2, "turnaround_ratio", cfg.link.doppler.turnaround_ratio);
      cfg.link.doppler.loop_bandwidth_hz =
          get_num(dop, dw2, "loop_bandwidth_hz", cfg.link.doppler.loop_bandwidth_hz);
      cfg.link.doppler.transmit_hz =
          get_num(dop, dw2, "transmit_hz", cfg.link.doppler.transmit_hz);
      cfg.link.doppler.phase_count_time_s =
          get_num(dop, dw2, "phase_count_time_s", cfg.link.doppler.phase_count_time_s);
      cfg.link.doppler.phase_noise_rad =
          get_num(dop, dw2, "phase_noise_rad", cfg.link.doppler.phase_noise_rad);
    }
  }

  if (j.contains("filter")) {
    const json& f = j["filter"];
    const std::string fw = path + "/filter";
    check_keys(f, fw,
               {"bias_mode", "process_noise_sigma", "q_form", "initial_position_sigma_km",
                "initial_velocity_sigma_cm_s", "initial_position_error_m",
                "initial_velocity_error_mm_s", "bias_prior_m", "bias_prior_sigma_m",
                "bias_consider_sigma_m", "drift_augmentation", "drift_prior_sigma_m_s",
                "divergence_threshold_km"});
    const std::string mode = get_str(f, fw, "bias_mode", "neglect");
    if (mode == "neglect") {
      cfg.filter.bias_mode = BiasMode::neglect;
    } else if (mode == "estimate") {
      cfg.filter.bias_mode = BiasMode::estimate;
    } else if (mode == "consider") {
      cfg.filter.bias_mode = BiasMode::consider;
    } else {
      fail(fw + "/bias_mode", "expected 'neglect', 'estimate' or 'consider'");
    }
    cfg.filter.process_noise_sigma =
        get_num(f, fw, "process_noise_sigma", cfg.filter.process_noise_sigma);
    const std::string form = get_str(f, fw, "q_form", "published");
    if (form == "published") {
      cfg.filter.q_form = ProcessNoiseConfig::Form::published;
    } else if (form == "conventional") {
      cfg.filter.q_form = ProcessNoiseConfig::Form::conventional;
    } else {
      fail(fw + "/q_form", "expected 'published' or 'conventional'");
    }
    cfg.filter.initial_position_sigma_km =
        get_num(f, fw, "initial_position_sigma_km", cfg.filter.initial_position_sigma_km);
    cfg.filter.initial_velocity_sigma_cm_s =
        get_num(f, fw, "initial_velocity_sigma_cm_s", cfg.filter.initial_velocity_sigma_cm_s);
    cfg.filter.initial_position_error_m =
        get_num(f, fw, "initial_position_error_m", cfg.filter.initial_position_error_m);
    cfg.filter.initial_velocity_error_mm_s =
        get_num(f, fw, "initial_velocity_error_mm_s", cfg.filter.initial_velocity_error_mm_s);
    cfg.filter.bias_prior_m = get_num(f, fw, "bias_prior_m", cfg.filter.bias_prior_m);
    cfg.filter.bias_prior_sigma_m =
        get_num(f, fw, "bias_prior_sigma_m", cfg.filter.bias_prior_sigma_m);
    cfg.filter.bias_consider_sigma_m =
        get_num(f, fw, "bias_consider_sigma_m", cfg.filter.bias_consider_sigma_m);
    cfg.filter.drift_augmentation =
        get_bool(f, fw, "drift_augmentation", cfg.filter.drift_augmentation);
    cfg.filter.drift_prior_sigma_m_s =
        get_num(f, fw, "drift_prior_sigma_m_s", cfg.filter.drift_prior_sigma_m_s);
    cfg.filter.divergence_threshold_km =
        get_num(f, fw, "divergence_threshold_km", cfg.filter.divergence_threshold_km);
  }

  if (j.contains("montecarlo")) {
    const json& m = j["montecarlo"];
    const std::string mw = path + "/montecarlo";
    check_keys(m, mw, {"runs", "seed", "workers"});
    cfg.montecarlo.runs = static_cast<int>(get_num(m, mw, "runs", cfg.montecarlo.runs));
    cfg.montecarlo.seed = static_cast<std::uint64_t>(
        get_num(m, mw, "seed", static_cast<double>(cfg.montecarlo.seed)));
    cfg.montecarlo.workers = static_cast<int>(get_num(m, mw, "workers", cfg.montecarlo.workers));
  }

  cfg.validate();
  return cfg;
}

std::shared_ptr<const EphemerisProvider> make_ephemeris_provider(const ScenarioConfig& cfg) {
  if (cfg.nbody.ephemeris_provider == "csv") {
    return std::make_shared<CsvEphemeris>(cfg.nbody.ephemeris_csv_path);
  }
  AnalyticEphemeris::Config ecfg = AnalyticEphemeris::Config::from_crtbp(cfg.crtbp);
  ecfg.moon_eccentricity = cfg.nbody.moon_eccentricity;
  ecfg.sun_initial_longitude_rad =
      cfg.nbody.sun_initial_longitude_deg * 3.14159265358979323846 / 180.0;
  return std::make_shared<AnalyticEphemeris>(ecfg);
}

NbodyModels make_nbody_models(const ScenarioConfig& cfg, const SpacecraftConfig& sc) {
  NbodyModels models;
  models.ephemeris = make_ephemeris_provider(cfg);
  models.gm = crtbp_consistent_gm(cfg.crtbp);
  if (cfg.nbody.gm_earth) models.gm.earth = *cfg.nbody.gm_earth;
  if (cfg.nbody.gm_moon) models.gm.moon = *cfg.nbody.gm_moon;
  models.gm.sun = cfg.nbody.gm_sun;
  models.gm.include_sun = cfg.nbody.enable_sun;
  models.enable_srp = cfg.nbody.enable_srp;
  models.srp = sc.srp;
  return models;
}

ScenarioData prepare_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioData data;
  data.cfg = cfg;

  const double time_unit = cfg.crtbp.time_unit_s();
  const double cadence_nd = cfg.cadence_s / time_unit;
  const auto steps = static_cast<std::size_t>(
      std::floor(cfg.duration_days * 86400.0 / cfg.cadence_s + 1e-9));
  data.epochs_nd.resize(steps + 1);
  data.epochs_days.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    data.epochs_nd[k] = static_cast<double>(k) * cadence_nd;
    data.epochs_days[k] = data.epochs_nd[k] * cfg.crtbp.t_star_days;
  }

  // Optional Table-1-style ingestion: elements override the state vector.
  SpacecraftConfig sc1 = cfg.sc1, sc2 = cfg.sc2;
  for (SpacecraftConfig* sc : {&sc1, &sc2}) {
    if (sc->initial_elements_mci) {
      const CartesianState mci = kepler_to_cartesian(*sc->initial_elements_mci);
      sc->initial_state = mci_to_barycentric(mci, 0.0, cfg.crtbp);
    }
  }

  data.truth.resize(data.epochs_nd.size());
  if (cfg.dynamics == DynamicsModel::crtbp) {
    const IntegratorConfig integ = cfg.integrator_nd();
    const std::vector<StmState> t1 =
        propagate(sc1.initial_state, data.epochs_nd, integ, cfg.crtbp, false);
    const std::vector<StmState> t2 =
        propagate(sc2.initial_state, data.epochs_nd, integ, cfg.crtbp, false);
    for (std::size_t k = 0; k < data.truth.size(); ++k) {
      data.truth[k].head<6>() = t1[k].state.vec();
      data.truth[k].tail<6>() = t2[k].state.vec();
    }
  } else {
    std::vector<double> epochs_s(data.epochs_nd.size());
    for (std::size_t k = 0; k < epochs_s.size(); ++k) {
      epochs_s[k] = data.epochs_nd[k] * time_unit;
    }

    const IntegratorConfig integ = cfg.integrator_s();
    for (int i = 0; i < 2; ++i) {
      const SpacecraftConfig& sc = (i == 0) ? sc1 : sc2;
      const NbodyModels models = make_nbody_models(cfg, sc);

      const CartesianState eci0 = rotating_to_eci(sc.initial_state, cfg.crtbp);
      NbodyState s0;
      s0.epoch_s = 0.0;
      s0.pos_km = eci0.pos_km;
      s0.vel_km_s = eci0.vel_km_s;
      const std::vector<NbodyStmState> traj = propagate_nbody(s0, epochs_s, integ, models);
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const RotatingState rot = eci_to_rotating(
            {traj[k].state.pos_km, traj[k].state.vel_km_s}, traj[k].state.epoch_s, cfg.crtbp);
        data.truth[k].segment<6>(static_cast<int>(6 * i)) = rot.vec();
      }
    }
  }

  data.meas_sigma_value = cfg.measurement_sigma();
  data.meas_unit_to_nd = (cfg.kind() == MeasurementKind::range)
                             ? 1.0 / cfg.crtbp.l_star_km
                             : 1.0 / cfg.crtbp.vel_unit_km_s();
  data.meas_sigma_nd = data.meas_sigma_value * data.meas_unit_to_nd;
  const double bias_value =
      (cfg.kind() == MeasurementKind::range) ? cfg.bias_truth_m / 1000.0 : 0.0;
  data.bias_truth_nd = bias_value * data.meas_unit_to_nd;
  return data;
}

std::vector<MeasurementSample> synthesize_measurements(const ScenarioData& data,
                                                       std::uint64_t run_seed) {
  const ScenarioConfig& cfg = data.cfg;
  const double l = cfg.crtbp.l_star_km;
  const double vu = cfg.crtbp.vel_unit_km_s();
  const double bias_value = data.bias_truth_nd / data.meas_unit_to_nd;

  MeasurementSynthesizer synth(derive_seed(run_seed, 2), data.meas_sigma_value, bias_value,
                               cfg.kind());
  std::vector<MeasurementSample> out;
  out.reserve(data.epochs_nd.size() - 1);
  for (std::size_t k = 1; k < data.epochs_nd.size(); ++k) {
    const Vector12d& x = data.truth[k];
    out.push_back(synth.synthesize(data.epochs_nd[k], x.segment<3>(0) * l,
                                   x.segment<3>(3) * vu, x.segment<3>(6) * l,
                                   x.segment<3>(9) * vu));
  }
  return out;
}

JointFilterState make_run_initial_state(const ScenarioData& data, std::uint64_t run_seed) {
  const ScenarioConfig& cfg = data.cfg;
  const double l = cfg.crtbp.l_star_km;
  const double vu = cfg.crtbp.vel_unit_km_s();

  std::mt19937_64 rng(derive_seed(run_seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto unit_vector = [&]() {
    Eigen::Vector3d v;
    do {
      v = {normal(rng), normal(rng), normal(rng)};
    } while (v.norm() < 1e-12);
    return Eigen::Vector3d(v / v.norm());
  };

  const double pos_err_nd = cfg.filter.initial_position_error_m / 1000.0 / l;
  const double vel_err_nd = cfg.filter.initial_velocity_error_mm_s * 1e-6 / vu;

  Vector12d x0 = data.truth.front();
  x0.segment<3>(0) += pos_err_nd * unit_vector();
  x0.segment<3>(3) += vel_err_nd * unit_vector();
  x0.segment<3>(6) += pos_err_nd * unit_vector();
  x0.segment<3>(9) += vel_err_nd * unit_vector();

  const double pos_sigma_nd = cfg.filter.initial_position_sigma_km / l;
  const double vel_sigma_nd = cfg.filter.initial_velocity_sigma_cm_s * 1e-5 / vu;
  Eigen::Matrix<double, 12, 12> p0 = Eigen::Matrix<double, 12, 12>::Zero();
  for (int i = 0; i < 3; ++i) {
    p0(i, i) = pos_sigma_nd * pos_sigma_nd;
    p0(i + 3, i + 3) = vel_sigma_nd * vel_sigma_nd;
    p0(i + 6, i + 6) = pos_sigma_nd * pos_sigma_nd;
    p0(i + 9, i + 9) = vel_sigma_nd * vel_sigma_nd;
  }

  JointFilterState f = make_initial_state(0.0, x0, p0);
  const double bias_prior_nd = cfg.filter.bias_prior_m / 1000.0 / l;
  if (cfg.filter.bias_mode == BiasMode::estimate) {
    const double sig = cfg.filter.bias_prior_sigma_m / 1000.0 / l;
    augment_bias(f, bias_prior_nd, sig * sig);
    if (cfg.filter.drift_augmentation) {
      const double dsig = cfg.filter.drift_prior_sigma_m_s / 1000.0 / vu;
      augment_clock_drift(f, 0.0, dsig * dsig);
    }
  } else if (cfg.filter.bias_mode == BiasMode::consider) {
    const double sig = cfg.filter.bias_consider_sigma_m / 1000.0 / l;
    enable_consider(f, ConsiderConfig{bias_prior_nd, sig * sig});
  }
  return f;
}

JointDynamics make_filter_dynamics(const ScenarioConfig& cfg) {
  const CrtbpParams params = cfg.crtbp;
  if (cfg.dynamics == DynamicsModel::crtbp) {
    const IntegratorConfig integ = cfg.integrator_nd();
    BlockDynamics d = [params, integ](const Vector6d& x, double t0, double t1) {
      const RotatingState s0 = RotatingState::from_vec(t0, x);
      const StmState out = propagate_to(s0, t1, integ, params, true);
      return PropagatedBlock{out.state.vec(), out.stm};
    };
    return {d, d};
  }

  // Ephemeris scenario: the estimator shares the truth dynamics ("no error in
  // the dynamics"); each step runs in ECI and is conjugated back into the
  // rotating estimation frame.
  const IntegratorConfig integ = cfg.integrator_s();
  const double tu = params.time_unit_s();
  const auto wrap = [&](const SpacecraftConfig& sc) {
    const NbodyModels models = make_nbody_models(cfg, sc);
    return BlockDynamics([models, params, integ, tu](const Vector6d& x, double t0, double t1) {
      const CartesianState eci0 = rotating_to_eci(RotatingState::from_vec(t0, x), params);
      NbodyState s0;
      s0.epoch_s = t0 * tu;
      s0.pos_km = eci0.pos_km;
      s0.vel_km_s = eci0.vel_km_s;
      const NbodyStmState out =
          propagate_nbody(s0, {t1 * tu}, integ, models, true).front();
      const RotatingState rot = eci_to_rotating({out.state.pos_km, out.state.vel_km_s},
                                                t1 * tu, params);
      const Matrix6d stm_rot = eci_to_rotating_jacobian(t1, params) * out.stm *
                               rotating_to_eci_jacobian(t0, params);
      return PropagatedBlock{rot.vec(), stm_rot};
    });
  };
  return {wrap(cfg.sc1), wrap(cfg.sc2)};
}

FilterRunConfig make_filter_run_config(const ScenarioData& data) {
  const ScenarioConfig& cfg = data.cfg;
  FilterRunConfig run;
  run.dynamics = make_filter_dynamics(cfg);
  ProcessNoiseConfig q;
  q.sigma1 = cfg.filter.process_noise_sigma;
  q.sigma2 = cfg.filter.process_noise_sigma;
  q.dt = cfg.cadence_s / cfg.crtbp.time_unit_s();
  q.form = cfg.filter.q_form;
  run.q12 = build_process_noise(q);
  run.kind = cfg.kind();
  run.meas_variance = data.meas_sigma_nd * data.meas_sigma_nd;
  run.divergence_position_nd = cfg.filter.divergence_threshold_km / cfg.crtbp.l_star_km;
  return run;
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::uint64_t index) {
  return derive_seed(base_seed, index);
}

FilterRunResult run_single(const ScenarioData& data, std::uint64_t run_seed) {
  const std::vector<MeasurementSample> samples = synthesize_measurements(data, run_seed);
  std::vector<double> meas_nd(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    meas_nd[i] = samples[i].value * data.meas_unit_to_nd;
  }
  const JointFilterState f0 = make_run_initial_state(data, run_seed);
  return run_filter(f0, data.epochs_nd, meas_nd, data.truth, make_filter_run_config(data));
}

}  // namespace xlnav
