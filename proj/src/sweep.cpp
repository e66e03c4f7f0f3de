#include "jfloq/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "jfloq/oracle.hpp"

#ifndef JFLOQ_VERSION
#define JFLOQ_VERSION "0.0.0"
#endif

namespace jfloq {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version() { return JFLOQ_VERSION; }

const char* to_string(PumpAxis a) {
  switch (a) {
    case PumpAxis::nbar_est: return "nbar_est";
    case PumpAxis::amplitude: return "A_p_over_2pi_MHz";
    case PumpAxis::xi: return "xi";
  }
  return "?";
}

const char* to_string(Model m) { return m == Model::unshunted ? "unshunted" : "shunted"; }

namespace {

PumpAxis axis_from_string(const std::string& s) {
  if (s == "nbar_est") return PumpAxis::nbar_est;
  if (s == "A_p_over_2pi_MHz") return PumpAxis::amplitude;
  if (s == "xi") return PumpAxis::xi;
  fail(ErrorCode::configuration, "unknown pump axis '" + s + "'");
}

Model model_from_string(const std::string& s) {
  if (s == "unshunted") return Model::unshunted;
  if (s == "shunted") return Model::shunted;
  fail(ErrorCode::configuration, "unknown model '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::configuration, what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void SweepConfig::validate() const {
  require(!name.empty(), "name must not be empty");
  require(EC_over_h_MHz > 0.0 && EJ_over_h_GHz > 0.0, "E_C and E_J must be positive");
  require(omega_a_over_2pi_GHz > 0.0 && omega_p_over_2pi_GHz > 0.0, "frequencies must be positive");
  require(g_over_2pi_MHz >= 0.0, "g must be non-negative");
  require(std::isfinite(Ng), "Ng must be finite");
  if (model == Model::shunted) require(EL_over_h_GHz > 0.0, "shunted model needs E_L > 0");
  require(!grid.empty(), "pump grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(std::isfinite(grid[i]) && grid[i] >= 0.0, "pump grid values must be finite and non-negative");
    if (i > 0) require(grid[i] > grid[i - 1], "pump grid must be strictly increasing");
  }
  const auto& t = truncation;
  if (model == Model::unshunted) {
    require(t.n_max >= 1 && t.n_fock >= 2, "unshunted truncation too small");
  } else {
    require(t.n_b >= 3 && t.n_a >= 3, "shunted truncation too small");
    require(t.physical.n_b >= 0 && t.physical.n_a >= 0 && t.physical.n_junction >= 0,
            "physical dimensions must be non-negative");
  }
  require(t.leak_tol > 0.0, "leak tolerance must be positive");
  require(floquet.steps_per_period == 0 || floquet.steps_per_period >= 32, "steps per period must be >= 32");
  require(floquet.n_t >= 64 && (floquet.n_t & (floquet.n_t - 1)) == 0, "N_t must be a power of two >= 64");
  require(floquet.K >= 0 && floquet.K <= floquet.n_t / 2 - 1, "K must satisfy 0 <= K <= N_t/2 - 1");
  require(steps() % floquet.n_t == 0, "steps per period must be a multiple of N_t");
  require(noise.kappa_over_2pi_kHz > 0.0, "kappa must be positive");
  require(noise.temperature_K >= 0.0, "temperature must be non-negative");
  require(observables.window_half_width_MHz > 0.0, "window half width must be positive");
  require(observables.relative_floor >= 0.0 && observables.relative_floor < 1.0, "relative floor must be in [0, 1)");
  require(workers >= 1, "workers must be >= 1");
  for (std::size_t i = 1; i < ng_values.size(); ++i) require(ng_values[i] > ng_values[i - 1], "Ng list must be increasing");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    require(ratios[i] > 0.0, "ratios must be positive");
    if (i > 0) require(ratios[i] > ratios[i - 1], "ratio list must be increasing");
  }
  require(ratio_sum_GHz > 0.0, "ratio-study sum must be positive");
  const auto& v = validation;
  require(v.n_max >= 1 && v.n_fock >= 2 && v.n_b >= 2 && v.n_a >= 2, "validation truncation too small");
  require(v.nbar_est >= 0.0, "validation n_est must be non-negative");
  require(!v.kappa_over_omega_a.empty(), "validation kappa list must not be empty");
  for (double k : v.kappa_over_omega_a) require(k > 0.0 && k < 1.0, "validation kappa ratios must be in (0, 1)");
  require(v.steps_per_period >= 32, "validation steps per period must be >= 32");
  require(v.max_trace_distance > 0.0, "validation tolerance must be positive");
  if (model == Model::unshunted) unshunted(0.0).validate();
  else shunted(0.0).validate();
}

int SweepConfig::steps() const {
  if (floquet.steps_per_period > 0) return floquet.steps_per_period;
  return model == Model::unshunted ? 256 : 128;
}

UnshuntedParams SweepConfig::unshunted(double A_p) const {
  UnshuntedParams p;
  p.E_C = from_mhz(EC_over_h_MHz);
  p.E_J = from_ghz(EJ_over_h_GHz);
  p.g = from_mhz(g_over_2pi_MHz);
  p.omega_a = from_ghz(omega_a_over_2pi_GHz);
  p.omega_p = from_ghz(omega_p_over_2pi_GHz);
  p.A_p = A_p;
  p.N_g = Ng;
  return p;
}

ShuntedParams SweepConfig::shunted(double A_p) const {
  ShuntedParams p;
  p.E_C = from_mhz(EC_over_h_MHz);
  p.E_J = from_ghz(EJ_over_h_GHz);
  p.E_L = from_ghz(EL_over_h_GHz);
  p.g = from_mhz(g_over_2pi_MHz);
  p.omega_a = from_ghz(omega_a_over_2pi_GHz);
  p.omega_p = from_ghz(omega_p_over_2pi_GHz);
  p.A_p = A_p;
  return p;
}

double SweepConfig::amplitude_for(double value) const {
  const double wa = from_ghz(omega_a_over_2pi_GHz), wp = from_ghz(omega_p_over_2pi_GHz);
  switch (axis) {
    case PumpAxis::nbar_est: return pump_amplitude_for_nbar(value, wp, wa);
    case PumpAxis::amplitude: return from_mhz(value);
    case PumpAxis::xi: {
      // xi is linear in A_p for both models.
      const double unit = from_mhz(1.0);
      double per;
      if (model == Model::unshunted) {
        per = derive_unshunted_frame(unshunted(unit)).xi;
      } else {
        per = derive_shunted_frame(shunted(unit)).xi;
      }
      require(per != 0.0, "xi axis needs a coupling that converts pump into phase drive");
      return value == 0.0 ? 0.0 : unit * value / std::abs(per);
    }
  }
  return 0.0;
}

std::string to_json(const SweepConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = to_string(c.model);
  j["EC_over_h_MHz"] = c.EC_over_h_MHz;
  j["EJ_over_h_GHz"] = c.EJ_over_h_GHz;
  j["EL_over_h_GHz"] = c.EL_over_h_GHz;
  j["g_over_2pi_MHz"] = c.g_over_2pi_MHz;
  j["omega_a_over_2pi_GHz"] = c.omega_a_over_2pi_GHz;
  j["omega_p_over_2pi_GHz"] = c.omega_p_over_2pi_GHz;
  j["Ng"] = c.Ng;
  j["pump"] = {{"axis", to_string(c.axis)}, {"grid", c.grid}};
  const auto& t = c.truncation;
  j["truncation"] = {{"n_max", t.n_max},
                     {"n_fock", t.n_fock},
                     {"n_b", t.n_b},
                     {"n_a", t.n_a},
                     {"physical_n_b", t.physical.n_b},
                     {"physical_n_a", t.physical.n_a},
                     {"physical_n_junction", t.physical.n_junction},
                     {"leak_tol", t.leak_tol}};
  j["floquet"] = {{"steps_per_period", c.floquet.steps_per_period},
                  {"integrator", to_string(c.floquet.integrator)},
                  {"exp_method", to_string(c.floquet.exp_method)},
                  {"N_t", c.floquet.n_t},
                  {"K", c.floquet.K}};
  j["noise"] = {{"kappa_over_2pi_kHz", c.noise.kappa_over_2pi_kHz}, {"temperature_K", c.noise.temperature_K}};
  j["observables"] = {{"window_half_width_MHz", c.observables.window_half_width_MHz},
                      {"relative_floor", c.observables.relative_floor},
                      {"kerr", c.observables.kerr}};
  j["validation"] = {{"n_max", c.validation.n_max},
                     {"n_fock", c.validation.n_fock},
                     {"n_b", c.validation.n_b},
                     {"n_a", c.validation.n_a},
                     {"nbar_est", c.validation.nbar_est},
                     {"kappa_over_omega_a", c.validation.kappa_over_omega_a},
                     {"steps_per_period", c.validation.steps_per_period},
                     {"max_trace_distance", c.validation.max_trace_distance}};
  j["ng_study"] = {{"Ng_values", c.ng_values}};
  j["ratio_study"] = {{"EL_over_EJ", c.ratios}, {"EJ_plus_EL_over_h_GHz", c.ratio_sum_GHz}};
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  return j.dump(2);
}

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::configuration, where_ + " must be an object");
  }
  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::configuration, where_ + "." + key + ": " + e.what());
    }
  }
  const json* child(const char* key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        fail(ErrorCode::configuration, "unknown key '" + where_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace

SweepConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::configuration, std::string("malformed config: ") + e.what());
  }
  SweepConfig c;
  Reader r(j, "config");
  std::string base;
  r.get("base_preset", base);
  if (!base.empty()) {
    const auto slash = base.find('/');
    if (slash == std::string::npos) fail(ErrorCode::configuration, "base_preset must be '<model>/<scale>'");
    c = preset(base.substr(0, slash), base.substr(slash + 1));
  }
  std::string s;
  r.get("name", c.name);
  s = to_string(c.model);
  r.get("model", s);
  c.model = model_from_string(s);
  r.get("EC_over_h_MHz", c.EC_over_h_MHz);
  r.get("EJ_over_h_GHz", c.EJ_over_h_GHz);
  r.get("EL_over_h_GHz", c.EL_over_h_GHz);
  r.get("g_over_2pi_MHz", c.g_over_2pi_MHz);
  r.get("omega_a_over_2pi_GHz", c.omega_a_over_2pi_GHz);
  r.get("omega_p_over_2pi_GHz", c.omega_p_over_2pi_GHz);
  r.get("Ng", c.Ng);
  if (const json* p = r.child("pump")) {
    Reader rp(*p, "pump");
    s = to_string(c.axis);
    rp.get("axis", s);
    c.axis = axis_from_string(s);
    rp.get("grid", c.grid);
    rp.finish();
  }
  if (const json* p = r.child("truncation")) {
    Reader rt(*p, "truncation");
    auto& t = c.truncation;
    rt.get("n_max", t.n_max);
    rt.get("n_fock", t.n_fock);
    rt.get("n_b", t.n_b);
    rt.get("n_a", t.n_a);
    rt.get("physical_n_b", t.physical.n_b);
    rt.get("physical_n_a", t.physical.n_a);
    rt.get("physical_n_junction", t.physical.n_junction);
    rt.get("leak_tol", t.leak_tol);
    rt.finish();
  }
  if (const json* p = r.child("floquet")) {
    Reader rf(*p, "floquet");
    rf.get("steps_per_period", c.floquet.steps_per_period);
    s = to_string(c.floquet.integrator);
    rf.get("integrator", s);
    c.floquet.integrator = integrator_from_string(s);
    s = to_string(c.floquet.exp_method);
    rf.get("exp_method", s);
    c.floquet.exp_method = exp_method_from_string(s);
    rf.get("N_t", c.floquet.n_t);
    rf.get("K", c.floquet.K);
    rf.finish();
  }
  if (const json* p = r.child("noise")) {
    Reader rn(*p, "noise");
    rn.get("kappa_over_2pi_kHz", c.noise.kappa_over_2pi_kHz);
    rn.get("temperature_K", c.noise.temperature_K);
    rn.finish();
  }
  if (const json* p = r.child("observables")) {
    Reader ro(*p, "observables");
    ro.get("window_half_width_MHz", c.observables.window_half_width_MHz);
    ro.get("relative_floor", c.observables.relative_floor);
    ro.get("kerr", c.observables.kerr);
    ro.finish();
  }
  if (const json* p = r.child("validation")) {
    Reader rv(*p, "validation");
    auto& v = c.validation;
    rv.get("n_max", v.n_max);
    rv.get("n_fock", v.n_fock);
    rv.get("n_b", v.n_b);
    rv.get("n_a", v.n_a);
    rv.get("nbar_est", v.nbar_est);
    rv.get("kappa_over_omega_a", v.kappa_over_omega_a);
    rv.get("steps_per_period", v.steps_per_period);
    rv.get("max_trace_distance", v.max_trace_distance);
    rv.finish();
  }
  if (const json* p = r.child("ng_study")) {
    Reader rg(*p, "ng_study");
    rg.get("Ng_values", c.ng_values);
    rg.finish();
  }
  if (const json* p = r.child("ratio_study")) {
    Reader rr(*p, "ratio_study");
    rr.get("EL_over_EJ", c.ratios);
    rr.get("EJ_plus_EL_over_h_GHz", c.ratio_sum_GHz);
    rr.finish();
  }
  r.get("output_dir", c.output_dir);
  r.get("workers", c.workers);
  r.finish();
  c.validate();
  return c;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

SweepConfig preset(const std::string& model, const std::string& scale) {
  if (scale != "paper" && scale != "ci") fail(ErrorCode::configuration, "unknown preset scale '" + scale + "'");
  const bool ci = scale == "ci";
  SweepConfig c;
  c.g_over_2pi_MHz = 140.0;
  c.omega_a_over_2pi_GHz = 5.5;
  c.omega_p_over_2pi_GHz = 6.0;
  c.EC_over_h_MHz = 150.0;
  if (model == "unshunted") {
    c.model = Model::unshunted;
    c.EJ_over_h_GHz = 20.0;
    c.truncation.n_max = ci ? 15 : 25;
    c.truncation.n_fock = ci ? 8 : 10;
    c.floquet.steps_per_period = ci ? 128 : 256;
  } else if (model == "shunted" || model == "shunted_alt") {
    c.model = Model::shunted;
    if (model == "shunted") {
      c.EJ_over_h_GHz = 6.0;
      c.EL_over_h_GHz = 14.0;
    } else {
      c.EC_over_h_MHz = 450.0;
      c.EJ_over_h_GHz = 2.22;
      c.EL_over_h_GHz = 4.44;
      c.g_over_2pi_MHz = 245.0;
    }
    c.truncation.n_b = ci ? 14 : 20;
    c.truncation.n_a = ci ? 8 : 10;
    c.floquet.steps_per_period = ci ? 64 : 128;
  } else {
    fail(ErrorCode::configuration, "unknown preset model '" + model + "'");
  }
  c.name = model + "_" + scale;
  const int npts = ci ? 6 : 21;
  for (int i = 0; i < npts; ++i) c.grid.push_back(500.0 * i / (npts - 1));
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// One point

StaticReport static_report(const SweepConfig& cfg) {
  cfg.validate();
  StaticReport out;
  const auto& t = cfg.truncation;
  if (cfg.model == Model::unshunted) {
    const UnshuntedParams p = cfg.unshunted(0.0);
    out.spectrum = static_spectrum_unshunted(p, t.n_max, t.n_fock);
    out.confinement = confined_levels(p, transmon_eigenbasis(p, t.n_max));
    out.has_confinement = true;
  } else {
    out.spectrum = static_spectrum_shunted(derive_shunted_frame(cfg.shunted(0.0)), shunted_basis(t.n_b, t.n_a));
  }
  return out;
}

namespace {

double edge_population(const Mat& rho_mode, ModeKind kind) {
  const Eigen::Index d = rho_mode.rows();
  const RVec p = rho_mode.diagonal().real();
  if (kind == ModeKind::fock) return p(d - 1) + p(d - 2);
  return p(0) + p(1) + p(d - 1) + p(d - 2);
}

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

PointReport run_point(const SweepConfig& cfg, int index, Mat* modes_out) {
  PointReport r;
  r.index = index;
  r.grid_value = cfg.grid.at(static_cast<std::size_t>(index));
  try {
    const double A_p = cfg.amplitude_for(r.grid_value);
    const double wa = from_ghz(cfg.omega_a_over_2pi_GHz), wp = from_ghz(cfg.omega_p_over_2pi_GHz);
    r.A_p_over_2pi_MHz = to_hz(A_p) / 1e6;
    r.nbar_est = nbar_est(A_p, wp, wa);

    const auto& t = cfg.truncation;
    DrivenHamiltonian h;
    BasisSpec basis;
    Mat coupling;
    UnshuntedParams up;
    ShuntedParams sp;
    ShuntedFrameParams frame;
    if (cfg.model == Model::unshunted) {
      up = cfg.unshunted(A_p);
      const UnshuntedFrame fr = derive_unshunted_frame(up);
      r.xi = fr.xi;
      basis = unshunted_basis(t.n_max, t.n_fock);
      h = build_unshunted_hamiltonian(up, fr, basis);
      coupling = bath_coupling_unshunted(basis).m;
    } else {
      sp = cfg.shunted(A_p);
      frame = derive_shunted_frame(sp);
      r.xi = frame.xi;
      basis = shunted_basis(t.n_b, t.n_a);
      h = build_shunted_hamiltonian(frame, basis);
      coupling = bath_coupling_shunted(frame, basis).m;
    }

    PropagatorOptions po;
    po.steps_per_period = cfg.steps();
    po.method = cfg.floquet.integrator;
    po.exp_method = cfg.floquet.exp_method;
    Propagation pr = propagate_period(h, po, cfg.floquet.n_t);
    r.unitarity_error = pr.unitarity_error;
    FloquetBasis fb = floquet_modes(pr.monodromy, h.period());
    propagate_modes(fb, std::move(pr.samples));
    r.min_gap_hz = to_hz(fb.min_gap);

    const FourierElements F = fourier_elements(fb, coupling, cfg.floquet.K);
    r.tail_fraction = F.tail_fraction;
    r.symmetry_error = F.symmetry_error;
    const NoiseModel noise =
        NoiseModel::white_from_kappa(from_hz(cfg.noise.kappa_over_2pi_kHz * 1e3), cfg.noise.temperature_K);
    const RateMatrix R = rates(F, fb, noise);
    const SteadyState ss = steady_state(R.L, fb);
    r.steady_residual = ss.residual;
    r.kernel_dim = ss.kernel_dim;
    r.impurity = impurity(ss.rho_t0);
    Eigen::Index dom = 0;
    ss.p.maxCoeff(&dom);
    r.dominant_mode = static_cast<int>(dom);

    for (int m = 0; m < basis.num_modes(); ++m)
      r.frame_edge_population =
          std::max(r.frame_edge_population, edge_population(reduce_to_mode(ss.rho_t0, basis, m), basis.mode_kind(m)));

    Populations pops;
    if (cfg.model == Model::unshunted) {
      const Eigenbasis eta = transmon_eigenbasis(up, t.n_max, false);
      pops = populations_in_eigenbasis(reduce_to_mode(ss.rho_t0, basis, 0), eta.vectors);
    } else {
      const PhysicalState ps = to_physical_basis(ss.rho_t0, basis, frame, t.physical, 0.0, t.leak_tol);
      r.physical_edge_population = ps.edge_population;
      const Eigenbasis nu = shunted_transmon_eigenbasis(sp, ps.junction_dim, false);
      pops = populations_in_eigenbasis(ps.rho_junction, nu.vectors);
      r.frame_b_populations = to_std(reduce_to_mode(ss.rho_t0, basis, 0).diagonal().real());
    }
    r.populations = to_std(pops.values);
    r.leakage = pops.leakage;
    r.mean_excitation = pops.mean_excitation;

    StarkWindow w;
    w.center_hz = cfg.omega_a_over_2pi_GHz * 1e9;
    w.half_width_hz = cfg.observables.window_half_width_MHz * 1e6;
    w.relative_floor = cfg.observables.relative_floor;
    r.lines = stark_lines(F, fb, ss.p, w);
    if (!r.lines.empty()) {
      r.dominant_hz = r.lines[0].frequency_hz;
      r.dominant_ratio = r.lines.size() > 1 ? r.lines[0].weight / r.lines[1].weight
                                            : std::numeric_limits<double>::infinity();
    }
    if (cfg.observables.kerr) {
      try {
        r.kerr_hz = kerr_strength(F, fb, ss.p, w).kerr_hz;
        r.kerr_ok = true;
      } catch (const Error& e) {
        r.kerr_error = e.what();
        r.flags.push_back("kerr_unidentified");
      }
    }
    if (cfg.model == Model::shunted) {
      const AveragedPrediction av = averaged_model_predictions(frame, basis);
      r.has_averaged = true;
      r.averaged_frequency_hz = av.frequency_hz;
      r.averaged_kerr_hz = av.kerr_hz;
      r.omega_a_tilde_hz = to_hz(frame.omega_a_t);
    }

    // Degenerate pairs matter only when the steady state occupies them.
    for (const auto& [a, b] : fb.near_degenerate)
      if (std::max(ss.p(a), ss.p(b)) > 1e-6) {
        r.flags.push_back("degenerate_quasi_energies");
        break;
      }
    if (ss.non_unique) r.flags.push_back("non_unique_steady_state");
    if (std::abs(r.leakage) > 1e-3) r.flags.push_back("population_leakage");
    if (r.tail_fraction > 1e-6) r.flags.push_back("fourier_tail");
    if (r.frame_edge_population > t.leak_tol) r.flags.push_back("truncation_edge");
    if (r.lines.empty()) r.flags.push_back("no_stark_line");
    r.ok = true;
    if (modes_out != nullptr) *modes_out = std::move(fb.modes_t0);
  } catch (const Error& e) {
    r.ok = false;
    r.error_code = to_string(e.code());
    r.error = e.what();
  } catch (const std::exception& e) {
    r.ok = false;
    r.error_code = "internal";
    r.error = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

int SweepResult::failures() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const PointReport& p) { return !p.ok; }));
}

SweepResult run_sweep(const SweepConfig& cfg, int workers) {
  cfg.validate();
  const int n = static_cast<int>(cfg.grid.size());
  int nw = workers > 0 ? workers : cfg.workers;
  nw = std::clamp(nw, 1, n);

  SweepResult out;
  out.config = cfg;
  out.points.resize(n);
  out.seconds.assign(n, 0.0);
  std::vector<Mat> modes(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      const auto t0 = std::chrono::steady_clock::now();
      out.points[i] = run_point(cfg, i, &modes[i]);
      out.seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nw; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // Branch labels follow modes from point to point by maximal overlap.
  std::vector<int> prev_labels;
  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    PointReport& p = out.points[i];
    if (!p.ok || modes[i].size() == 0) {
      prev_labels.clear();
      continue;
    }
    const int d = static_cast<int>(modes[i].cols());
    std::vector<int> labels(d, -1);
    if (prev_labels.empty() || i == 0 || modes[i - 1].rows() != modes[i].rows()) {
      for (int k = 0; k < d; ++k) labels[k] = next_label++;
    } else {
      const std::vector<int> m = match_modes(modes[i - 1], modes[i]);
      for (std::size_t k = 0; k < m.size(); ++k)
        if (m[k] >= 0) labels[m[k]] = prev_labels[k];
      for (int& l : labels)
        if (l < 0) l = next_label++;
      modes[i - 1] = Mat();
    }
    p.dominant_branch = p.dominant_mode >= 0 ? labels[p.dominant_mode] : -1;
    prev_labels = std::move(labels);
  }
  return out;
}

std::vector<SweepResult> run_ng_study(const SweepConfig& cfg, int workers) {
  cfg.validate();
  if (cfg.model != Model::unshunted) fail(ErrorCode::configuration, "the offset-charge study needs the unshunted model");
  if (cfg.ng_values.empty()) fail(ErrorCode::configuration, "Ng list is empty");
  std::vector<SweepResult> out;
  for (double ng : cfg.ng_values) {
    SweepConfig c = cfg;
    c.Ng = ng;
    std::ostringstream os;
    os << cfg.name << "_Ng" << ng;
    c.name = os.str();
    out.push_back(run_sweep(c, workers));
  }
  return out;
}

SweepConfig ratio_config(const SweepConfig& cfg, double ratio) {
  if (cfg.model != Model::shunted) fail(ErrorCode::configuration, "the ratio study needs the shunted model");
  const double sum = cfg.EJ_over_h_GHz + cfg.EL_over_h_GHz;
  if (std::abs(sum - cfg.ratio_sum_GHz) > 1e-9 * std::max(1.0, cfg.ratio_sum_GHz)) {
    std::ostringstream os;
    os << "sum constraint violated: E_J + E_L = " << sum << " GHz, study requires " << cfg.ratio_sum_GHz << " GHz";
    fail(ErrorCode::configuration, os.str());
  }
  if (!(ratio > 0.0)) fail(ErrorCode::configuration, "ratio must be positive");
  SweepConfig c = cfg;
  c.EJ_over_h_GHz = cfg.ratio_sum_GHz / (1.0 + ratio);
  c.EL_over_h_GHz = cfg.ratio_sum_GHz * ratio / (1.0 + ratio);
  std::ostringstream os;
  os << cfg.name << "_r" << ratio;
  c.name = os.str();
  c.validate();
  return c;
}

std::vector<SweepResult> run_ratio_study(const SweepConfig& cfg, int workers) {
  cfg.validate();
  if (cfg.ratios.empty()) fail(ErrorCode::configuration, "ratio list is empty");
  std::vector<SweepConfig> configs;
  for (double r : cfg.ratios) configs.push_back(ratio_config(cfg, r));
  std::vector<SweepResult> out;
  for (const auto& c : configs) out.push_back(run_sweep(c, workers));
  return out;
}

// ---------------------------------------------------------------------------
// Oracle comparison

ValidationReport validate_oracle(const SweepConfig& cfg) {
  cfg.validate();
  const auto& v = cfg.validation;
  const double wa = from_ghz(cfg.omega_a_over_2pi_GHz), wp = from_ghz(cfg.omega_p_over_2pi_GHz);
  const double A_p = pump_amplitude_for_nbar(v.nbar_est, wp, wa);
  ValidationReport out;
  out.model = cfg.model;
  out.nbar_est = v.nbar_est;

  DrivenHamiltonian h;
  Mat coupling, jump;
  if (cfg.model == Model::unshunted) {
    const UnshuntedParams up = cfg.unshunted(A_p);
    const BasisSpec basis = unshunted_basis(v.n_max, v.n_fock);
    h = build_unshunted_hamiltonian(up, derive_unshunted_frame(up), basis);
    coupling = bath_coupling_unshunted(basis).m;
    jump = Mat(embed_sparse(annihilation(v.n_fock).m, 1, basis));
  } else {
    const ShuntedFrameParams frame = derive_shunted_frame(cfg.shunted(A_p));
    const BasisSpec basis = shunted_basis(v.n_b, v.n_a);
    h = build_shunted_hamiltonian(frame, basis);
    coupling = bath_coupling_shunted(frame, basis).m;
    // One channel whose quadrature matches the frame image of the bath coupling.
    jump = frame.bath_weight_a * Mat(embed_sparse(annihilation(v.n_a).m, 1, basis)) +
           frame.bath_weight_b * Mat(embed_sparse(annihilation(v.n_b).m, 0, basis));
  }
  out.dim = h.dim();

  PropagatorOptions po;
  po.steps_per_period = v.steps_per_period;
  po.method = Integrator::cf4;
  Propagation pr = propagate_period(h, po, cfg.floquet.n_t);
  FloquetBasis fb = floquet_modes(pr.monodromy, h.period());
  propagate_modes(fb, std::move(pr.samples));
  out.min_gap_hz = to_hz(fb.min_gap);
  const FourierElements F = fourier_elements(fb, coupling, cfg.floquet.K);

  for (double ratio : v.kappa_over_omega_a) {
    const double kappa = ratio * wa;
    const NoiseModel noise = NoiseModel::white_from_kappa(kappa, cfg.noise.temperature_K);
    const SteadyState ss = steady_state(rates(F, fb, noise).L, fb);
    const OracleResult orc = lindblad_steady_state(h, thermal_collapse(jump, kappa, noise.n_th(wa)));
    const StateDistance d = compare_states(orc.rho, ss.rho_t0);
    ValidationPoint p;
    p.kappa_over_2pi_hz = to_hz(kappa);
    p.trace_distance = d.trace_distance;
    p.fidelity = d.fidelity;
    p.oracle_residual = orc.residual;
    p.oracle_trace_error = orc.trace_error;
    p.oracle_min_eigenvalue = orc.min_eigenvalue;
    p.quadrature_change = orc.quadrature_change;
    p.impurity_floquet = impurity(ss.rho_t0);
    p.impurity_oracle = impurity(orc.rho);
    out.points.push_back(p);
  }
  // Reported in the order given; the trend is checked along decreasing kappa.
  std::vector<ValidationPoint> sorted = out.points;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.kappa_over_2pi_hz > b.kappa_over_2pi_hz; });
  out.within_tolerance = std::all_of(sorted.begin(), sorted.end(),
                                     [&](const auto& p) { return p.trace_distance < v.max_trace_distance; });
  out.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].trace_distance > sorted[i - 1].trace_distance) out.monotone = false;
  return out;
}

std::string validation_to_json(const ValidationReport& r) {
  json j;
  j["model"] = to_string(r.model);
  j["dim"] = r.dim;
  j["nbar_est"] = r.nbar_est;
  j["min_gap_hz"] = r.min_gap_hz;
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"kappa_over_2pi_hz", p.kappa_over_2pi_hz},
                   {"trace_distance", p.trace_distance},
                   {"fidelity", p.fidelity},
                   {"oracle_residual", p.oracle_residual},
                   {"oracle_trace_error", p.oracle_trace_error},
                   {"oracle_min_eigenvalue", p.oracle_min_eigenvalue},
                   {"quadrature_change", p.quadrature_change},
                   {"impurity_floquet", p.impurity_floquet},
                   {"impurity_oracle", p.impurity_oracle}});
  j["points"] = pts;
  j["within_tolerance"] = r.within_tolerance;
  j["monotone"] = r.monotone;
  j["passed"] = r.passed();
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_of(const json& j, double missing) { return j.is_null() ? missing : j.get<double>(); }

json report_json(const PointReport& r) {
  json j;
  j["index"] = r.index;
  j["grid_value"] = r.grid_value;
  j["nbar_est"] = r.nbar_est;
  j["A_p_over_2pi_MHz"] = r.A_p_over_2pi_MHz;
  j["xi"] = r.xi;
  j["ok"] = r.ok;
  j["error_code"] = r.error_code;
  j["error"] = r.error;
  j["populations"] = r.populations;
  j["leakage"] = r.leakage;
  j["mean_excitation"] = r.mean_excitation;
  j["impurity"] = r.impurity;
  j["frame_b_populations"] = r.frame_b_populations;
  json lines = json::array();
  for (const auto& l : r.lines)
    lines.push_back({{"frequency_hz", l.frequency_hz}, {"weight", l.weight}, {"source", l.source},
                     {"target", l.target}, {"k", l.k}});
  j["lines"] = lines;
  j["dominant_hz"] = r.dominant_hz;
  j["dominant_ratio"] = num(r.dominant_ratio);
  j["kerr_ok"] = r.kerr_ok;
  j["kerr_hz"] = r.kerr_hz;
  j["kerr_error"] = r.kerr_error;
  j["has_averaged"] = r.has_averaged;
  j["averaged_frequency_hz"] = r.averaged_frequency_hz;
  j["averaged_kerr_hz"] = r.averaged_kerr_hz;
  j["omega_a_tilde_hz"] = r.omega_a_tilde_hz;
  j["diagnostics"] = {{"unitarity_error", r.unitarity_error},
                      {"tail_fraction", r.tail_fraction},
                      {"symmetry_error", r.symmetry_error},
                      {"steady_residual", r.steady_residual},
                      {"frame_edge_population", r.frame_edge_population},
                      {"physical_edge_population", r.physical_edge_population},
                      {"min_gap_hz", r.min_gap_hz},
                      {"kernel_dim", r.kernel_dim},
                      {"dominant_mode", r.dominant_mode},
                      {"dominant_branch", r.dominant_branch}};
  j["flags"] = r.flags;
  return j;
}

PointReport report_of(const json& j) {
  PointReport r;
  try {
    r.index = j.at("index").get<int>();
    r.grid_value = j.at("grid_value").get<double>();
    r.nbar_est = j.at("nbar_est").get<double>();
    r.A_p_over_2pi_MHz = j.at("A_p_over_2pi_MHz").get<double>();
    r.xi = j.at("xi").get<double>();
    r.ok = j.at("ok").get<bool>();
    r.error_code = j.at("error_code").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.populations = j.at("populations").get<std::vector<double>>();
    r.leakage = j.at("leakage").get<double>();
    r.mean_excitation = j.at("mean_excitation").get<double>();
    r.impurity = j.at("impurity").get<double>();
    r.frame_b_populations = j.at("frame_b_populations").get<std::vector<double>>();
    for (const auto& l : j.at("lines"))
      r.lines.push_back({l.at("frequency_hz").get<double>(), l.at("weight").get<double>(), l.at("source").get<int>(),
                         l.at("target").get<int>(), l.at("k").get<int>()});
    r.dominant_hz = j.at("dominant_hz").get<double>();
    r.dominant_ratio = num_of(j.at("dominant_ratio"), std::numeric_limits<double>::infinity());
    r.kerr_ok = j.at("kerr_ok").get<bool>();
    r.kerr_hz = j.at("kerr_hz").get<double>();
    r.kerr_error = j.at("kerr_error").get<std::string>();
    r.has_averaged = j.at("has_averaged").get<bool>();
    r.averaged_frequency_hz = j.at("averaged_frequency_hz").get<double>();
    r.averaged_kerr_hz = j.at("averaged_kerr_hz").get<double>();
    r.omega_a_tilde_hz = j.at("omega_a_tilde_hz").get<double>();
    const json& d = j.at("diagnostics");
    r.unitarity_error = d.at("unitarity_error").get<double>();
    r.tail_fraction = d.at("tail_fraction").get<double>();
    r.symmetry_error = d.at("symmetry_error").get<double>();
    r.steady_residual = d.at("steady_residual").get<double>();
    r.frame_edge_population = d.at("frame_edge_population").get<double>();
    r.physical_edge_population = d.at("physical_edge_population").get<double>();
    r.min_gap_hz = d.at("min_gap_hz").get<double>();
    r.kernel_dim = d.at("kernel_dim").get<int>();
    r.dominant_mode = d.at("dominant_mode").get<int>();
    r.dominant_branch = d.at("dominant_branch").get<int>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed point record: ") + e.what());
  }
  return r;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) fail(ErrorCode::io, "write failed for '" + p.string() + "'");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string report_to_json(const PointReport& r) { return report_json(r).dump(2); }

PointReport report_from_json(const std::string& text) {
  try {
    return report_of(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("malformed point record: ") + e.what());
  }
}

std::string config_digest(const SweepConfig& cfg) {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_json(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_sweep(const SweepResult& res, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "points", ec);
  if (ec) fail(ErrorCode::io, "cannot create '" + dir + "': " + ec.message());
  const fs::path root(dir);
  write_text(root / "config.json", to_json(res.config) + "\n");

  json manifest;
  manifest["code_version"] = version();
  manifest["config_digest"] = config_digest(res.config);
  manifest["model"] = to_string(res.config.model);
  manifest["points"] = res.points.size();
  manifest["failed_points"] = res.failures();
  json flagged = json::array();
  for (const auto& p : res.points)
    if (p.flagged()) flagged.push_back(p.index);
  manifest["flagged_points"] = flagged;
  manifest["files"] = {"config.json", "summary.csv", "lines.csv", "populations.csv", "points/"};
  write_text(root / "manifest.json", manifest.dump(2) + "\n");

  std::ostringstream summary, lines, pops;
  summary << "index,grid_value,nbar_est,A_p_over_2pi_MHz,xi,ok,impurity,mean_excitation,ground_population,leakage,"
             "dominant_hz,dominant_ratio,kerr_hz,averaged_frequency_hz,averaged_kerr_hz,omega_a_tilde_hz,"
             "dominant_branch,flags,error_code\n";
  lines << "index,nbar_est,frequency_hz,weight,source,target,k\n";
  pops << "index,nbar_est,level,population\n";
  for (const auto& p : res.points) {
    std::string fl;
    for (const auto& f : p.flags) fl += (fl.empty() ? "" : ";") + f;
    summary << p.index << ',' << fmt(p.grid_value) << ',' << fmt(p.nbar_est) << ',' << fmt(p.A_p_over_2pi_MHz) << ','
            << fmt(p.xi) << ',' << (p.ok ? 1 : 0) << ',' << fmt(p.impurity) << ',' << fmt(p.mean_excitation) << ','
            << fmt(p.populations.empty() ? 0.0 : p.populations[0]) << ',' << fmt(p.leakage) << ','
            << fmt(p.dominant_hz) << ',' << fmt(p.dominant_ratio) << ','
            << (p.kerr_ok ? fmt(p.kerr_hz) : std::string()) << ','
            << (p.has_averaged ? fmt(p.averaged_frequency_hz) : std::string()) << ','
            << (p.has_averaged ? fmt(p.averaged_kerr_hz) : std::string()) << ','
            << (p.has_averaged ? fmt(p.omega_a_tilde_hz) : std::string()) << ',' << p.dominant_branch << ',' << fl
            << ',' << p.error_code << '\n';
    for (const auto& l : p.lines)
      lines << p.index << ',' << fmt(p.nbar_est) << ',' << fmt(l.frequency_hz) << ',' << fmt(l.weight) << ','
            << l.source << ',' << l.target << ',' << l.k << '\n';
    for (std::size_t k = 0; k < p.populations.size(); ++k)
      pops << p.index << ',' << fmt(p.nbar_est) << ',' << k << ',' << fmt(p.populations[k]) << '\n';
    std::ostringstream name;
    name << "point_" << std::setw(4) << std::setfill('0') << p.index << ".json";
    write_text(root / "points" / name.str(), report_to_json(p) + "\n");
  }
  write_text(root / "summary.csv", summary.str());
  write_text(root / "lines.csv", lines.str());
  write_text(root / "populations.csv", pops.str());

  json timing = json::array();
  for (std::size_t i = 0; i < res.seconds.size(); ++i) timing.push_back({{"index", i}, {"seconds", res.seconds[i]}});
  write_text(root / "timing.json", timing.dump(2) + "\n");
}

SweepResult read_sweep(const std::string& dir) {
  const fs::path root(dir);
  SweepResult res;
  res.config = config_from_json(read_text(root / "config.json"));
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root / "points", ec))
    if (e.path().extension() == ".json") files.push_back(e.path());
  if (ec) fail(ErrorCode::io, "cannot list '" + (root / "points").string() + "'");
  std::sort(files.begin(), files.end());
  for (const auto& f : files) res.points.push_back(report_from_json(read_text(f)));
  res.seconds.assign(res.points.size(), 0.0);
  return res;
}

// ---------------------------------------------------------------------------
// Figures

namespace {

struct Series {
  std::string label;
  std::vector<double> x, y, size;
  std::vector<bool> flagged;
  bool line = true;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
  const double W = 720, H = 440, L = 80, R = 160, T = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % 8];
    if (s.line && s.x.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double r = s.size.empty() ? 2.5 : std::max(0.8, 8.0 * std::sqrt(s.size[i]));
      if (!s.flagged.empty() && s.flagged[i])
        os << "<rect x=\"" << px(s.x[i]) - r << "\" y=\"" << py(s.y[i]) - r << "\" width=\"" << 2 * r
           << "\" height=\"" << 2 * r << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
      else
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"" << r << "\" fill=\"" << color
           << "\" fill-opacity=\"0.7\"/>\n";
    }
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (si + 1) << "\" fill=\"" << color << "\">" << s.label
       << "</text>\n";
  }
  os << "<text x=\"" << W - R + 10 << "\" y=\"" << H - B << "\" fill=\"#555\">squares: flagged</text>\n";
  os << "</svg>\n";
  return os.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }
};

void missing_columns(const std::vector<std::string>& missing, int figure) {
  if (missing.empty()) return;
  std::ostringstream os;
  os << "figure " << figure << " needs columns absent from the reports:";
  for (const auto& m : missing) os << ' ' << m;
  fail(ErrorCode::precondition, os.str());
}

}  // namespace

EmitResult emit_figures(const std::vector<SweepResult>& results, int figure, const std::string& dir,
                        bool allow_flag_column) {
  if (figure < 1 || figure > 5) fail(ErrorCode::configuration, "figure must be 1..5");
  EmitResult out;
  std::size_t total = 0, flagged = 0;
  for (const auto& r : results)
    for (const auto& p : r.points) {
      ++total;
      if (p.flagged()) ++flagged;
    }
  if (total == 0) {
    out.warnings.push_back("no reports; nothing emitted");
    return out;
  }
  if (!allow_flag_column && flagged > 0 && flagged < total)
    fail(ErrorCode::precondition, "flagged and clean points would be mixed without a marker column");

  std::vector<const PointReport*> ok;
  for (const auto& r : results)
    for (const auto& p : r.points)
      if (p.ok) ok.push_back(&p);
  if (ok.empty()) fail(ErrorCode::precondition, "all points failed; no observables to plot");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create '" + dir + "': " + ec.message());
  const fs::path root(dir);
  const std::string stem = "fig" + std::to_string(figure);
  auto save = [&](const std::string& name, const std::string& text) {
    write_text(root / name, text);
    out.files.push_back((root / name).string());
  };
  auto flag_col = [](const PointReport& p) { return std::string(p.flagged() ? "1" : "0"); };
  const std::size_t npop = 12;

  if (figure == 1 || figure == 3) {
    std::vector<std::string> missing;
    if (std::all_of(ok.begin(), ok.end(), [](auto* p) { return p->populations.empty(); })) missing.push_back("populations");
    if (figure == 3 && std::all_of(ok.begin(), ok.end(), [](auto* p) { return p->frame_b_populations.empty(); }))
      missing.push_back("frame_b_populations");
    missing_columns(missing, figure);

    Table t;
    t.header = {"sweep", "index", "nbar_est", "A_p_over_2pi_MHz", "xi", "impurity", "mean_excitation", "leakage"};
    for (std::size_t k = 0; k < npop; ++k) t.header.push_back("pop_" + std::to_string(k));
    if (figure == 3)
      for (std::size_t k = 0; k < npop; ++k) t.header.push_back("b_fock_pop_" + std::to_string(k));
    if (figure == 1) t.header.push_back("dominant_hz");
    t.header.push_back("flagged");
    std::vector<Series> pop_series(6);
    for (std::size_t k = 0; k < pop_series.size(); ++k) pop_series[k].label = "level " + std::to_string(k);
    Series mean{"mean excitation", {}, {}, {}, {}, true}, imp{"impurity", {}, {}, {}, {}, true};
    Series lines{"Stark lines", {}, {}, {}, {}, false};
    Table lt;
    lt.header = {"sweep", "index", "nbar_est", "frequency_hz", "weight", "source", "target", "k", "flagged"};
    for (const auto& r : results)
      for (const auto& p : r.points) {
        if (!p.ok) continue;
        std::vector<std::string> row{r.config.name,          std::to_string(p.index), fmt(p.nbar_est),
                                     fmt(p.A_p_over_2pi_MHz), fmt(p.xi),              fmt(p.impurity),
                                     fmt(p.mean_excitation),  fmt(p.leakage)};
        for (std::size_t k = 0; k < npop; ++k) row.push_back(k < p.populations.size() ? fmt(p.populations[k]) : "0");
        if (figure == 3)
          for (std::size_t k = 0; k < npop; ++k)
            row.push_back(k < p.frame_b_populations.size() ? fmt(p.frame_b_populations[k]) : "0");
        if (figure == 1) row.push_back(fmt(p.dominant_hz));
        row.push_back(flag_col(p));
        t.rows.push_back(std::move(row));
        for (std::size_t k = 0; k < pop_series.size(); ++k) {
          pop_series[k].x.push_back(p.nbar_est);
          pop_series[k].y.push_back(k < p.populations.size() ? p.populations[k] : 0.0);
          pop_series[k].flagged.push_back(p.flagged());
        }
        mean.x.push_back(p.nbar_est);
        mean.y.push_back(p.mean_excitation);
        mean.flagged.push_back(p.flagged());
        imp.x.push_back(p.nbar_est);
        imp.y.push_back(p.impurity);
        imp.flagged.push_back(p.flagged());
        double wmax = 0.0;
        for (const auto& l : p.lines) wmax = std::max(wmax, l.weight);
        for (const auto& l : p.lines) {
          lt.rows.push_back({r.config.name, std::to_string(p.index), fmt(p.nbar_est), fmt(l.frequency_hz),
                             fmt(l.weight), std::to_string(l.source), std::to_string(l.target), std::to_string(l.k),
                             flag_col(p)});
          lines.x.push_back(p.nbar_est);
          lines.y.push_back(l.frequency_hz / 1e9);
          lines.size.push_back(wmax > 0 ? l.weight / wmax : 0.0);
          lines.flagged.push_back(p.flagged());
        }
      }
    save(stem + "_points.csv", t.csv());
    save(stem + "_populations.svg", svg_plot("Steady-state populations", "n_est", "population", pop_series));
    if (figure == 1) {
      save(stem + "_lines.csv", lt.csv());
      save(stem + "_stark.svg", svg_plot("Probe resonances (area ~ weight)", "n_est", "frequency (GHz)", {lines}));
      save(stem + "_excitation.svg", svg_plot("Mean excitation and impurity", "n_est", "value", {mean, imp}));
    } else {
      std::vector<Series> bs(4);
      for (std::size_t k = 0; k < bs.size(); ++k) {
        bs[k].label = "b~ Fock " + std::to_string(k);
        for (const auto* p : ok) {
          bs[k].x.push_back(p->nbar_est);
          bs[k].y.push_back(k < p->frame_b_populations.size() ? p->frame_b_populations[k] : 0.0);
          bs[k].flagged.push_back(p->flagged());
        }
      }
      save(stem + "_frame.svg", svg_plot("Frame Fock populations of b~", "n_est", "population", bs));
    }
  } else if (figure == 2) {
    std::vector<std::string> missing;
    if (std::none_of(ok.begin(), ok.end(), [](auto* p) { return p->has_averaged; })) {
      missing.push_back("averaged_frequency_hz");
      missing.push_back("averaged_kerr_hz");
    }
    if (std::none_of(ok.begin(), ok.end(), [](auto* p) { return p->kerr_ok; })) missing.push_back("kerr_hz");
    missing_columns(missing, figure);
    Table t;
    t.header = {"sweep", "index", "nbar_est", "xi", "floquet_shift_MHz", "averaged_shift_MHz", "floquet_kerr_kHz",
                "averaged_kerr_kHz", "flagged"};
    Series fs_{"Floquet shift", {}, {}, {}, {}, true}, as{"averaged model", {}, {}, {}, {}, true};
    Series fk{"Floquet Kerr", {}, {}, {}, {}, true}, ak{"averaged Kerr", {}, {}, {}, {}, true};
    for (const auto& r : results)
      for (const auto& p : r.points) {
        if (!p.ok || !p.has_averaged) continue;
        const double shift = (p.dominant_hz - p.omega_a_tilde_hz) / 1e6;
        const double ashift = (p.averaged_frequency_hz - p.omega_a_tilde_hz) / 1e6;
        const double kerr = p.kerr_ok ? p.kerr_hz / 1e3 : std::numeric_limits<double>::quiet_NaN();
        t.rows.push_back({r.config.name, std::to_string(p.index), fmt(p.nbar_est), fmt(p.xi), fmt(shift),
                          fmt(ashift), p.kerr_ok ? fmt(kerr) : "", fmt(p.averaged_kerr_hz / 1e3), flag_col(p)});
        fs_.x.push_back(p.xi);
        fs_.y.push_back(shift);
        fs_.flagged.push_back(p.flagged());
        as.x.push_back(p.xi);
        as.y.push_back(ashift);
        fk.x.push_back(p.xi);
        fk.y.push_back(kerr);
        fk.flagged.push_back(p.flagged());
        ak.x.push_back(p.xi);
        ak.y.push_back(p.averaged_kerr_hz / 1e3);
      }
    save(stem + "_points.csv", t.csv());
    save(stem + "_shift.svg", svg_plot("Stark shift from w~_a", "xi", "shift (MHz)", {fs_, as}));
    save(stem + "_kerr.svg", svg_plot("Kerr strength", "xi", "Kerr (kHz)", {fk, ak}));
  } else {
    const bool ng = figure == 4;
    Table t;
    t.header = {ng ? "Ng" : "EL_over_EJ", "index", "nbar_est", "impurity", "mean_excitation", "dominant_hz", "flagged"};
    std::vector<Series> imp, freq;
    for (const auto& r : results) {
      const double key = ng ? r.config.Ng : r.config.EL_over_h_GHz / r.config.EJ_over_h_GHz;
      std::ostringstream label;
      label << (ng ? "Ng=" : "r=") << std::setprecision(4) << key;
      Series si{label.str(), {}, {}, {}, {}, true}, sf{label.str(), {}, {}, {}, {}, false};
      for (const auto& p : r.points) {
        if (!p.ok) continue;
        t.rows.push_back({fmt(key), std::to_string(p.index), fmt(p.nbar_est), fmt(p.impurity),
                          fmt(p.mean_excitation), fmt(p.dominant_hz), flag_col(p)});
        si.x.push_back(p.nbar_est);
        si.y.push_back(p.impurity);
        si.flagged.push_back(p.flagged());
        sf.x.push_back(p.nbar_est);
        sf.y.push_back(p.dominant_hz / 1e9);
        sf.flagged.push_back(p.flagged());
      }
      imp.push_back(std::move(si));
      freq.push_back(std::move(sf));
    }
    if (!ng && std::any_of(results.begin(), results.end(), [](const SweepResult& r) { return r.config.model != Model::shunted; }))
      missing_columns({"EL_over_EJ"}, figure);
    save(stem + "_points.csv", t.csv());
    save(stem + "_impurity.svg", svg_plot(ng ? "Impurity per offset charge" : "Impurity per E_L/E_J", "n_est",
                                          "impurity", imp));
    save(stem + "_stark.svg", svg_plot("Dominant probe line", "n_est", "frequency (GHz)", freq));
  }
  if (flagged > 0) {
    std::ostringstream os;
    os << flagged << " of " << total << " points are flagged; see the 'flagged' column";
    out.warnings.push_back(os.str());
  }
  return out;
}

}  // namespace jfloq
