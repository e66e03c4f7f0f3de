#include "jfloq/jfloq.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "jfloq/sweep.hpp"

struct jfloq_config {
  jfloq::SweepConfig cfg;
};

struct jfloq_results {
  std::vector<jfloq::SweepResult> sweeps;
};

namespace {

thread_local std::string g_last_error;

jfloq_status status_of(jfloq::ErrorCode c) {
  using E = jfloq::ErrorCode;
  switch (c) {
    case E::invalid_dimension: return JFLOQ_ERR_INVALID_DIMENSION;
    case E::shape: return JFLOQ_ERR_SHAPE;
    case E::contract_violation: return JFLOQ_ERR_CONTRACT;
    case E::configuration: return JFLOQ_ERR_CONFIGURATION;
    case E::singular_frame: return JFLOQ_ERR_SINGULAR_FRAME;
    case E::unstable_frame: return JFLOQ_ERR_UNSTABLE_FRAME;
    case E::convergence: return JFLOQ_ERR_CONVERGENCE;
    case E::integration_failure: return JFLOQ_ERR_INTEGRATION;
    case E::numerical: return JFLOQ_ERR_NUMERICAL;
    case E::numerical_rank: return JFLOQ_ERR_NUMERICAL_RANK;
    case E::aliasing: return JFLOQ_ERR_ALIASING;
    case E::precondition: return JFLOQ_ERR_PRECONDITION;
    case E::timeout: return JFLOQ_ERR_TIMEOUT;
    case E::truncation: return JFLOQ_ERR_TRUNCATION;
    case E::ladder_identification: return JFLOQ_ERR_LADDER;
    case E::io: return JFLOQ_ERR_IO;
  }
  return JFLOQ_ERR_INTERNAL;
}

jfloq_status status_of_name(const std::string& name) {
  for (int c = 0; c <= static_cast<int>(jfloq::ErrorCode::io); ++c) {
    const auto code = static_cast<jfloq::ErrorCode>(c);
    if (name == jfloq::to_string(code)) return status_of(code);
  }
  return name.empty() ? JFLOQ_OK : JFLOQ_ERR_INTERNAL;
}

jfloq_status fail_with(jfloq_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
jfloq_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return JFLOQ_OK;
  } catch (const jfloq::Error& e) {
    return fail_with(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(JFLOQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(JFLOQ_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define JFLOQ_REQUIRE(cond, msg) \
  if (!(cond)) return fail_with(JFLOQ_ERR_INVALID_ARGUMENT, msg)

const jfloq::PointReport* point_at(const jfloq_results* res, size_t sweep, size_t index) {
  if (res == nullptr || sweep >= res->sweeps.size() || index >= res->sweeps[sweep].points.size()) return nullptr;
  return &res->sweeps[sweep].points[index];
}

}  // namespace

extern "C" {

const char* jfloq_version(void) { return jfloq::version(); }

const char* jfloq_status_name(jfloq_status status) {
  switch (status) {
    case JFLOQ_OK: return "ok";
    case JFLOQ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case JFLOQ_ERR_INTERNAL: return "internal error";
    default: break;
  }
  for (int c = 0; c <= static_cast<int>(jfloq::ErrorCode::io); ++c) {
    const auto code = static_cast<jfloq::ErrorCode>(c);
    if (status_of(code) == status) return jfloq::to_string(code);
  }
  return "unknown status";
}

const char* jfloq_last_error(void) { return g_last_error.c_str(); }

void jfloq_string_free(char* s) { std::free(s); }

jfloq_status jfloq_config_preset(const char* model, const char* scale, jfloq_config** out) {
  JFLOQ_REQUIRE(model != nullptr && scale != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new jfloq_config{jfloq::preset(model, scale)}; });
}

jfloq_status jfloq_config_from_json(const char* text, jfloq_config** out) {
  JFLOQ_REQUIRE(text != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new jfloq_config{jfloq::config_from_json(text)}; });
}

jfloq_status jfloq_config_load(const char* path, jfloq_config** out) {
  JFLOQ_REQUIRE(path != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new jfloq_config{jfloq::load_config(path)}; });
}

jfloq_status jfloq_config_to_json(const jfloq_config* cfg, char** out) {
  JFLOQ_REQUIRE(cfg != nullptr && out != nullptr, "null argument");
  return guarded([&] { *out = dup_string(jfloq::to_json(cfg->cfg)); });
}

jfloq_status jfloq_config_set_grid(jfloq_config* cfg, const double* values, size_t n) {
  JFLOQ_REQUIRE(cfg != nullptr && (values != nullptr || n == 0), "null argument");
  return guarded([&] {
    jfloq::SweepConfig c = cfg->cfg;
    c.grid.assign(values, values + n);
    c.validate();
    cfg->cfg = std::move(c);
  });
}

jfloq_status jfloq_config_set_workers(jfloq_config* cfg, int workers) {
  JFLOQ_REQUIRE(cfg != nullptr, "null argument");
  JFLOQ_REQUIRE(workers >= 1, "workers must be >= 1");
  cfg->cfg.workers = workers;
  return JFLOQ_OK;
}

jfloq_status jfloq_config_output_dir(const jfloq_config* cfg, char** out) {
  JFLOQ_REQUIRE(cfg != nullptr && out != nullptr, "null argument");
  return guarded([&] { *out = dup_string(cfg->cfg.output_dir); });
}

void jfloq_config_free(jfloq_config* cfg) { delete cfg; }

jfloq_status jfloq_spectrum_compute(const jfloq_config* cfg, jfloq_spectrum* out) {
  JFLOQ_REQUIRE(cfg != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    const jfloq::StaticReport r = jfloq::static_report(cfg->cfg);
    out->cavity_hz = r.spectrum.cavity_hz;
    out->qubit_hz = r.spectrum.qubit_hz;
    out->anharmonicity_hz = r.spectrum.anharmonicity_hz;
    out->self_kerr_hz = r.spectrum.self_kerr_hz;
    out->cross_kerr_hz = r.spectrum.cross_kerr_hz;
    out->confined_levels = r.has_confinement ? r.confinement.confined_levels : 0.0;
  });
}

jfloq_status jfloq_run(const jfloq_config* cfg, jfloq_study study, int workers, jfloq_results** out) {
  JFLOQ_REQUIRE(cfg != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto res = std::make_unique<jfloq_results>();
    switch (study) {
      case JFLOQ_STUDY_SWEEP: res->sweeps.push_back(jfloq::run_sweep(cfg->cfg, workers)); break;
      case JFLOQ_STUDY_NG: res->sweeps = jfloq::run_ng_study(cfg->cfg, workers); break;
      case JFLOQ_STUDY_RATIO: res->sweeps = jfloq::run_ratio_study(cfg->cfg, workers); break;
      default: jfloq::fail(jfloq::ErrorCode::configuration, "unknown study kind");
    }
    *out = res.release();
  });
}

jfloq_status jfloq_results_read(const char* dir, jfloq_results** out) {
  JFLOQ_REQUIRE(dir != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    namespace fs = std::filesystem;
    auto res = std::make_unique<jfloq_results>();
    if (fs::exists(fs::path(dir) / "config.json")) {
      res->sweeps.push_back(jfloq::read_sweep(dir));
    } else {
      std::vector<fs::path> subs;
      std::error_code ec;
      for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_directory() && fs::exists(e.path() / "config.json")) subs.push_back(e.path());
      if (ec) jfloq::fail(jfloq::ErrorCode::io, "cannot list '" + std::string(dir) + "'");
      std::sort(subs.begin(), subs.end());
      for (const auto& s : subs) res->sweeps.push_back(jfloq::read_sweep(s.string()));
    }
    if (res->sweeps.empty()) jfloq::fail(jfloq::ErrorCode::io, "no sweep results under '" + std::string(dir) + "'");
    *out = res.release();
  });
}

jfloq_status jfloq_results_write(const jfloq_results* res, const char* dir) {
  JFLOQ_REQUIRE(res != nullptr && dir != nullptr, "null argument");
  return guarded([&] {
    if (res->sweeps.size() == 1) {
      jfloq::write_sweep(res->sweeps.front(), dir);
      return;
    }
    for (const auto& s : res->sweeps) jfloq::write_sweep(s, (std::filesystem::path(dir) / s.config.name).string());
  });
}

size_t jfloq_results_num_sweeps(const jfloq_results* res) { return res == nullptr ? 0 : res->sweeps.size(); }

size_t jfloq_results_num_points(const jfloq_results* res, size_t sweep) {
  if (res == nullptr || sweep >= res->sweeps.size()) return 0;
  return res->sweeps[sweep].points.size();
}

size_t jfloq_results_num_failures(const jfloq_results* res) {
  size_t n = 0;
  if (res != nullptr)
    for (const auto& s : res->sweeps) n += static_cast<size_t>(s.failures());
  return n;
}

jfloq_status jfloq_results_sweep_name(const jfloq_results* res, size_t sweep, char** out) {
  JFLOQ_REQUIRE(res != nullptr && out != nullptr, "null argument");
  JFLOQ_REQUIRE(sweep < res->sweeps.size(), "sweep index out of range");
  return guarded([&] { *out = dup_string(res->sweeps[sweep].config.name); });
}

jfloq_status jfloq_results_point(const jfloq_results* res, size_t sweep, size_t index, jfloq_point* out) {
  JFLOQ_REQUIRE(out != nullptr, "null argument");
  const jfloq::PointReport* p = point_at(res, sweep, index);
  JFLOQ_REQUIRE(p != nullptr, "point index out of range");
  *out = jfloq_point{};
  out->grid_value = p->grid_value;
  out->nbar_est = p->nbar_est;
  out->A_p_over_2pi_MHz = p->A_p_over_2pi_MHz;
  out->xi = p->xi;
  out->ok = p->ok ? 1 : 0;
  out->error = status_of_name(p->error_code);
  out->impurity = p->impurity;
  out->mean_excitation = p->mean_excitation;
  out->ground_population = p->populations.empty() ? 0.0 : p->populations.front();
  out->leakage = p->leakage;
  out->dominant_hz = p->dominant_hz;
  out->dominant_ratio = p->dominant_ratio;
  out->kerr_ok = p->kerr_ok ? 1 : 0;
  out->kerr_hz = p->kerr_hz;
  out->has_averaged = p->has_averaged ? 1 : 0;
  out->averaged_frequency_hz = p->averaged_frequency_hz;
  out->averaged_kerr_hz = p->averaged_kerr_hz;
  out->num_lines = p->lines.size();
  out->num_flags = p->flags.size();
  g_last_error.clear();
  return JFLOQ_OK;
}

jfloq_status jfloq_results_populations(const jfloq_results* res, size_t sweep, size_t index, double* values,
                                       size_t n, size_t* count) {
  const jfloq::PointReport* p = point_at(res, sweep, index);
  JFLOQ_REQUIRE(p != nullptr, "point index out of range");
  JFLOQ_REQUIRE(values != nullptr || n == 0, "null argument");
  const size_t m = std::min(n, p->populations.size());
  std::copy_n(p->populations.begin(), m, values);
  if (count != nullptr) *count = p->populations.size();
  g_last_error.clear();
  return JFLOQ_OK;
}

jfloq_status jfloq_results_emit(const jfloq_results* res, int figure, const char* dir, char** warnings) {
  JFLOQ_REQUIRE(res != nullptr && dir != nullptr, "null argument");
  if (warnings != nullptr) *warnings = nullptr;
  return guarded([&] {
    const jfloq::EmitResult e = jfloq::emit_figures(res->sweeps, figure, dir);
    if (warnings != nullptr) {
      std::string joined;
      for (const auto& w : e.warnings) joined += (joined.empty() ? "" : "\n") + w;
      *warnings = dup_string(joined);
    }
  });
}

void jfloq_results_free(jfloq_results* res) { delete res; }

jfloq_status jfloq_validate(const jfloq_config* cfg, jfloq_validation* out, char** json) {
  JFLOQ_REQUIRE(cfg != nullptr && out != nullptr, "null argument");
  if (json != nullptr) *json = nullptr;
  return guarded([&] {
    const jfloq::ValidationReport r = jfloq::validate_oracle(cfg->cfg);
    *out = jfloq_validation{};
    out->passed = r.passed() ? 1 : 0;
    out->within_tolerance = r.within_tolerance ? 1 : 0;
    out->monotone = r.monotone ? 1 : 0;
    out->num_kappa = r.points.size();
    out->min_fidelity = 1.0;
    for (const auto& p : r.points) {
      out->max_trace_distance = std::max(out->max_trace_distance, p.trace_distance);
      out->min_fidelity = std::min(out->min_fidelity, p.fidelity);
    }
    if (json != nullptr) *json = dup_string(jfloq::validation_to_json(r));
  });
}

}  // extern "C"
