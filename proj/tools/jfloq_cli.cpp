#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "jfloq/jfloq.h"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kPartialFailure = 2, kValidationFailure = 3 };

struct Options {
  std::string config;
  std::string preset = "ci";
  std::string model;
  std::string out;
  std::string input;
  int workers = 0;
  int figure = 1;
};

int report_error(jfloq_status s, const char* what) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, jfloq_last_error(), jfloq_status_name(s));
  return kConfigError;
}

// The caller owns the handle.
jfloq_status load(const Options& o, const char* default_model, jfloq_config** cfg) {
  if (!o.config.empty()) return jfloq_config_load(o.config.c_str(), cfg);
  const std::string model = o.model.empty() ? default_model : o.model;
  return jfloq_config_preset(model.c_str(), o.preset.c_str(), cfg);
}

std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  jfloq_string_free(s);
  return out;
}

std::string out_dir(const Options& o, const jfloq_config* cfg) {
  if (!o.out.empty()) return o.out;
  char* dir = nullptr;
  if (jfloq_config_output_dir(cfg, &dir) != JFLOQ_OK) return "out";
  return take(dir);
}

void print_table(const jfloq_results* res) {
  for (size_t s = 0; s < jfloq_results_num_sweeps(res); ++s) {
    char* name = nullptr;
    jfloq_results_sweep_name(res, s, &name);
    std::printf("# %s\n", take(name).c_str());
    std::printf("%6s %10s %9s %10s %10s %8s %14s %12s %6s\n", "index", "n_est", "xi", "impurity", "mean_exc", "p0",
                "dominant_GHz", "kerr_kHz", "flags");
    for (size_t i = 0; i < jfloq_results_num_points(res, s); ++i) {
      jfloq_point p;
      jfloq_results_point(res, s, i, &p);
      if (!p.ok) {
        std::printf("%6zu %10.3f  failed: %s\n", i, p.nbar_est, jfloq_status_name(p.error));
        continue;
      }
      std::printf("%6zu %10.3f %9.4f %10.3e %10.4f %8.4f %14.6f %12.3f %6zu\n", i, p.nbar_est, p.xi, p.impurity,
                  p.mean_excitation, p.ground_population, p.dominant_hz / 1e9,
                  p.kerr_ok ? p.kerr_hz / 1e3 : std::nan(""), p.num_flags);
    }
  }
}

int cmd_spectrum(const Options& o) {
  jfloq_config* cfg = nullptr;
  jfloq_status s = load(o, "unshunted", &cfg);
  if (s != JFLOQ_OK) return report_error(s, "configuration");
  jfloq_spectrum sp;
  s = jfloq_spectrum_compute(cfg, &sp);
  jfloq_config_free(cfg);
  if (s != JFLOQ_OK) return report_error(s, "spectrum");
  std::printf("cavity          %12.6f GHz\n", sp.cavity_hz / 1e9);
  std::printf("qubit           %12.6f GHz\n", sp.qubit_hz / 1e9);
  std::printf("anharmonicity   %12.3f MHz\n", sp.anharmonicity_hz / 1e6);
  std::printf("cavity Kerr     %12.3f kHz\n", sp.self_kerr_hz / 1e3);
  std::printf("cross-Kerr      %12.3f MHz\n", sp.cross_kerr_hz / 1e6);
  if (sp.confined_levels > 0) std::printf("confined levels %12.0f\n", sp.confined_levels);
  return kOk;
}

int cmd_run(const Options& o, jfloq_study study, const char* default_model) {
  jfloq_config* cfg = nullptr;
  jfloq_status s = load(o, default_model, &cfg);
  if (s != JFLOQ_OK) return report_error(s, "configuration");
  const std::string dir = out_dir(o, cfg);
  jfloq_results* res = nullptr;
  s = jfloq_run(cfg, study, o.workers, &res);
  jfloq_config_free(cfg);
  if (s != JFLOQ_OK) return report_error(s, "run");
  print_table(res);
  s = jfloq_results_write(res, dir.c_str());
  const size_t failures = jfloq_results_num_failures(res);
  jfloq_results_free(res);
  if (s != JFLOQ_OK) return report_error(s, "write");
  std::printf("results written to %s\n", dir.c_str());
  if (failures > 0) {
    std::fprintf(stderr, "%zu point(s) failed; see the per-point records\n", failures);
    return kPartialFailure;
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  jfloq_config* cfg = nullptr;
  jfloq_status s = load(o, "unshunted", &cfg);
  if (s != JFLOQ_OK) return report_error(s, "configuration");
  jfloq_validation v;
  char* json = nullptr;
  s = jfloq_validate(cfg, &v, &json);
  jfloq_config_free(cfg);
  if (s == JFLOQ_ERR_CONFIGURATION || s == JFLOQ_ERR_INVALID_ARGUMENT) return report_error(s, "configuration");
  if (s != JFLOQ_OK) {
    std::fprintf(stderr, "validation failed: %s (%s)\n", jfloq_last_error(), jfloq_status_name(s));
    return kValidationFailure;
  }
  const std::string text = take(json);
  std::printf("%s\n", text.c_str());
  if (!o.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    const std::string path = (std::filesystem::path(o.out) / "validation.json").string();
    if (FILE* f = std::fopen(path.c_str(), "w")) {
      std::fputs(text.c_str(), f);
      std::fputc('\n', f);
      std::fclose(f);
    } else {
      std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
      return kConfigError;
    }
  }
  std::printf("max trace distance %.3e, min fidelity %.6f, monotone %s: %s\n", v.max_trace_distance, v.min_fidelity,
              v.monotone ? "yes" : "no", v.passed ? "PASS" : "FAIL");
  return v.passed ? kOk : kValidationFailure;
}

int cmd_emit(const Options& o) {
  jfloq_results* res = nullptr;
  jfloq_status s = jfloq_results_read(o.input.c_str(), &res);
  if (s != JFLOQ_OK) return report_error(s, "reading results");
  const std::string dir = o.out.empty() ? (std::filesystem::path(o.input) / "figures").string() : o.out;
  char* warnings = nullptr;
  s = jfloq_results_emit(res, o.figure, dir.c_str(), &warnings);
  jfloq_results_free(res);
  const std::string w = take(warnings);
  if (!w.empty()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (s != JFLOQ_OK) return report_error(s, "emit-figures");
  std::printf("figure %d written to %s\n", o.figure, dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Markov steady states of pumped transmon circuits"};
  app.set_version_flag("--version", std::string(jfloq_version()));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "Preset scale when no config is given")
        ->check(CLI::IsMember({"paper", "ci"}));
    sub->add_option("--model", o.model, "Preset model")->check(CLI::IsMember({"unshunted", "shunted", "shunted_alt"}));
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* spectrum = app.add_subcommand("spectrum", "Static dressed spectrum at zero pump");
  add_common(spectrum);
  auto* sweep = app.add_subcommand("sweep", "Pump-power sweep");
  add_common(sweep);
  sweep->add_option("--workers", o.workers, "Worker threads (default: from config)")->check(CLI::PositiveNumber);
  auto* ng = app.add_subcommand("ng-study", "One sweep per offset charge");
  add_common(ng);
  ng->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* ratio = app.add_subcommand("ratio-study", "One sweep per E_L/E_J at fixed E_J + E_L");
  add_common(ratio);
  ratio->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "Compare against the direct master equation");
  add_common(validate);
  auto* emit = app.add_subcommand("emit-figures", "Figure data and SVG from stored results");
  emit->add_option("input", o.input, "Results directory of sweep, ng-study or ratio-study")
      ->required()
      ->check(CLI::ExistingDirectory);
  emit->add_option("--figure", o.figure, "Figure number")->required()->check(CLI::Range(1, 5));
  emit->add_option("--out", o.out, "Output directory (default: <input>/figures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*spectrum) return cmd_spectrum(o);
  if (*sweep) return cmd_run(o, JFLOQ_STUDY_SWEEP, "unshunted");
  if (*ng) return cmd_run(o, JFLOQ_STUDY_NG, "unshunted");
  if (*ratio) return cmd_run(o, JFLOQ_STUDY_RATIO, "shunted_alt");
  if (*validate) return cmd_validate(o);
  if (*emit) return cmd_emit(o);
  return kConfigError;
}
