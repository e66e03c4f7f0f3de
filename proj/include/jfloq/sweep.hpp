#pragma once

#include <string>
#include <vector>

#include "jfloq/observables.hpp"

namespace jfloq {

enum class PumpAxis { nbar_est, amplitude, xi };
const char* to_string(PumpAxis a);
const char* to_string(Model m);

struct TruncationConfig {
  int n_max = 25;   // unshunted charge window -n_max..n_max
  int n_fock = 10;  // unshunted oscillator
  int n_b = 20;     // shunted junction-like mode
  int n_a = 10;     // shunted oscillator-like mode
  PhysicalDims physical;  // shunted back-transformation
  double leak_tol = 1e-4;
};

struct FloquetConfig {
  int steps_per_period = 0;  // 0: 256 (unshunted) or 128 (shunted)
  Integrator integrator = Integrator::cf4;
  ExpMethod exp_method = ExpMethod::automatic;
  int n_t = 64;
  int K = 20;
};

struct NoiseConfig {
  double kappa_over_2pi_kHz = 100.0;
  double temperature_K = 0.0;
};

/// Small instance for the direct master-equation comparison.
struct ValidationConfig {
  int n_max = 4;   // unshunted charge window
  int n_fock = 4;  // unshunted oscillator
  int n_b = 6;     // shunted
  int n_a = 5;     // shunted
  double nbar_est = 10.0;
  std::vector<double> kappa_over_omega_a{1e-3, 1e-4, 1e-5};
  int steps_per_period = 512;
  double max_trace_distance = 1e-2;
};

struct ObservableConfig {
  double window_half_width_MHz = 300.0;
  double relative_floor = 1e-4;
  bool kerr = true;
};

/// Everything needed to reproduce a sweep. Physical inputs carry their units
/// in the field names, as in the serialized form.
struct SweepConfig {
  std::string name = "sweep";
  Model model = Model::unshunted;
  double EC_over_h_MHz = 0.0;
  double EJ_over_h_GHz = 0.0;
  double EL_over_h_GHz = 0.0;
  double g_over_2pi_MHz = 0.0;
  double omega_a_over_2pi_GHz = 0.0;
  double omega_p_over_2pi_GHz = 0.0;
  double Ng = 0.0;

  PumpAxis axis = PumpAxis::nbar_est;
  std::vector<double> grid;  // n_est, A_p/2pi in MHz, or xi

  TruncationConfig truncation;
  FloquetConfig floquet;
  NoiseConfig noise;
  ObservableConfig observables;
  ValidationConfig validation;

  std::vector<double> ng_values{0.0, 0.25, 0.5};
  std::vector<double> ratios{1.0, 1.5, 2.0};  // E_L / E_J
  double ratio_sum_GHz = 6.66;                // (E_J + E_L)/h held fixed

  std::string output_dir = "out";
  int workers = 1;

  void validate() const;
  UnshuntedParams unshunted(double A_p) const;
  ShuntedParams shunted(double A_p) const;
  /// Pump amplitude (rad/s) for a grid value on the configured axis.
  double amplitude_for(double value) const;
  int steps() const;
};

std::string to_json(const SweepConfig& cfg);
/// Strict parser: unknown keys are configuration errors. An optional
/// "base_preset" ("<model>/<scale>") supplies every field not given.
SweepConfig config_from_json(const std::string& text);
SweepConfig load_config(const std::string& path);

/// model: unshunted | shunted | shunted_alt; scale: paper | ci.
SweepConfig preset(const std::string& model, const std::string& scale);

struct StaticReport {
  StaticSpectrum spectrum;
  bool has_confinement = false;  // unshunted only
  ConfinementEstimate confinement;
};

/// Dressed spectrum at A_p = 0 on the configured truncation.
StaticReport static_report(const SweepConfig& cfg);

struct PointReport {
  int index = 0;
  double grid_value = 0.0;
  double nbar_est = 0.0;
  double A_p_over_2pi_MHz = 0.0;
  double xi = 0.0;

  bool ok = false;
  std::string error_code;
  std::string error;

  std::vector<double> populations;  // over eta_k or nu_k
  double leakage = 0.0;
  double mean_excitation = 0.0;
  double impurity = 0.0;
  std::vector<double> frame_b_populations;  // shunted: Fock populations of b~

  std::vector<StarkLine> lines;
  double dominant_hz = 0.0;
  double dominant_ratio = 0.0;  // dominant weight / runner-up (inf when alone)

  bool kerr_ok = false;
  double kerr_hz = 0.0;
  std::string kerr_error;

  bool has_averaged = false;
  double averaged_frequency_hz = 0.0;
  double averaged_kerr_hz = 0.0;
  double omega_a_tilde_hz = 0.0;

  double unitarity_error = 0.0;
  double tail_fraction = 0.0;
  double symmetry_error = 0.0;
  double steady_residual = 0.0;
  double frame_edge_population = 0.0;
  double physical_edge_population = 0.0;
  double min_gap_hz = 0.0;
  int kernel_dim = 0;
  int dominant_mode = -1;
  int dominant_branch = -1;
  std::vector<std::string> flags;

  bool flagged() const { return !ok || !flags.empty(); }
};

struct SweepResult {
  SweepConfig config;
  std::vector<PointReport> points;
  std::vector<double> seconds;  // wall time per point, kept out of the numerical records
  int failures() const;
};

/// One grid point end to end: frame, propagator, Floquet modes, rates,
/// steady state and observables. Errors are captured in the report.
PointReport run_point(const SweepConfig& cfg, int index, Mat* modes_out = nullptr);

/// All grid points on a fixed pool of workers; results keep grid order and do
/// not depend on the worker count.
SweepResult run_sweep(const SweepConfig& cfg, int workers = 0);
/// One sweep per offset charge in cfg.ng_values.
std::vector<SweepResult> run_ng_study(const SweepConfig& cfg, int workers = 0);
/// One sweep per E_L/E_J ratio at fixed E_J + E_L.
std::vector<SweepResult> run_ratio_study(const SweepConfig& cfg, int workers = 0);
/// The shunted configuration for one ratio; validates the sum constraint.
SweepConfig ratio_config(const SweepConfig& cfg, double ratio);

struct ValidationPoint {
  double kappa_over_2pi_hz = 0.0;
  double trace_distance = 0.0;
  double fidelity = 0.0;
  double oracle_residual = 0.0;
  double oracle_trace_error = 0.0;
  double oracle_min_eigenvalue = 0.0;
  double quadrature_change = 0.0;
  double impurity_floquet = 0.0;
  double impurity_oracle = 0.0;
};

struct ValidationReport {
  Model model = Model::unshunted;
  int dim = 0;
  double nbar_est = 0.0;
  double min_gap_hz = 0.0;
  std::vector<ValidationPoint> points;
  bool within_tolerance = false;  // every distance below max_trace_distance
  bool monotone = false;          // distance non-increasing as kappa decreases
  bool passed() const { return within_tolerance && monotone; }
};

/// Floquet-Markov steady state against the direct Lindblad periodic steady
/// state on the small instance of cfg.validation, for each kappa.
ValidationReport validate_oracle(const SweepConfig& cfg);
std::string validation_to_json(const ValidationReport& r);

std::string report_to_json(const PointReport& r);
PointReport report_from_json(const std::string& text);

/// Writes config.json, manifest.json, points/*.json, summary.csv, lines.csv,
/// populations.csv and timing.json into dir.
void write_sweep(const SweepResult& result, const std::string& dir);
SweepResult read_sweep(const std::string& dir);
std::string config_digest(const SweepConfig& cfg);

struct EmitResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Figure data (CSV, the contract) and a basic SVG rendering for figure 1..5.
/// Flagged points are kept and marked in a `flagged` column; with
/// allow_flag_column = false, mixing flagged and clean points is an error.
EmitResult emit_figures(const std::vector<SweepResult>& results, int figure, const std::string& dir,
                        bool allow_flag_column = true);

const char* version();

}  // namespace jfloq
