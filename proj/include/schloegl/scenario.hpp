#pragma once

// Configuration-driven scenarios: the JSON schema, the runner and the trace
// comparison used by the command-line tool.
//
// Config keys (all objects required unless marked optional):
//   name                      string
//   grid      {n_nodes, length, nu}
//   reaction  {zeta: [z1, z2, z3]}
//   actuators {M, r}
//   target    {kind: "zero"}
//           | {kind: "sin_cos", amplitude, omega, wavenumber}
//           | {kind: "custom", expr}
//   z0                        expression in x
//   controller {kind: "free"}
//            | {kind: "explicit", lambda, bound, norm, variant}
//            | {kind: "rhc", horizon, shift, bound, norm, M1, optimizer?}
//     bound: number or "inf"; norm: "linf" | "l2";
//     variant: "oblique" | "orthogonal"
//     optimizer: {max_iters, tolerance, tau0, tau_min, tau_max, max_rejections}
//   time      {T, dt}
//   output    {dir, snapshot_interval, trace_stride, stabilization_ratio}
//   note                      optional free text

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schloegl/actuation.hpp"
#include "schloegl/diagnostics.hpp"
#include "schloegl/dynamics.hpp"
#include "schloegl/ocp.hpp"

namespace schloegl {

struct GridConfig {
  std::size_t n_nodes = 251;
  double length = 1.0;
  double nu = 0.1;
};

struct TargetConfig {
  std::string kind = "zero";
  double amplitude = 1.0;
  double omega = 3.0;
  double wavenumber = 1.0;
  std::string expr;
};

struct ControllerConfig {
  std::string kind = "free";
  double lambda = 0.0;
  double bound = 30.0;
  NormKind norm = NormKind::LInf;
  FeedbackVariant variant = FeedbackVariant::Oblique;
  double horizon = 1.0;
  double shift = 0.5;
  std::size_t M1 = 20;
  OptimizerOptions optimizer;
};

struct OutputConfig {
  std::string dir = "out";
  double snapshot_interval = 0.1;
  std::size_t trace_stride = 1;
  /// Runs with |z(T)|_H <= ratio * |z(0)|_H are reported as stabilized.
  double stabilization_ratio = 0.01;
};

struct ScenarioConfig {
  std::string name;
  GridConfig grid;
  ReactionParams reaction;
  std::size_t M = 4;
  double r = 0.1;
  TargetConfig target;
  std::string z0 = "0";
  ControllerConfig controller;
  double T = 15.0;
  double dt = 1e-3;
  OutputConfig output;
  std::string note;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  TargetSpec target_spec() const;
};

/// Parses and validates; ConfigError on unknown keys, missing keys or bad
/// values.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::string& path);
/// Pretty-printed JSON with every key present.
std::string serialize_config(const ScenarioConfig& config);

/// Switches to n_nodes = 1001, dt = 1e-4.
void apply_paper_profile(ScenarioConfig& config);

struct RunSummary {
  std::string name;
  std::string controller;
  int exit_code = 0;
  std::string error;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double reached_time = 0.0;
  double cost_state = 0.0;
  double cost_control = 0.0;
  double saturation_duty = 0.0;
  std::optional<double> last_saturated_time;
  bool stabilized = false;
  bool monotone_after_saturation = false;
  std::optional<DecayReport> decay;
  std::size_t windows = 0;
  std::size_t unconverged_windows = 0;
  double max_control_abs = 0.0;

  double cost() const { return cost_state + cost_control; }
};

struct ScenarioResult {
  RunSummary summary;
  SimTrace trace;
  std::vector<WindowReport> windows;
};

/// Runs the controller without touching the disk. Blow-up is reported with
/// exit code 3 and the partial trace.
ScenarioResult execute_scenario(const ScenarioConfig& config);

/// execute_scenario plus trace.csv, snapshots.json, summary.json and, for
/// receding horizon, windows.json under `out_dir`.
RunSummary run_scenario(const ScenarioConfig& config, const std::string& out_dir);

/// Columns t, normH, cost_state, cost_control, saturated of a trace CSV.
struct TraceTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<double> t;
  std::vector<double> norm_h;
  std::vector<double> cost_state;
  std::vector<double> cost_control;
  std::vector<int> saturated;
};

TraceTable read_trace_csv(const std::string& path);

/// One row per trace: final norm, fitted rate, total cost, saturation duty
/// cycle and the differences to the first trace. ConfigError listing the
/// mismatches when the traces do not share T and dt.
std::string compare_traces(const std::vector<TraceTable>& traces);

/// Poincare constants for M in {1, 2, 4, 8} on the config grid (entries
/// the grid cannot resolve are reported as errors), the M-lambda ratio for
/// the config family and a convergence study for the config target.
std::string diagnose_json(const ScenarioConfig& config);

}  // namespace schloegl
