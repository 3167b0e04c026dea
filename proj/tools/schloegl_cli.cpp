// Command-line front end: run, compare, diagnose and validate scenarios.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration,
// 3 simulation blow-up (partial outputs are written).

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schloegl/errors.hpp"
#include "schloegl/scenario.hpp"

namespace {

using namespace schloegl;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

ScenarioConfig load(const std::string& path, bool paper) {
  ScenarioConfig c = load_config(path);
  if (paper) {
    apply_paper_profile(c);
    c.validate();
  }
  return c;
}

int run_one(const std::string& path, bool paper, const std::string& out_override) {
  const ScenarioConfig c = load(path, paper);
  const std::string dir = out_override.empty() ? c.output.dir : out_override + "/" + c.name;
  const RunSummary s = run_scenario(c, dir);
  std::printf("%s: %s |z(0)|_H %.6g |z(%g)|_H %.6g J %.6g%s%s -> %s\n", c.name.c_str(),
              s.controller.c_str(), s.initial_norm, s.reached_time, s.final_norm, s.cost(),
              s.stabilized ? "" : " [not stabilized]",
              s.unconverged_windows > 0 ? " [optimizer warning]" : "", dir.c_str());
  if (s.exit_code != 0) std::fprintf(stderr, "%s: %s\n", c.name.c_str(), s.error.c_str());
  return s.exit_code;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilization of the Schloegl equation by saturated feedback and receding horizon control"};
  app.require_subcommand(1);

  bool paper = false;
  std::string out_override;
  std::size_t jobs = 1;
  std::vector<std::string> run_configs;
  auto* run = app.add_subcommand("run", "run one or more scenario configs");
  run->add_option("configs", run_configs, "scenario config files")->required()->check(CLI::ExistingFile);
  run->add_flag("--paper", paper, "use n_nodes = 1001, dt = 1e-4");
  run->add_option("--out", out_override, "write each run to <out>/<name> instead of output.dir");
  run->add_option("-j,--jobs", jobs, "scenarios run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> traces;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "tabulate trace CSV files");
  compare->add_option("traces", traces, "trace.csv files")->required()->check(CLI::ExistingFile);
  compare->add_option("-o,--output", compare_out, "write the table here instead of stdout");

  std::string diag_config, diag_out;
  auto* diagnose = app.add_subcommand("diagnose", "Poincare constants, M-lambda ratio, convergence");
  diagnose->add_option("config", diag_config, "scenario config")->required()->check(CLI::ExistingFile);
  diagnose->add_flag("--paper", paper, "use n_nodes = 1001, dt = 1e-4");
  diagnose->add_option("-o,--output", diag_out, "write the JSON report here instead of stdout");

  std::vector<std::string> validate_configs;
  bool print_config = false;
  auto* validate = app.add_subcommand("validate", "check configs without running them");
  validate->add_option("configs", validate_configs, "scenario config files")->required();
  validate->add_flag("--print", print_config, "print the normalized config");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::vector<int> codes(run_configs.size(), 0);
    for (std::size_t start = 0; start < run_configs.size(); start += jobs) {
      const std::size_t stop = std::min(run_configs.size(), start + jobs);
      std::vector<std::future<int>> batch;
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(std::async(std::launch::async, [&, i] {
          return guarded([&] { return run_one(run_configs[i], paper, out_override); });
        }));
      for (std::size_t i = start; i < stop; ++i) codes[i] = batch[i - start].get();
    }
    return *std::max_element(codes.begin(), codes.end());
  }

  if (compare->parsed()) {
    return guarded([&] {
      std::vector<TraceTable> tables;
      for (const std::string& p : traces) tables.push_back(read_trace_csv(p));
      const std::string table = compare_traces(tables);
      if (compare_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream(compare_out) << table;
      }
      return 0;
    });
  }

  if (diagnose->parsed()) {
    return guarded([&] {
      const std::string report = diagnose_json(load(diag_config, paper));
      if (diag_out.empty()) {
        std::cout << report;
      } else {
        std::ofstream(diag_out) << report;
      }
      return 0;
    });
  }

  int worst = 0;
  for (const std::string& path : validate_configs) {
    const int code = guarded([&] {
      const ScenarioConfig c = load_config(path);
      if (print_config) std::cout << serialize_config(c);
      std::printf("%s: ok\n", path.c_str());
      return 0;
    });
    worst = std::max(worst, code);
  }
  return worst;
}
