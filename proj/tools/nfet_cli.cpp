// Command-line front end: design, sweep, bench, validate, spectrum.
//
// NFET_SOLVER_VERBOSE=1 prints one line per interior-point iteration to stderr.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfet/config.hpp"
#include "nfet/error.hpp"
#include "nfet/export.hpp"
#include "nfet/harness.hpp"
#include "nfet/subspace.hpp"
#include "nfet/validate.hpp"

namespace {

// Output file, or stdout when the path is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw nfet::ConfigError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace nfet;
  CLI::App app{"Near-field extended-target transmit design"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;

  auto* design_cmd = app.add_subcommand("design", "Solve one scenario with one method");
  std::string method_name = "proposed-reduced";
  design_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  design_cmd->add_option("--method", method_name, "proposed-full | proposed-reduced | focus | point-target | trm-et");
  design_cmd->add_option("--out", out_path, "Write the solution JSON here");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one scenario axis over several methods");
  std::string axis_name;
  std::vector<double> grid;
  std::vector<std::string> method_names;
  int jobs = 1;
  bool keep_geometry = false;
  sweep_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--axis", axis_name, "y_c [m] | L [m] | phi [deg] | P_max [dBW] | N")->required();
  sweep_cmd->add_option("--grid", grid, "Strictly increasing values")->required()->delimiter(',');
  sweep_cmd->add_option("--methods", method_names, "Methods to run (default: all)")->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "Grid points solved concurrently")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--keep-geometry", keep_geometry, "P_max sweeps: keep the configured target size");
  sweep_cmd->add_option("--out", out_path, "CSV path (default: stdout)");

  auto* bench_cmd = app.add_subcommand("bench", "Time full against reduced SDR over array sizes");
  std::vector<int> sizes{16, 32, 48, 64, 96, 128};
  int repeats = 3;
  double budget_ms = 120000.0;
  bench_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--sizes", sizes, "Array sizes")->delimiter(',');
  bench_cmd->add_option("--repeats", repeats, "Timed runs per size (median reported)")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--budget-ms", budget_ms, "First runs slower than this are not repeated (censored)");
  bench_cmd->add_option("--out", out_path, "CSV path (default: stdout)");

  auto* validate_cmd = app.add_subcommand("validate", "Run the invariant suite at N <= 16");
  double tol_override = 0.0;
  bool inject_sign_flip = false;
  validate_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--subspace-tol", tol_override, "Basis tolerance for the projection identities");
  validate_cmd->add_flag("--inject-sign-flip", inject_sign_flip, "Test hook: negate F_1 before forming Q");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Generator singular values (index,sigma,kept)");
  spectrum_cmd->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  spectrum_cmd->add_option("--out", out_path, "CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    const config::ScenarioConfig cfg = config::load(config_path);

    if (*design_cmd) {
      const harness::Method method = harness::parse_method(method_name);
      const config::Scenario sc = config::build_scenario(cfg);
      const harness::DesignRun run = harness::run_method(sc, method);
      harness::write_header(std::cout);
      harness::write_row(std::cout, run.row);
      if (!run.solution.diagnostics.message.empty()) std::cerr << run.solution.diagnostics.message << '\n';
      if (!run.report.checks.empty()) std::cerr << run.report.summary();
      if (!out_path.empty()) {
        Sink sink(out_path);
        io::write_solution(sink.stream(), sc, method, run);
      }
      return run.solution.ok() && run.report.passed() ? 0 : 1;
    }

    if (*sweep_cmd) {
      harness::SweepSpec spec;
      spec.axis = harness::parse_axis(axis_name);
      spec.grid = grid;
      if (!method_names.empty()) {
        spec.methods.clear();
        for (const auto& m : method_names) spec.methods.push_back(harness::parse_method(m));
      }
      spec.jobs = jobs;
      spec.power_geometry = !keep_geometry;
      Sink sink(out_path);
      harness::run_sweep(cfg, spec, &sink.stream(), &std::cerr);
      return 0;
    }

    if (*bench_cmd) {
      harness::BenchSpec spec;
      spec.sizes = sizes;
      spec.repeats = repeats;
      spec.budget_ms = budget_ms;
      Sink sink(out_path);
      harness::run_bench(cfg, spec, &sink.stream(), &std::cerr);
      return 0;
    }

    if (*validate_cmd) {
      validate::Options opt;
      if (tol_override > 0.0) opt.subspace_tol = tol_override;
      opt.flip_derivative_sign = inject_sign_flip;
      const validate::Report rep = validate::run_validate(cfg, opt);
      std::cout << rep.summary();
      return rep.passed() ? 0 : 1;
    }

    if (*spectrum_cmd) {
      const config::Scenario sc = config::build_scenario(cfg);
      Sink sink(out_path);
      subspace::write_spectrum_csv(*sc.problem.basis, sink.stream());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
