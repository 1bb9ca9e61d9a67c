// guslite — trace-driven performance simulator for out-of-order cores.
//
// Subcommands:
//   simulate     predict cycles for a trace or kernel on a machine model
//   sensitivity  re-simulate under scaled capacities and rank bottlenecks
//   report       per-instruction resource usage and causality shares
//   gen-kernel   expand a kernel description into a trace file
//
// Exit codes: 0 success, 1 bad input, 2 internal invariant violation.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "guslite/analysis.hpp"
#include "guslite/engine.hpp"
#include "guslite/error.hpp"

namespace {

using namespace guslite;

struct CommonOpts {
  std::string model_path;
  std::string trace_path;
  std::string kernel_path;
  std::vector<std::string> trips;
  std::string format = "text";
  std::string out_path;
  bool assert_invariants = false;
  std::uint64_t seed = 0;  // reserved for future stochastic features
};

void add_input_flags(CLI::App* cmd, CommonOpts& opts, bool need_model) {
  if (need_model)
    cmd->add_option("--model", opts.model_path, "machine model JSON file")
        ->required();
  auto* trace =
      cmd->add_option("--trace", opts.trace_path, "trace file (JSON lines)");
  auto* kernel =
      cmd->add_option("--kernel", opts.kernel_path, "kernel JSON file");
  trace->excludes(kernel);
  cmd->add_option("--trips", opts.trips,
                  "trip-count overrides, var=N (kernel input only)")
      ->delimiter(',');
  cmd->add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", opts.out_path, "output path (default stdout)");
  cmd->add_flag("--assert-invariants", opts.assert_invariants,
                "enable debug monotonicity checks");
  cmd->add_option("--seed", opts.seed, "reserved");
}

std::map<std::string, std::uint64_t> parse_trips(
    const std::vector<std::string>& trips) {
  std::map<std::string, std::uint64_t> out;
  for (const std::string& t : trips) {
    auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw input_error("bad trip override '" + t + "' (want var=N)");
    try {
      out[t.substr(0, eq)] = std::stoull(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw input_error("bad trip override '" + t + "' (want var=N)");
    }
  }
  return out;
}

TraceSource make_source(const CommonOpts& opts) {
  if (!opts.trace_path.empty()) {
    if (!opts.trips.empty())
      throw input_error("--trips applies only to kernel inputs");
    return source_from_file(opts.trace_path);
  }
  if (!opts.kernel_path.empty()) {
    KernelSpec spec = load_kernel_file(opts.kernel_path);
    if (!opts.trips.empty())
      spec = with_trip_counts(spec, parse_trips(opts.trips));
    return source_from_kernel(spec);
  }
  throw input_error("no input: pass --trace or --kernel");
}

void emit(const CommonOpts& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) throw input_error("cannot open output file: " + opts.out_path);
  out << text;
}

int cmd_simulate(const CommonOpts& opts) {
  MachineModel model = load_model_file(opts.model_path);
  SimOptions sim_opts{opts.assert_invariants, false};
  auto cursor = make_source(opts)();
  SimulationResult result = simulate(model, *cursor, sim_opts);
  emit(opts, opts.format == "json" ? result_to_json(result)
                                   : result_to_text(result));
  return 0;
}

int cmd_sensitivity(const CommonOpts& opts, const std::string& weights_csv,
                    const std::string& dims_csv,
                    const std::string& threshold_str) {
  MachineModel model = load_model_file(opts.model_path);
  SensitivityPlan plan = SensitivityPlan::defaults(model);
  if (!weights_csv.empty()) {
    plan.weights.clear();
    std::stringstream ss(weights_csv);
    std::string item;
    while (std::getline(ss, item, ',')) plan.weights.push_back(parse_rat(item));
  }
  if (!dims_csv.empty()) {
    plan.dimensions.clear();
    std::stringstream ss(dims_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      plan.dimensions.push_back(parse_dimension(item, model));
  }
  Rat threshold = parse_rat(threshold_str);
  SimOptions sim_opts{opts.assert_invariants, false};
  SensitivityResult result =
      guslite::run_sensitivity(model, make_source(opts), plan, 0, sim_opts);
  emit(opts, opts.format == "json" ? sensitivity_to_json(result)
                                   : sensitivity_to_text(result, threshold));
  return 0;
}

int cmd_report(const CommonOpts& opts) {
  MachineModel model = load_model_file(opts.model_path);
  SimOptions sim_opts{opts.assert_invariants, true};
  auto cursor = make_source(opts)();
  SimulationResult result = simulate(model, *cursor, sim_opts);
  PcReport report = per_pc_report(result, model);
  emit(opts, opts.format == "json" ? report_to_json(report, result)
                                   : report_to_text(report, result));
  return 0;
}

int cmd_gen_kernel(const CommonOpts& opts) {
  if (opts.kernel_path.empty()) throw input_error("gen-kernel needs --kernel");
  KernelSpec spec = load_kernel_file(opts.kernel_path);
  if (!opts.trips.empty())
    spec = with_trip_counts(spec, parse_trips(opts.trips));
  KernelCursor cursor(spec);
  std::ostringstream buf;
  write_trace(buf, cursor);
  emit(opts, buf.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven performance simulator for out-of-order cores"};
  app.require_subcommand(1);

  CommonOpts sim_opts, sens_opts, rep_opts, gen_opts;
  std::string weights_csv, dims_csv, threshold_str = "1/20";

  CLI::App* sim = app.add_subcommand("simulate", "predict execution cycles");
  add_input_flags(sim, sim_opts, true);

  CLI::App* sens =
      app.add_subcommand("sensitivity", "scaled-capacity bottleneck sweep");
  add_input_flags(sens, sens_opts, true);
  sens->add_option("--weights", weights_csv, "capacity weights CSV (default 2,4)");
  sens->add_option("--dims", dims_csv, "dimensions CSV (default all)");
  sens->add_option("--threshold", threshold_str, "bottleneck flag threshold")
      ->capture_default_str();

  CLI::App* rep = app.add_subcommand("report", "per-instruction report");
  add_input_flags(rep, rep_opts, true);

  CLI::App* gen =
      app.add_subcommand("gen-kernel", "expand a kernel into a trace");
  add_input_flags(gen, gen_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (sens->parsed())
      return cmd_sensitivity(sens_opts, weights_csv, dims_csv, threshold_str);
    if (rep->parsed()) return cmd_report(rep_opts);
    if (gen->parsed()) return cmd_gen_kernel(gen_opts);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
