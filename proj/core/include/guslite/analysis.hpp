#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guslite/engine.hpp"
#include "guslite/machine_model.hpp"
#include "guslite/trace.hpp"

namespace guslite {

// Which capacity axes to scale, and by which weights (> 1 = faster/bigger).
struct SensitivityPlan {
  std::vector<CapacityDimension> dimensions;
  std::vector<Rat> weights;  // distinct, > 0; default {2, 4}

  static SensitivityPlan defaults(const MachineModel& model) {
    return {default_dimensions(model), {Rat(2), Rat(4)}};
  }
};

// One (dimension, weight) sweep point:
// speedup = baseline_cycles / scaled_cycles - 1.
struct SpeedupEntry {
  CapacityDimension dimension;
  Rat weight;
  Rat baseline_cycles;
  Rat scaled_cycles;
  Rat speedup;
};

struct SensitivityResult {
  Rat baseline_cycles;
  std::vector<SpeedupEntry> entries;  // ordered by dimension then weight
};

// One baseline run plus one run per (dimension, weight). Runs are mutually
// independent and execute on up to `threads` workers (0 = one per hardware
// thread, capped by the GUSLITE_THREADS environment variable); results merge
// deterministically by (dimension, weight), so concurrency never changes
// output.
SensitivityResult run_sensitivity(const MachineModel& model,
                                  const TraceSource& source,
                                  const SensitivityPlan& plan,
                                  unsigned threads = 0,
                                  const SimOptions& options = {});

// Dimensions whose best speedup reaches `threshold`, sorted by speedup
// descending (name ascending on ties).
struct BottleneckEntry {
  CapacityDimension dimension;
  Rat max_speedup;
};
std::vector<BottleneckEntry> rank_bottlenecks(
    const std::vector<SpeedupEntry>& entries,
    const Rat& threshold = Rat(1, 20));

// Cross-variant check: every dimension flagged as a bottleneck in the base
// run must be equally or less sensitive in the (faster) variant, within
// tolerance. Both sweeps must share a plan.
struct ConsistencyVerdict {
  bool consistent = true;
  std::vector<CapacityDimension> violations;
};
ConsistencyVerdict check_consistency(const std::vector<SpeedupEntry>& base,
                                     const std::vector<SpeedupEntry>& variant,
                                     const Rat& base_cycles,
                                     const Rat& variant_cycles,
                                     const Rat& threshold = Rat(1, 20),
                                     const Rat& tolerance = Rat(1, 1000000));

// Instruction-level report row: per-resource share of total predicted
// cycles attributed to this pc, plus its share of the causality histogram.
struct PcReportRow {
  std::uint64_t pc = 0;
  std::string class_name;
  std::uint64_t events = 0;
  std::vector<Rat> resource_share;  // aligned with charged_resource_names
  Rat taint_share;
  Rat latency;
  std::string resource_list;  // class resource multiset, comma-joined
};

struct PcReport {
  std::vector<std::string> resource_names;
  std::vector<PcReportRow> rows;  // sorted by pc
};

// Requires a result produced with SimOptions::per_pc_accounting.
PcReport per_pc_report(const SimulationResult& result,
                       const MachineModel& model);

// Renderings. JSON forms are byte-stable; text forms are aligned tables.
std::string sensitivity_to_json(const SensitivityResult& result);
std::string sensitivity_to_text(const SensitivityResult& result,
                                const Rat& threshold);
std::string report_to_json(const PcReport& report,
                           const SimulationResult& result);
std::string report_to_text(const PcReport& report,
                           const SimulationResult& result);
std::string result_to_text(const SimulationResult& result);

}  // namespace guslite
