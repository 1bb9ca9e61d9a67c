#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "guslite/cache.hpp"
#include "guslite/machine_model.hpp"
#include "guslite/rational.hpp"
#include "guslite/taint.hpp"
#include "guslite/trace.hpp"

namespace guslite {

// Availability time + taint set: the pair every constraint in the engine
// moves around. Resources, in-flight instructions, and shadow entries all
// carry one.
struct Timing {
  Rat t_avail;
  TaintSet taint;
};

// One abstract resource's clock: earliest availability, the ids responsible
// for its current position, and the cycles each use consumes.
struct ResourceState : Timing {
  Rat inverse_throughput;
};

// Shadow entry for a register, a memory byte, or a memory line.
struct ShadowEntry : Timing {};

// One dynamic instruction in flight.
struct DynInst : Timing {
  std::uint64_t id = 0;
  std::uint64_t pc = 0;
  const InstClass* cls = nullptr;
  Rat t_dispatch;
  Rat t_start;
  Rat t_end;
  Rat latency;  // class latency + hit-level extra latency for memory reads
};

// Core constraint operators.
//
// constrain_by: this must not become available before c. Equal times merge
// blame (taint union); a later c replaces both time and blame; an earlier c
// changes nothing.
void constrain_by(Timing& self, const Timing& c, std::size_t cap);
// set_by: unconditional copy of availability and blame.
void set_by(Timing& self, const Timing& c, std::size_t cap);
// used_by: instruction `id` occupies the resource no earlier than t_min. If
// the resource sat idle until t_min the bubble is attributed to `id` alone;
// otherwise `id` joins the existing blame. The clock then advances by the
// resource's inverse throughput.
void used_by(ResourceState& self, std::uint64_t id, const Rat& t_min,
             std::size_t cap);

struct ResourceStats {
  std::string name;
  std::uint64_t uses = 0;
  Rat busy;     // uses × inverse_throughput
  Rat t_avail;  // final clock position
};

struct CacheStatsEntry {
  std::string name;
  CacheLevelStats stats;
};

// Per-pc resource accounting (opt-in): how often each static instruction
// charged each resource, for the instruction-level report.
struct PcUsage {
  std::string class_name;  // representative: first event seen at this pc
  std::uint64_t events = 0;
  std::vector<std::uint64_t> uses;  // indexed like charged_resource_names
};

struct SimulationResult {
  Rat predicted_cycles;  // completion time of the last-finishing instruction
  std::uint64_t instruction_count = 0;
  // Named resources in model order, then frontend, dispatch, retire, then
  // the cache levels (memory last). dispatch is a pure constraint
  // accumulator: uses = 0, busy = 0.
  std::vector<ResourceStats> resources;
  std::map<std::uint64_t, std::uint64_t> taint_histogram;  // pc → count
  std::vector<CacheStatsEntry> cache;
  // Present only when SimOptions::per_pc_accounting was set.
  std::vector<std::string> charged_resource_names;
  std::map<std::uint64_t, PcUsage> pc_usage;
};

struct SimOptions {
  bool assert_invariants = false;  // debug monotonicity/order checks
  bool per_pc_accounting = false;
};

// Runs the full constraint-propagation simulation over the event stream.
// Strictly sequential: trace order is semantically load-bearing.
SimulationResult simulate(const MachineModel& model, TraceCursor& trace,
                          const SimOptions& options = {});
SimulationResult simulate(const MachineModel& model,
                          const std::vector<TraceEvent>& events,
                          const SimOptions& options = {});

// Asymptotic cycles per iteration of the outermost loop, measured by
// differencing two trip counts: (cycles(n2) - cycles(n1)) / (n2 - n1).
Rat steady_state_cycles(const MachineModel& model, const KernelSpec& kernel,
                        std::uint64_t n1, std::uint64_t n2,
                        const SimOptions& options = {});

// Stable JSON rendering (sorted keys, exact rationals as [num, den]) — the
// canonical serialized form; byte-identical across runs and platforms.
std::string result_to_json(const SimulationResult& result);

}  // namespace guslite
