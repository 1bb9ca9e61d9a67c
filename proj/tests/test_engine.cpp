#include "doctest.h"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "guslite/engine.hpp"
#include "guslite/error.hpp"
#include "guslite/machine_model.hpp"
#include "guslite/trace.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using guslite::MachineModel;
using guslite::Rat;
using guslite::ResourceState;
using guslite::ResourceStats;
using guslite::SimulationResult;
using guslite::TaintSet;
using guslite::Timing;
using guslite::TraceEvent;

namespace {

constexpr std::size_t kCap = 1024;

Timing timing(const Rat& t, std::initializer_list<std::uint64_t> ids = {}) {
  Timing x;
  x.t_avail = t;
  for (std::uint64_t id : ids) x.taint.insert(id, kCap);
  return x;
}

const ResourceStats& res(const SimulationResult& r, const std::string& name) {
  for (const auto& st : r.resources)
    if (st.name == name) return st;
  REQUIRE_MESSAGE(false, "missing resource row ", name);
  static ResourceStats dummy;
  return dummy;
}

}  // namespace

TEST_CASE("constrain_by moves only forward") {
  Timing self = timing(Rat(5), {1});

  SUBCASE("later constraint replaces time and blame") {
    constrain_by(self, timing(Rat(7), {2}), kCap);
    CHECK(self.t_avail == Rat(7));
    CHECK(self.taint.ids() == std::vector<std::uint64_t>{2});
  }
  SUBCASE("equal times merge blame") {
    constrain_by(self, timing(Rat(5), {2}), kCap);
    CHECK(self.t_avail == Rat(5));
    CHECK(self.taint.ids() == std::vector<std::uint64_t>{1, 2});
  }
  SUBCASE("earlier constraint changes nothing") {
    constrain_by(self, timing(Rat(3), {2}), kCap);
    CHECK(self.t_avail == Rat(5));
    CHECK(self.taint.ids() == std::vector<std::uint64_t>{1});
  }
}

TEST_CASE("set_by copies unconditionally") {
  Timing self = timing(Rat(9), {1});
  set_by(self, timing(Rat(2), {3}), kCap);
  CHECK(self.t_avail == Rat(2));
  CHECK(self.taint.ids() == std::vector<std::uint64_t>{3});
}

TEST_CASE("used_by charges after an idle bubble or a busy stretch") {
  SUBCASE("idle until t_min: blame resets to the user") {
    ResourceState rs;
    rs.t_avail = Rat(2);
    rs.taint.insert(7, kCap);
    rs.inverse_throughput = Rat(1, 2);
    used_by(rs, 9, Rat(5), kCap);
    CHECK(rs.t_avail == Rat(11, 2));
    CHECK(rs.taint.ids() == std::vector<std::uint64_t>{9});
  }
  SUBCASE("already past t_min: the user joins the blame") {
    ResourceState rs;
    rs.t_avail = Rat(6);
    rs.taint.insert(7, kCap);
    rs.inverse_throughput = Rat(1, 2);
    used_by(rs, 9, Rat(4), kCap);
    CHECK(rs.t_avail == Rat(13, 2));
    CHECK(rs.taint.ids() == std::vector<std::uint64_t>{7, 9});
  }
  SUBCASE("exactly at t_min counts as busy, not idle") {
    ResourceState rs;
    rs.t_avail = Rat(6);
    rs.taint.insert(7, kCap);
    used_by(rs, 9, Rat(6), kCap);  // zero inverse throughput
    CHECK(rs.t_avail == Rat(6));
    CHECK(rs.taint.ids() == std::vector<std::uint64_t>{7, 9});
  }
}

TEST_CASE("empty trace simulates to zero cycles") {
  SimulationResult r = guslite::simulate(testutil::tiny_model(),
                                         std::vector<TraceEvent>{});
  CHECK(r.predicted_cycles == Rat(0));
  CHECK(r.instruction_count == 0);
  CHECK(r.taint_histogram.empty());
  for (const auto& st : r.resources) CHECK(st.uses == 0);
}

TEST_CASE("single instruction timing is exact") {
  // tiny model: front end 1/4 cycles/µop, p0 one cycle/use, mul latency 3.
  // The lone µop leaves the front end at 1/4, which becomes dispatch and
  // start (p0 is idle); completion is 1/4 + 3.
  MachineModel m = testutil::tiny_model();
  SimulationResult r = guslite::simulate(m, {testutil::ev(5, "mul")});
  CHECK(r.predicted_cycles == Rat(13, 4));
  CHECK(r.instruction_count == 1);
  CHECK(res(r, "p0").t_avail == Rat(5, 4));  // bubble to 1/4, then one use
  CHECK(res(r, "p0").uses == 1);
  CHECK(res(r, "p0").busy == Rat(1));
  CHECK(res(r, "frontend").t_avail == Rat(1, 4));
  CHECK(res(r, "frontend").uses == 1);
  CHECK(res(r, "dispatch").t_avail == Rat(1, 4));
  CHECK(res(r, "dispatch").uses == 0);
  CHECK(res(r, "dispatch").busy == Rat(0));
  CHECK(res(r, "retire").uses == 0);  // window never filled
}

TEST_CASE("resource rows appear in declaration order") {
  SimulationResult r = guslite::simulate(testutil::tiny_model(),
                                         {testutil::ev(0, "alu")});
  std::vector<std::string> names;
  for (const auto& st : r.resources) names.push_back(st.name);
  CHECK(names == std::vector<std::string>{"p0", "frontend", "dispatch",
                                          "retire", "memory"});
}

TEST_CASE("a dependent chain serializes at latency per link") {
  // N muls through one accumulator: completion = dispatch of the first
  // (1/4) + N × 3 latency; p0 never limits because latency > its rate.
  MachineModel m = testutil::tiny_model();
  for (std::uint64_t n : {1, 2, 10, 100}) {
    std::vector<TraceEvent> events;
    for (std::uint64_t k = 0; k < n; ++k)
      events.push_back(testutil::ev(0, "mul", {7}, {7}));
    SimulationResult r = guslite::simulate(m, events);
    CHECK(r.predicted_cycles ==
          Rat(1, 4) + Rat(3) * Rat(static_cast<std::int64_t>(n)));
  }
}

TEST_CASE("independent work is limited by the busiest resource") {
  // N independent "alu" (latency 1 = p0's inverse throughput): p0 runs
  // back-to-back after the initial front-end bubble, so completion is
  // 1/4 + N × 1 (the last use starts at 1/4 + (N-1) and runs 1 cycle).
  MachineModel m = testutil::tiny_model();
  std::vector<TraceEvent> events;
  for (std::uint64_t k = 0; k < 40; ++k)
    events.push_back(testutil::ev(k, "alu", {}, {static_cast<unsigned>(k)}));
  SimulationResult r = guslite::simulate(m, events);
  CHECK(r.predicted_cycles == Rat(1, 4) + Rat(40));
  CHECK(res(r, "p0").uses == 40);
  CHECK(res(r, "p0").busy == Rat(40));
}

TEST_CASE("a window of one serializes dispatch behind completion") {
  MachineModel m = testutil::tiny_model();
  m.rob_size = 1;
  std::vector<TraceEvent> events;
  for (std::uint64_t k = 0; k < 10; ++k)
    events.push_back(testutil::ev(k, "mul"));  // independent
  SimulationResult tight = guslite::simulate(m, events);
  SimulationResult roomy = guslite::simulate(testutil::tiny_model(), events);
  // Every dispatch waits for the previous completion: at least the sum of
  // latencies even though the instructions share no operands.
  CHECK(tight.predicted_cycles >= Rat(30));
  CHECK(roomy.predicted_cycles < tight.predicted_cycles);
  CHECK(res(tight, "retire").uses == 9);  // all but the last-in-flight
}

TEST_CASE("memory reads add the hit level's extra latency") {
  // Cacheless tiny model: every access hits the memory level (+50 for
  // classes that take it). Walked by hand:
  //   id 0 "alu" store:  dispatch 1/4, p0 bubble → start 1/4, end 5/4;
  //                      bytes 100..103 move to 5/4.
  //   id 1 "ld" read:    dispatch 1/2, byte shadows lift it to 5/4,
  //                      p0 equal-time merge, start 5/4,
  //                      end 5/4 + (2 + 50) = 213/4.
  MachineModel m = testutil::tiny_model();
  std::vector<TraceEvent> events = {
      testutil::mem_ev(0, "alu", 100, 4, true),
      testutil::mem_ev(1, "ld", 100, 4, false),
  };
  SimulationResult r = guslite::simulate(m, events);
  CHECK(r.predicted_cycles == Rat(213, 4));
  CHECK(res(r, "memory").uses == 2);

  // Stores never take the extra latency, and a store's class without
  // mem_extra_latency_applies is unaffected either way.
  SimulationResult store_only =
      guslite::simulate(m, {testutil::mem_ev(0, "alu", 100, 4, true)});
  CHECK(store_only.predicted_cycles == Rat(5, 4));
}

TEST_CASE("loads before a store see the old bytes") {
  MachineModel m = testutil::tiny_model();
  std::vector<TraceEvent> events = {
      testutil::mem_ev(0, "ld", 100, 4, false),   // cold read
      testutil::mem_ev(1, "alu", 100, 4, true),   // overwrite
  };
  SimulationResult r = guslite::simulate(m, events);
  // The load starts at its dispatch (1/4): nothing written those bytes yet.
  // end = 1/4 + 52 = 209/4; the store is not delayed by the load.
  CHECK(r.predicted_cycles == Rat(209, 4));
}

TEST_CASE("unknown class names the pc and position") {
  MachineModel m = testutil::tiny_model();
  std::vector<TraceEvent> events = {testutil::ev(0, "alu"),
                                    testutil::ev(77, "mystery")};
  CHECK_THROWS_WITH_AS(guslite::simulate(m, events),
                       doctest::Contains("mystery"), guslite::input_error);
  try {
    guslite::simulate(m, events);
  } catch (const guslite::input_error& e) {
    std::string what = e.what();
    CHECK(what.find("77") != std::string::npos);
    CHECK(what.find("position 1") != std::string::npos);
  }
}

TEST_CASE("oversized access reports pc and position") {
  MachineModel m = testutil::tiny_model();
  CHECK_THROWS_WITH_AS(
      guslite::simulate(m, {testutil::mem_ev(3, "ld", 0, 65)}),
      doctest::Contains("pc 3"), guslite::input_error);
}

TEST_CASE("simulation is deterministic across runs") {
  MachineModel m =
      guslite::load_model_file(testutil::fixture("models/toy_ooo.json"));
  guslite::KernelSpec kernel =
      guslite::load_kernel_file(testutil::fixture("kernels/fma_chain.json"));
  std::vector<TraceEvent> events =
      guslite::expand_kernel(guslite::with_trip_counts(kernel, {{"i", 200}}));
  std::string a = guslite::result_to_json(guslite::simulate(m, events));
  std::string b = guslite::result_to_json(guslite::simulate(m, events));
  CHECK(a == b);
  CHECK(a.find("\"cycles\"") != std::string::npos);
}

TEST_CASE("steady-state differencing isolates the per-iteration cost") {
  MachineModel m =
      guslite::load_model_file(testutil::fixture("models/toy_ooo.json"));
  guslite::KernelSpec kernel =
      guslite::load_kernel_file(testutil::fixture("kernels/fma_chain.json"));
  // One load + two chained fmas per iteration: the loop-carried fma→fma
  // chain costs exactly two 4-cycle latencies per iteration.
  CHECK(guslite::steady_state_cycles(m, kernel, 100, 1000) == Rat(8));
  CHECK_THROWS_AS(guslite::steady_state_cycles(m, kernel, 100, 100),
                  guslite::input_error);
  guslite::KernelSpec no_loops = kernel;
  no_loops.loops.clear();
  CHECK_THROWS_AS(guslite::steady_state_cycles(m, no_loops, 1, 2),
                  guslite::input_error);
}

TEST_CASE("taint histogram lands on the dependence chain") {
  // Keep the window and taint queue small so pops happen early.
  MachineModel m = testutil::tiny_model();
  m.rob_size = 4;
  m.taint_queue_factor = 1;
  std::vector<TraceEvent> events;
  for (std::uint64_t k = 0; k < 200; ++k) {
    events.push_back(testutil::ev(10, "mul", {7}, {7}));  // the chain
    events.push_back(testutil::ev(20, "alu", {}, {8}));   // filler
  }
  SimulationResult r = guslite::simulate(m, events);
  std::uint64_t total = 0;
  for (const auto& [pc, count] : r.taint_histogram) {
    CHECK((pc == 10 || pc == 20));
    total += count;
  }
  CHECK(total > 0);
  CHECK(total <= r.instruction_count);
  // The serial chain is the reason dispatch stalls; the filler is not.
  CHECK(r.taint_histogram.count(10) == 1);
  CHECK(r.taint_histogram.at(10) > r.taint_histogram[20]);
}

TEST_CASE("invariant checks stay quiet on healthy inputs") {
  MachineModel m =
      guslite::load_model_file(testutil::fixture("models/toy_ooo.json"));
  guslite::KernelSpec kernel =
      guslite::load_kernel_file(testutil::fixture("kernels/fma_chain.json"));
  guslite::SimOptions opts;
  opts.assert_invariants = true;
  guslite::KernelCursor cur(guslite::with_trip_counts(kernel, {{"i", 300}}));
  CHECK_NOTHROW(guslite::simulate(m, cur, opts));
}

TEST_CASE("prediction never undercuts resource busy time") {
  // Dependence-free random traffic on the tiny model, whose class latencies
  // are all >= every inverse throughput: the busiest clock is a hard floor.
  std::mt19937 rng(7041984);
  std::uniform_int_distribution<int> pick(0, 2);
  MachineModel m = testutil::tiny_model();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TraceEvent> events;
    std::uint64_t n = 20 + static_cast<std::uint64_t>(trial) * 17;
    for (std::uint64_t k = 0; k < n; ++k) {
      const char* cls = pick(rng) == 0 ? "mul" : "alu";
      events.push_back(
          testutil::ev(k % 13, cls, {}, {static_cast<unsigned>(k)}));
    }
    SimulationResult r = guslite::simulate(m, events);
    Rat floor_p0 = res(r, "p0").busy;
    Rat floor_fe = res(r, "frontend").busy;
    CHECK(r.predicted_cycles >= floor_p0);
    CHECK(r.predicted_cycles >= floor_fe);
  }
}

TEST_CASE("prediction never undercuts the dependence chain") {
  std::mt19937 rng(29181716);
  std::uniform_int_distribution<int> reg(0, 7);
  std::uniform_int_distribution<int> cls(0, 1);
  MachineModel m = testutil::tiny_model();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TraceEvent> events;
    for (std::uint64_t k = 0; k < 150; ++k) {
      TraceEvent e = testutil::ev(k % 11, cls(rng) ? "mul" : "alu");
      e.reg_reads = {static_cast<unsigned>(reg(rng))};
      e.reg_writes = {static_cast<unsigned>(reg(rng))};
      events.push_back(e);
    }
    SimulationResult r = guslite::simulate(m, events);
    refsim::ChainResult chain = refsim::longest_register_chain(m, events);
    CHECK(r.predicted_cycles >= chain.length);
  }
}

TEST_CASE("cache stats surface in the result") {
  MachineModel m =
      guslite::load_model_file(testutil::fixture("models/toy_ooo.json"));
  // Two loads of the same line: one L1 miss, one L1 hit.
  std::vector<TraceEvent> events = {testutil::mem_ev(0, "load", 4096, 8),
                                    testutil::mem_ev(1, "load", 4096, 8)};
  SimulationResult r = guslite::simulate(m, events);
  REQUIRE(r.cache.size() == 2);
  CHECK(r.cache[0].name == "L1");
  CHECK(r.cache[0].stats.misses == 1);
  CHECK(r.cache[0].stats.hits == 1);
  CHECK(r.cache[0].stats.prefetch_installs == 1);
  CHECK(r.cache[1].name == "memory");
  CHECK(r.cache[1].stats.hits == 1);
}
