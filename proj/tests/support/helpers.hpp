#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "guslite/machine_model.hpp"
#include "guslite/trace.hpp"

namespace testutil {

inline std::string fixture(const std::string& rel) {
  return std::string(GUSLITE_FIXTURES) + "/" + rel;
}

// Minimal cacheless machine: one port "p0" with unit inverse throughput,
// "alu" latency 1 and "mul" latency 3 on it, memory-only hierarchy for the
// classes that touch memory ("ld").
inline guslite::MachineModel tiny_model() {
  using guslite::Rat;
  guslite::MachineModel m;
  m.frontend_inverse_throughput = Rat(1, 4);
  m.rob_size = 64;
  m.retire_inverse_throughput = Rat(1, 4);
  m.taint_queue_factor = 2;

  guslite::ResourceSpec p0;
  p0.name = "p0";
  p0.inverse_throughput = Rat(1);
  m.resources.push_back(p0);

  guslite::InstClass alu;
  alu.name = "alu";
  alu.latency = Rat(1);
  alu.resources = {"p0"};
  m.classes["alu"] = alu;

  guslite::InstClass mul;
  mul.name = "mul";
  mul.latency = Rat(3);
  mul.resources = {"p0"};
  m.classes["mul"] = mul;

  guslite::InstClass ld;
  ld.name = "ld";
  ld.latency = Rat(2);
  ld.resources = {"p0"};
  ld.mem_extra_latency_applies = true;
  m.classes["ld"] = ld;

  guslite::CacheLevelSpec mem;
  mem.name = "memory";
  mem.line_size = 64;
  mem.extra_latency = Rat(50);
  mem.inverse_throughput = Rat(0);
  mem.is_memory = true;
  m.cache_levels.push_back(mem);
  return m;
}

inline guslite::TraceEvent ev(std::uint64_t pc, const std::string& cls,
                              std::initializer_list<std::uint32_t> rr = {},
                              std::initializer_list<std::uint32_t> rw = {}) {
  guslite::TraceEvent e;
  e.pc = pc;
  e.class_name = cls;
  e.reg_reads = rr;
  e.reg_writes = rw;
  return e;
}

inline guslite::TraceEvent mem_ev(std::uint64_t pc, const std::string& cls,
                                  std::uint64_t addr, std::uint32_t size,
                                  bool is_store = false) {
  guslite::TraceEvent e;
  e.pc = pc;
  e.class_name = cls;
  e.mem.push_back({addr, static_cast<std::uint16_t>(size), is_store});
  return e;
}

}  // namespace testutil
