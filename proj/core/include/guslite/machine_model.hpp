#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "guslite/rational.hpp"

namespace guslite {

// One abstract backend resource (e.g. an execution port or a combined port
// group). inverse_throughput is the cycles consumed per use; 0 means
// unlimited throughput.
struct ResourceSpec {
  std::string name;
  Rat inverse_throughput;
};

// An instruction class: latency plus the multiset of resources every
// instance occupies (a name may repeat to model multi-µop use).
struct InstClass {
  std::string name;
  Rat latency;
  std::vector<std::string> resources;  // multiset, validated against model
  std::uint32_t uop_count = 1;
  std::uint32_t retire_slots = 1;
  // When true, the hit level's extra latency from a memory read is added to
  // this class's execution latency (typical for loads).
  bool mem_extra_latency_applies = false;
};

struct CacheLevelSpec {
  std::string name;         // "L1", "L2", ...
  std::uint64_t size = 0;   // bytes; 0 for the unbounded memory level
  std::uint32_t associativity = 1;
  std::uint32_t line_size = 64;
  Rat extra_latency;        // cycles added when a read hits at this level
  Rat inverse_throughput;   // cycles per line transferred from below
  bool next_line_prefetch = false;
  bool is_memory = false;   // unbounded backing level: always hits
};

struct MachineModel {
  Rat frontend_inverse_throughput;  // cycles per µop
  std::uint64_t rob_size = 1;
  Rat retire_inverse_throughput;    // cycles per retire slot
  std::uint64_t taint_queue_factor = 2;
  std::vector<ResourceSpec> resources;
  std::map<std::string, InstClass> classes;
  // Ordered L1-first; the final entry is always the unbounded memory level.
  std::vector<CacheLevelSpec> cache_levels;

  const InstClass* find_class(const std::string& name) const {
    auto it = classes.find(name);
    return it == classes.end() ? nullptr : &it->second;
  }
  int find_resource(const std::string& name) const {
    for (std::size_t i = 0; i < resources.size(); ++i)
      if (resources[i].name == name) return static_cast<int>(i);
    return -1;
  }
  int find_cache_level(const std::string& name) const {
    for (std::size_t i = 0; i < cache_levels.size(); ++i)
      if (cache_levels[i].name == name) return static_cast<int>(i);
    return -1;
  }
  std::uint32_t line_size() const {
    return cache_levels.empty() ? 64 : cache_levels.front().line_size;
  }
};

// A capacity axis the sensitivity sweep can scale.
struct CapacityDimension {
  enum class Kind {
    resource,         // one named backend resource
    frontend,         // µop issue throughput
    latency_global,   // every class latency + every cache extra latency
    rob_size,         // in-flight window size
    retire,           // retire-slot throughput
    cache_bandwidth,  // one cache level's line transfer throughput
  };
  Kind kind = Kind::latency_global;
  std::string name;  // resource or cache-level name where applicable

  friend bool operator==(const CapacityDimension& a,
                         const CapacityDimension& b) {
    return a.kind == b.kind && a.name == b.name;
  }
  friend bool operator<(const CapacityDimension& a,
                        const CapacityDimension& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.name < b.name;
  }
};

// Parse and validate a model document (JSON text). Throws input_error with
// the offending field named.
MachineModel load_model(const std::string& text);
MachineModel load_model_file(const std::string& path);

// Returns a copy of `model` with capacity along `dim` multiplied by w > 0:
// throughput-like dimensions divide their inverse throughput by w;
// latency_global divides every class latency and cache extra latency by w;
// rob_size multiplies by w and floors (minimum 1). The input is not mutated.
MachineModel scale_capacity(const MachineModel& model,
                            const CapacityDimension& dim, const Rat& w);

// Dimension spellings used by the CLI and in all outputs:
// "latency_global" | "frontend" | "rob_size" | "retire" |
// "resource:NAME" | "cache_bandwidth:LEVEL" (LEVEL may be "memory").
CapacityDimension parse_dimension(const std::string& text,
                                  const MachineModel& model);
std::string dimension_to_string(const CapacityDimension& dim);

// Every dimension the model exposes, in a stable order: latency_global,
// frontend, rob_size, retire, each resource, each cache level.
std::vector<CapacityDimension> default_dimensions(const MachineModel& model);

}  // namespace guslite
