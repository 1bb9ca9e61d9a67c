#pragma once

#include <cstdint>
#include <vector>

#include "guslite/machine_model.hpp"

namespace guslite {

// Result of classifying one memory line: where it hit, which levels were
// traversed (the contiguous prefix L1..hit_level), and which levels took a
// next-line prefetch install the engine must charge bandwidth for.
struct AccessOutcome {
  std::uint64_t line_addr = 0;
  std::size_t hit_level = 0;       // index into levels; memory = last
  Rat extra_latency;               // hit level's extra latency
  std::vector<std::size_t> prefetch_levels;  // levels charged one prefetch

  std::size_t levels_traversed() const { return hit_level + 1; }
};

struct CacheLevelStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t prefetch_installs = 0;
};

// Inclusive multi-level cache with tree-PLRU replacement and a next-line
// prefetch heuristic. The last level is the unbounded memory backing level
// (always hits). Owned by a single simulation; no sharing.
class CacheState {
 public:
  explicit CacheState(const MachineModel& model);

  // Classifies an access of `size` bytes at `addr` (at most two lines; the
  // caller validates size <= line_size). One outcome per distinct line, in
  // ascending line order. On a miss at level k the line is installed at
  // every missed level L1..k-1 (write-allocate; stores mark the line dirty,
  // writebacks are not charged). A demand miss at a level with
  // next_line_prefetch installs line+line_size at that level too; a prefetch
  // whose target is already present only refreshes its PLRU state and is not
  // counted or charged.
  std::vector<AccessOutcome> access(std::uint64_t addr, std::uint32_t size,
                                    bool is_store);

  // PLRU victim for a full set: walks the decision tree, each bit pointing
  // toward the protected half (0 = left). Exposed for tests.
  std::uint32_t victim(std::size_t level, std::uint64_t set) const;

  bool present(std::size_t level, std::uint64_t line_addr) const;

  const std::vector<CacheLevelStats>& stats() const { return stats_; }
  std::uint32_t line_size() const { return line_size_; }
  std::size_t level_count() const { return levels_.size(); }

 private:
  struct Level {
    std::uint64_t sets = 1;
    std::uint32_t ways = 1;
    bool prefetch = false;
    bool is_memory = false;
    Rat extra_latency;
    std::vector<std::uint64_t> tags;   // sets × ways
    std::vector<std::uint8_t> valid;   // sets × ways
    std::vector<std::uint8_t> dirty;   // sets × ways
    std::vector<std::uint8_t> plru;    // sets × (ways - 1) tree bits
  };

  int find_way(const Level& lv, std::uint64_t set, std::uint64_t tag) const;
  void touch(Level& lv, std::uint64_t set, std::uint32_t way);
  std::uint32_t install(std::size_t level, std::uint64_t line_addr,
                        bool dirty);
  void handle_line(std::uint64_t line_addr, bool is_store,
                   AccessOutcome& outcome);

  std::vector<Level> levels_;
  std::vector<CacheLevelStats> stats_;
  std::uint32_t line_size_ = 64;
};

}  // namespace guslite
