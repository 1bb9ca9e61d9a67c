#include "guslite/cache.hpp"

#include "guslite/error.hpp"

namespace guslite {

CacheState::CacheState(const MachineModel& model) {
  line_size_ = model.line_size();
  for (const auto& spec : model.cache_levels) {
    Level lv;
    lv.is_memory = spec.is_memory;
    lv.prefetch = spec.next_line_prefetch;
    lv.extra_latency = spec.extra_latency;
    if (!spec.is_memory) {
      lv.ways = spec.associativity;
      lv.sets = spec.size / (std::uint64_t(spec.associativity) *
                             spec.line_size);
      lv.tags.assign(lv.sets * lv.ways, 0);
      lv.valid.assign(lv.sets * lv.ways, 0);
      lv.dirty.assign(lv.sets * lv.ways, 0);
      lv.plru.assign(lv.sets * (lv.ways - 1), 0);
    }
    levels_.push_back(std::move(lv));
  }
  stats_.assign(levels_.size(), CacheLevelStats{});
}

int CacheState::find_way(const Level& lv, std::uint64_t set,
                         std::uint64_t tag) const {
  const std::size_t base = set * lv.ways;
  for (std::uint32_t w = 0; w < lv.ways; ++w)
    if (lv.valid[base + w] && lv.tags[base + w] == tag)
      return static_cast<int>(w);
  return -1;
}

// Sets the tree bits along the root-to-way path to point toward `way`,
// protecting it from the next victim walk.
void CacheState::touch(Level& lv, std::uint64_t set, std::uint32_t way) {
  if (lv.ways == 1) return;
  std::uint8_t* bits = &lv.plru[set * (lv.ways - 1)];
  std::uint32_t node = 0;
  std::uint32_t lo = 0, hi = lv.ways;  // way range covered by `node`
  while (hi - lo > 1) {
    std::uint32_t mid = lo + (hi - lo) / 2;
    if (way < mid) {
      bits[node] = 0;  // protect left half
      node = 2 * node + 1;
      hi = mid;
    } else {
      bits[node] = 1;  // protect right half
      node = 2 * node + 2;
      lo = mid;
    }
  }
}

std::uint32_t CacheState::victim(std::size_t level, std::uint64_t set) const {
  const Level& lv = levels_[level];
  if (lv.ways == 1) return 0;
  const std::uint8_t* bits = &lv.plru[set * (lv.ways - 1)];
  std::uint32_t node = 0;
  std::uint32_t lo = 0, hi = lv.ways;
  while (hi - lo > 1) {
    std::uint32_t mid = lo + (hi - lo) / 2;
    if (bits[node] == 0) {  // left protected → walk right
      node = 2 * node + 2;
      lo = mid;
    } else {
      node = 2 * node + 1;
      hi = mid;
    }
  }
  return lo;
}

bool CacheState::present(std::size_t level, std::uint64_t line_addr) const {
  const Level& lv = levels_[level];
  if (lv.is_memory) return true;
  std::uint64_t set = (line_addr / line_size_) % lv.sets;
  std::uint64_t tag = (line_addr / line_size_) / lv.sets;
  return find_way(lv, set, tag) >= 0;
}

// Places the line at `level`: first invalid way if the set is not full,
// otherwise the PLRU victim. Touches the PLRU path either way.
std::uint32_t CacheState::install(std::size_t level, std::uint64_t line_addr,
                                  bool dirty) {
  Level& lv = levels_[level];
  std::uint64_t set = (line_addr / line_size_) % lv.sets;
  std::uint64_t tag = (line_addr / line_size_) / lv.sets;
  const std::size_t base = set * lv.ways;
  std::uint32_t way = lv.ways;
  for (std::uint32_t w = 0; w < lv.ways; ++w)
    if (!lv.valid[base + w]) {
      way = w;
      break;
    }
  if (way == lv.ways) way = victim(level, set);
  lv.valid[base + way] = 1;
  lv.tags[base + way] = tag;
  lv.dirty[base + way] = dirty ? 1 : 0;
  touch(lv, set, way);
  return way;
}

void CacheState::handle_line(std::uint64_t line_addr, bool is_store,
                             AccessOutcome& outcome) {
  // Walk down until the line is found; memory always has it.
  std::size_t hit = levels_.size() - 1;
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    Level& lv = levels_[k];
    std::uint64_t set = (line_addr / line_size_) % lv.sets;
    std::uint64_t tag = (line_addr / line_size_) / lv.sets;
    int way = find_way(lv, set, tag);
    if (way >= 0) {
      hit = k;
      touch(lv, set, static_cast<std::uint32_t>(way));
      if (is_store) lv.dirty[set * lv.ways + way] = 1;
      break;
    }
  }
  ++stats_[hit].hits;
  outcome.line_addr = line_addr;
  outcome.hit_level = hit;
  outcome.extra_latency = levels_[hit].extra_latency;

  // Install at every missed level, then fire the next-line prefetch where
  // the level asks for it.
  for (std::size_t k = 0; k < hit; ++k) {
    ++stats_[k].misses;
    install(k, line_addr, is_store);
  }
  for (std::size_t k = 0; k < hit; ++k) {
    if (!levels_[k].prefetch) continue;
    std::uint64_t next = line_addr + line_size_;
    if (present(k, next)) {
      Level& lv = levels_[k];
      std::uint64_t set = (next / line_size_) % lv.sets;
      std::uint64_t tag = (next / line_size_) / lv.sets;
      touch(lv, set, static_cast<std::uint32_t>(find_way(lv, set, tag)));
    } else {
      install(k, next, false);
      ++stats_[k].prefetch_installs;
      outcome.prefetch_levels.push_back(k);
    }
  }
}

std::vector<AccessOutcome> CacheState::access(std::uint64_t addr,
                                              std::uint32_t size,
                                              bool is_store) {
  if (size == 0) throw internal_error("zero-size memory access");
  if (size > line_size_)
    throw input_error("memory access wider than a cache line (" +
                      std::to_string(size) + " > " +
                      std::to_string(line_size_) + ")");
  std::vector<AccessOutcome> outcomes;
  std::uint64_t first = addr / line_size_ * line_size_;
  std::uint64_t last = (addr + size - 1) / line_size_ * line_size_;
  for (std::uint64_t line = first; line <= last; line += line_size_) {
    AccessOutcome out;
    handle_line(line, is_store, out);
    outcomes.push_back(std::move(out));
    if (line == last) break;  // guard against wrap-around
  }
  return outcomes;
}

}  // namespace guslite
