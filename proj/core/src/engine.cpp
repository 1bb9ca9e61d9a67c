#include "guslite/engine.hpp"

#include <deque>
#include <unordered_map>

#include "guslite/error.hpp"
#include "json.hpp"

namespace guslite {

void constrain_by(Timing& self, const Timing& c, std::size_t cap) {
  if (self.t_avail == c.t_avail) {
    self.taint.union_with(c.taint, cap);
  } else if (self.t_avail < c.t_avail) {
    self.t_avail = c.t_avail;
    self.taint.assign(c.taint, cap);
  }
  // else: constraint already satisfied, nothing moves
}

void set_by(Timing& self, const Timing& c, std::size_t cap) {
  self.t_avail = c.t_avail;
  self.taint.assign(c.taint, cap);
}

void used_by(ResourceState& self, std::uint64_t id, const Rat& t_min,
             std::size_t cap) {
  if (self.t_avail < t_min) {
    // The resource idled until t_min: that bubble is this instruction's.
    self.taint.assign_single(id);
    self.t_avail = t_min;
  } else {
    self.taint.insert(id, cap);
  }
  self.t_avail += self.inverse_throughput;
}

namespace {

class Engine {
 public:
  Engine(const MachineModel& model, const SimOptions& options)
      : model_(model), options_(options), cache_(model) {
    line_size_ = model.line_size();
    named_count_ = model.resources.size();
    frontend_idx_ = named_count_;
    retire_idx_ = named_count_ + 1;
    level_base_ = named_count_ + 2;
    charged_.resize(level_base_ + model.cache_levels.size());
    for (std::size_t i = 0; i < named_count_; ++i) {
      charged_[i].inverse_throughput = model.resources[i].inverse_throughput;
      charged_names_.push_back(model.resources[i].name);
    }
    charged_[frontend_idx_].inverse_throughput =
        model.frontend_inverse_throughput;
    charged_names_.push_back("frontend");
    charged_[retire_idx_].inverse_throughput =
        model.retire_inverse_throughput;
    charged_names_.push_back("retire");
    for (std::size_t k = 0; k < model.cache_levels.size(); ++k) {
      charged_[level_base_ + k].inverse_throughput =
          model.cache_levels[k].inverse_throughput;
      charged_names_.push_back(model.cache_levels[k].name);
    }
    uses_.assign(charged_.size(), 0);
    taint_cap_ = model.taint_queue_factor * model.rob_size + 64;
    if (taint_cap_ < 64) taint_cap_ = 64;
    tq_threshold_ = model.taint_queue_factor * model.rob_size;
  }

  SimulationResult run(TraceCursor& trace) {
    TraceEvent ev;
    while (trace.next(ev)) step(ev);
    drain();
    return finish();
  }

 private:
  void charge(std::size_t idx, const DynInst& owner, const Rat& t_min) {
    ResourceState& rs = charged_[idx];
    Rat before = rs.t_avail;
    used_by(rs, owner.id, t_min, taint_cap_);
    if (options_.assert_invariants && rs.t_avail < before)
      throw internal_error("resource clock went backwards: " +
                           charged_names_[idx]);
    ++uses_[idx];
    if (options_.per_pc_accounting) {
      PcUsage& pcu = usage_slot(owner.pc);
      ++pcu.uses[idx];
    }
  }

  PcUsage& usage_slot(std::uint64_t pc) {
    auto [it, inserted] = pc_usage_.try_emplace(pc);
    if (inserted) it->second.uses.assign(charged_.size(), 0);
    return it->second;
  }

  ShadowEntry& reg_entry(std::uint32_t reg) {
    if (reg >= reg_shadow_.size()) reg_shadow_.resize(reg + 1);
    return reg_shadow_[reg];
  }

  DynInst& by_id(std::uint64_t id) { return window_[id - window_base_]; }

  void step(const TraceEvent& ev) {
    const InstClass* cls = model_.find_class(ev.class_name);
    if (cls == nullptr)
      throw input_error("unknown class '" + ev.class_name + "' at pc " +
                        std::to_string(ev.pc) + ", position " +
                        std::to_string(next_id_));
    const std::vector<std::size_t>& res_idx = class_resources(cls);

    window_.emplace_back();
    DynInst& i = window_.back();
    i.id = next_id_++;
    i.pc = ev.pc;
    i.cls = cls;

    // Retirement: the in-flight window is a bounded FIFO; once it holds
    // rob_size instructions the oldest must retire before a new one enters.
    // The retiree's availability (its completion) and the retire clock both
    // bound dispatch; the retire resource is then charged one slot at a
    // time starting no earlier than the retiree's completion.
    if (next_id_ - 1 - dq_popped_ == model_.rob_size) {
      DynInst& retiree = by_id(dq_popped_);
      ++dq_popped_;
      constrain_by(dispatch_, retiree, taint_cap_);
      constrain_by(dispatch_, charged_[retire_idx_], taint_cap_);
      for (std::uint32_t s = 0; s < retiree.cls->retire_slots; ++s)
        charge(retire_idx_, retiree, retiree.t_avail);
    }

    // Front end: issue µops no earlier than dispatch allows, then let the
    // front-end clock push dispatch forward.
    constrain_by(charged_[frontend_idx_], dispatch_, taint_cap_);
    for (std::uint32_t u = 0; u < cls->uop_count; ++u)
      charge(frontend_idx_, i, dispatch_.t_avail);
    constrain_by(dispatch_, charged_[frontend_idx_], taint_cap_);
    set_by(i, dispatch_, taint_cap_);
    i.t_dispatch = i.t_avail;

    if (options_.per_pc_accounting) {
      PcUsage& pcu = usage_slot(ev.pc);
      if (pcu.events == 0) pcu.class_name = ev.class_name;
      ++pcu.events;
    }

    // Cache walk: every traversed level constrains the line's shadow entry
    // and is charged one line transfer; prefetch installs are charged to
    // their level but constrain nothing. The hit level's extra latency
    // (reads only) is added to the execution latency.
    Rat extra;
    for (const MemAccess& a : ev.mem) {
      std::vector<AccessOutcome> outcomes;
      try {
        outcomes = cache_.access(a.addr, a.size, a.is_store);
      } catch (const input_error& e) {
        throw input_error(std::string(e.what()) + " at pc " +
                          std::to_string(ev.pc) + ", position " +
                          std::to_string(i.id));
      }
      for (const AccessOutcome& out : outcomes) {
        ShadowEntry& line = line_shadow_[out.line_addr];
        for (std::size_t k = 0; k <= out.hit_level; ++k) {
          constrain_by(line, charged_[level_base_ + k], taint_cap_);
          charge(level_base_ + k, i, i.t_dispatch);
        }
        for (std::size_t k : out.prefetch_levels)
          charge(level_base_ + k, i, i.t_dispatch);
        if (!a.is_store) extra = max(extra, out.extra_latency);
      }
    }
    i.latency = cls->latency;
    if (cls->mem_extra_latency_applies) i.latency += extra;

    // Dependencies: register reads, then byte + line shadows of memory
    // reads.
    for (std::uint32_t r : ev.reg_reads)
      constrain_by(i, reg_entry(r), taint_cap_);
    for (const MemAccess& a : ev.mem) {
      if (a.is_store) continue;
      for (std::uint64_t b = a.addr; b < a.addr + a.size; ++b)
        constrain_by(i, byte_shadow_[b], taint_cap_);
      std::uint64_t first = a.addr / line_size_ * line_size_;
      std::uint64_t last = (a.addr + a.size - 1) / line_size_ * line_size_;
      for (std::uint64_t line = first; line <= last; line += line_size_) {
        constrain_by(i, line_shadow_[line], taint_cap_);
        if (line == last) break;
      }
    }

    // Back end: each resource in the class multiset gates the start time,
    // then takes its charge.
    for (std::size_t idx : res_idx) {
      constrain_by(i, charged_[idx], taint_cap_);
      charge(idx, i, i.t_dispatch);
    }

    // Execute.
    i.t_start = i.t_avail;
    i.t_end = i.t_start + i.latency;
    i.t_avail = i.t_end;
    if (options_.assert_invariants &&
        (i.t_start < i.t_dispatch || i.t_end < i.t_start))
      throw internal_error("instruction time ordering violated at position " +
                           std::to_string(i.id));
    predicted_ = max(predicted_, i.t_end);

    // The instruction now blames itself too, so values it writes carry its
    // id to downstream readers.
    i.taint.insert(i.id, taint_cap_);

    // Writes: registers are renamed (unconditional overwrite); memory bytes
    // only move forward.
    for (std::uint32_t r : ev.reg_writes) set_by(reg_entry(r), i, taint_cap_);
    for (const MemAccess& a : ev.mem) {
      if (!a.is_store) continue;
      for (std::uint64_t b = a.addr; b < a.addr + a.size; ++b) {
        ShadowEntry& entry = byte_shadow_[b];
        if (entry.t_avail < i.t_end) set_by(entry, i, taint_cap_);
      }
    }

    // Causality: once the taint queue is deep enough, pop the oldest
    // instruction and count it if it still constrains dispatch.
    if (next_id_ - tq_popped_ > tq_threshold_) pop_taintqueue();
  }

  void pop_taintqueue() {
    const DynInst& popped = window_.front();
    if (dispatch_.taint.contains(popped.id)) ++histogram_[popped.pc];
    window_.pop_front();
    ++window_base_;
    ++tq_popped_;
  }

  // End of trace: drain the taint queue fully, applying the same
  // membership test to every remaining entry.
  void drain() {
    while (!window_.empty()) pop_taintqueue();
  }

  const std::vector<std::size_t>& class_resources(const InstClass* cls) {
    auto it = class_res_.find(cls);
    if (it != class_res_.end()) return it->second;
    std::vector<std::size_t> idx;
    for (const std::string& name : cls->resources)
      idx.push_back(static_cast<std::size_t>(model_.find_resource(name)));
    return class_res_.emplace(cls, std::move(idx)).first->second;
  }

  SimulationResult finish() {
    SimulationResult r;
    r.predicted_cycles = predicted_;
    r.instruction_count = next_id_;
    auto push_stats = [&](const std::string& name, std::size_t idx) {
      ResourceStats st;
      st.name = name;
      st.uses = uses_[idx];
      st.busy = Rat(static_cast<std::int64_t>(st.uses)) *
                charged_[idx].inverse_throughput;
      st.t_avail = charged_[idx].t_avail;
      r.resources.push_back(std::move(st));
    };
    for (std::size_t i = 0; i < named_count_; ++i)
      push_stats(model_.resources[i].name, i);
    push_stats("frontend", frontend_idx_);
    {
      ResourceStats st;
      st.name = "dispatch";
      st.t_avail = dispatch_.t_avail;
      r.resources.push_back(std::move(st));
    }
    push_stats("retire", retire_idx_);
    for (std::size_t k = 0; k < model_.cache_levels.size(); ++k)
      push_stats(model_.cache_levels[k].name, level_base_ + k);
    r.taint_histogram = std::move(histogram_);
    for (std::size_t k = 0; k < model_.cache_levels.size(); ++k)
      r.cache.push_back({model_.cache_levels[k].name, cache_.stats()[k]});
    if (options_.per_pc_accounting) {
      r.charged_resource_names = charged_names_;
      r.pc_usage = std::move(pc_usage_);
    }
    return r;
  }

  const MachineModel& model_;
  SimOptions options_;
  CacheState cache_;
  std::uint32_t line_size_;

  std::size_t named_count_, frontend_idx_, retire_idx_, level_base_;
  std::vector<ResourceState> charged_;
  std::vector<std::string> charged_names_;
  std::vector<std::uint64_t> uses_;
  Timing dispatch_;
  std::size_t taint_cap_;
  std::uint64_t tq_threshold_;

  std::deque<DynInst> window_;
  std::uint64_t window_base_ = 0;  // id of window_.front()
  std::uint64_t next_id_ = 0;
  std::uint64_t dq_popped_ = 0;
  std::uint64_t tq_popped_ = 0;

  std::vector<ShadowEntry> reg_shadow_;
  std::unordered_map<std::uint64_t, ShadowEntry> byte_shadow_;
  std::unordered_map<std::uint64_t, ShadowEntry> line_shadow_;
  std::unordered_map<const InstClass*, std::vector<std::size_t>> class_res_;

  Rat predicted_;
  std::map<std::uint64_t, std::uint64_t> histogram_;
  std::map<std::uint64_t, PcUsage> pc_usage_;
};

}  // namespace

SimulationResult simulate(const MachineModel& model, TraceCursor& trace,
                          const SimOptions& options) {
  Engine engine(model, options);
  return engine.run(trace);
}

SimulationResult simulate(const MachineModel& model,
                          const std::vector<TraceEvent>& events,
                          const SimOptions& options) {
  VectorCursor cursor(events);
  return simulate(model, cursor, options);
}

Rat steady_state_cycles(const MachineModel& model, const KernelSpec& kernel,
                        std::uint64_t n1, std::uint64_t n2,
                        const SimOptions& options) {
  if (kernel.loops.empty())
    throw input_error("steady-state measurement needs a loop nest");
  if (n2 <= n1)
    throw input_error("steady-state trip counts must satisfy n1 < n2");
  KernelSpec k1 = kernel, k2 = kernel;
  k1.loops.front().count = n1;
  k2.loops.front().count = n2;
  KernelCursor c1(k1), c2(k2);
  Rat cycles1 = simulate(model, c1, options).predicted_cycles;
  Rat cycles2 = simulate(model, c2, options).predicted_cycles;
  return (cycles2 - cycles1) / Rat(static_cast<std::int64_t>(n2 - n1));
}

std::string result_to_json(const SimulationResult& result) {
  using nlohmann::json;
  auto rat = [](const Rat& r) { return json::array({r.num, r.den}); };
  json j;
  j["cycles"] = rat(result.predicted_cycles);
  j["instructions"] = result.instruction_count;
  json res = json::object();
  for (const ResourceStats& st : result.resources)
    res[st.name] = {{"uses", st.uses},
                    {"busy", rat(st.busy)},
                    {"t_avail", rat(st.t_avail)}};
  j["resources"] = std::move(res);
  json taint = json::object();
  for (const auto& [pc, count] : result.taint_histogram)
    taint[std::to_string(pc)] = count;
  j["taint"] = std::move(taint);
  json levels = json::array();
  for (const CacheStatsEntry& e : result.cache)
    levels.push_back({{"name", e.name},
                      {"hits", e.stats.hits},
                      {"misses", e.stats.misses},
                      {"prefetch_installs", e.stats.prefetch_installs}});
  j["cache"] = {{"levels", std::move(levels)}};
  return j.dump(2) + "\n";
}

}  // namespace guslite
