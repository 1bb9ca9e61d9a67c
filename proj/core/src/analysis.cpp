#include "guslite/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "guslite/error.hpp"
#include "json.hpp"

namespace guslite {

namespace {

unsigned effective_threads(unsigned requested, std::size_t tasks) {
  unsigned n = requested != 0 ? requested : std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("GUSLITE_THREADS")) {
    char* end = nullptr;
    unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0 && cap < n) n = cap;
  }
  if (tasks < n) n = static_cast<unsigned>(tasks);
  return n == 0 ? 1 : n;
}

void validate_plan(const SensitivityPlan& plan) {
  if (plan.weights.empty()) throw input_error("sensitivity plan has no weights");
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const Rat& w : plan.weights) {
    if (!(Rat(0) < w)) throw input_error("sensitivity weight must be > 0");
    if (!seen.insert({w.num, w.den}).second)
      throw input_error("duplicate sensitivity weight " + w.str());
  }
  if (plan.dimensions.empty())
    throw input_error("sensitivity plan has no dimensions");
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  std::string padding(width - s.size(), ' ');
  return right ? padding + s : s + padding;
}

}  // namespace

SensitivityResult run_sensitivity(const MachineModel& model,
                                  const TraceSource& source,
                                  const SensitivityPlan& plan,
                                  unsigned threads,
                                  const SimOptions& options) {
  validate_plan(plan);

  // Task 0 is the baseline; task 1+i covers (dimension, weight) pair i in
  // dimension-major order. Each task owns its model copy and cursor, so the
  // only shared mutable state is the result slot it alone writes.
  struct Task {
    const CapacityDimension* dim = nullptr;  // null = baseline
    Rat weight;
    Rat cycles;
  };
  std::vector<Task> tasks;
  tasks.push_back({});
  for (const CapacityDimension& dim : plan.dimensions)
    for (const Rat& w : plan.weights) tasks.push_back({&dim, w, Rat()});

  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      std::size_t idx = cursor.fetch_add(1);
      if (idx >= tasks.size()) return;
      try {
        Task& task = tasks[idx];
        MachineModel scaled =
            task.dim ? scale_capacity(model, *task.dim, task.weight) : model;
        auto events = source();
        task.cycles = simulate(scaled, *events, options).predicted_cycles;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  unsigned n_threads = effective_threads(threads, tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SensitivityResult result;
  result.baseline_cycles = tasks[0].cycles;
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    SpeedupEntry e;
    e.dimension = *tasks[i].dim;
    e.weight = tasks[i].weight;
    e.baseline_cycles = result.baseline_cycles;
    e.scaled_cycles = tasks[i].cycles;
    e.speedup = e.scaled_cycles.is_zero()
                    ? Rat(0)
                    : e.baseline_cycles / e.scaled_cycles - Rat(1);
    result.entries.push_back(std::move(e));
  }
  return result;
}

std::vector<BottleneckEntry> rank_bottlenecks(
    const std::vector<SpeedupEntry>& entries, const Rat& threshold) {
  if (entries.empty())
    throw input_error("cannot rank bottlenecks over an empty sweep");
  std::map<CapacityDimension, Rat> best;
  for (const SpeedupEntry& e : entries) {
    auto [it, inserted] = best.try_emplace(e.dimension, e.speedup);
    if (!inserted && it->second < e.speedup) it->second = e.speedup;
  }
  std::vector<BottleneckEntry> ranked;
  for (const auto& [dim, s] : best)
    if (threshold <= s) ranked.push_back({dim, s});
  std::sort(ranked.begin(), ranked.end(),
            [](const BottleneckEntry& a, const BottleneckEntry& b) {
              if (a.max_speedup != b.max_speedup)
                return b.max_speedup < a.max_speedup;
              return dimension_to_string(a.dimension) <
                     dimension_to_string(b.dimension);
            });
  return ranked;
}

ConsistencyVerdict check_consistency(const std::vector<SpeedupEntry>& base,
                                     const std::vector<SpeedupEntry>& variant,
                                     const Rat& base_cycles,
                                     const Rat& variant_cycles,
                                     const Rat& threshold,
                                     const Rat& tolerance) {
  if (base.size() != variant.size())
    throw input_error("consistency check: sweeps used different plans");
  for (std::size_t i = 0; i < base.size(); ++i)
    if (!(base[i].dimension == variant[i].dimension) ||
        base[i].weight != variant[i].weight)
      throw input_error("consistency check: sweeps used different plans");
  if (base_cycles < variant_cycles)
    throw input_error(
        "consistency check: variant must not be slower than base");

  std::map<CapacityDimension, Rat> base_best, variant_best;
  for (const SpeedupEntry& e : base) {
    auto [it, inserted] = base_best.try_emplace(e.dimension, e.speedup);
    if (!inserted && it->second < e.speedup) it->second = e.speedup;
  }
  for (const SpeedupEntry& e : variant) {
    auto [it, inserted] = variant_best.try_emplace(e.dimension, e.speedup);
    if (!inserted && it->second < e.speedup) it->second = e.speedup;
  }

  ConsistencyVerdict verdict;
  for (const auto& [dim, base_s] : base_best) {
    if (base_s < threshold) continue;  // not a bottleneck in base
    if (base_s + tolerance < variant_best.at(dim)) {
      verdict.consistent = false;
      verdict.violations.push_back(dim);
    }
  }
  return verdict;
}

PcReport per_pc_report(const SimulationResult& result,
                       const MachineModel& model) {
  if (result.charged_resource_names.empty())
    throw input_error("per-pc report requires per-pc accounting");

  // Inverse throughputs in the engine's charged-resource order: named
  // resources, frontend, retire, cache levels.
  std::vector<Rat> inv;
  for (const auto& r : model.resources) inv.push_back(r.inverse_throughput);
  inv.push_back(model.frontend_inverse_throughput);
  inv.push_back(model.retire_inverse_throughput);
  for (const auto& lv : model.cache_levels) inv.push_back(lv.inverse_throughput);
  if (inv.size() != result.charged_resource_names.size())
    throw input_error("per-pc report: model does not match simulation result");

  Rat total_taint;
  for (const auto& [pc, count] : result.taint_histogram)
    total_taint += Rat(static_cast<std::int64_t>(count));

  PcReport report;
  report.resource_names = result.charged_resource_names;
  for (const auto& [pc, usage] : result.pc_usage) {
    PcReportRow row;
    row.pc = pc;
    row.class_name = usage.class_name;
    row.events = usage.events;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      Rat busy = Rat(static_cast<std::int64_t>(usage.uses[i])) * inv[i];
      row.resource_share.push_back(result.predicted_cycles.is_zero()
                                       ? Rat(0)
                                       : busy / result.predicted_cycles);
    }
    auto hist = result.taint_histogram.find(pc);
    Rat count(hist == result.taint_histogram.end()
                  ? 0
                  : static_cast<std::int64_t>(hist->second));
    row.taint_share = total_taint.is_zero() ? Rat(0) : count / total_taint;
    if (const InstClass* cls = model.find_class(usage.class_name)) {
      row.latency = cls->latency;
      for (std::size_t i = 0; i < cls->resources.size(); ++i)
        row.resource_list += (i ? "," : "") + cls->resources[i];
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Renderings

std::string sensitivity_to_json(const SensitivityResult& result) {
  using nlohmann::json;
  auto rat = [](const Rat& r) { return json::array({r.num, r.den}); };
  json arr = json::array();
  for (const SpeedupEntry& e : result.entries)
    arr.push_back({{"dim", dimension_to_string(e.dimension)},
                   {"w", rat(e.weight)},
                   {"baseline", rat(e.baseline_cycles)},
                   {"scaled", rat(e.scaled_cycles)},
                   {"speedup", rat(e.speedup)}});
  return arr.dump(2) + "\n";
}

std::string sensitivity_to_text(const SensitivityResult& result,
                                const Rat& threshold) {
  // Group rows by dimension, strongest dimension first.
  std::map<CapacityDimension, Rat> best;
  for (const SpeedupEntry& e : result.entries) {
    auto [it, inserted] = best.try_emplace(e.dimension, e.speedup);
    if (!inserted && it->second < e.speedup) it->second = e.speedup;
  }
  std::vector<CapacityDimension> order;
  for (const auto& [dim, _] : best) order.push_back(dim);
  std::sort(order.begin(), order.end(),
            [&](const CapacityDimension& a, const CapacityDimension& b) {
              if (best.at(a) != best.at(b)) return best.at(b) < best.at(a);
              return dimension_to_string(a) < dimension_to_string(b);
            });

  std::ostringstream os;
  os << "baseline cycles: " << result.baseline_cycles.str() << " ("
     << fmt("%.4f", result.baseline_cycles.to_double()) << ")\n";
  os << pad("dimension", 28) << pad("w", 8, true) << pad("scaled", 16, true)
     << pad("speedup", 12, true) << "\n";
  for (const CapacityDimension& dim : order) {
    for (const SpeedupEntry& e : result.entries) {
      if (!(e.dimension == dim)) continue;
      bool flagged = threshold <= e.speedup;
      os << pad(dimension_to_string(dim), 28)
         << pad(e.weight.str(), 8, true)
         << pad(fmt("%.4f", e.scaled_cycles.to_double()), 16, true)
         << pad(fmt("%+.4f", e.speedup.to_double()), 12, true)
         << (flagged ? "  *" : "") << "\n";
    }
  }
  os << "(* = speedup at or above threshold "
     << fmt("%.4f", threshold.to_double()) << ")\n";
  return os.str();
}

std::string report_to_json(const PcReport& report,
                           const SimulationResult& result) {
  using nlohmann::json;
  auto rat = [](const Rat& r) { return json::array({r.num, r.den}); };
  json j;
  j["cycles"] = rat(result.predicted_cycles);
  j["share_basis"] = "total_predicted_cycles";
  j["resources"] = report.resource_names;
  json rows = json::array();
  for (const PcReportRow& row : report.rows) {
    json shares = json::object();
    for (std::size_t i = 0; i < report.resource_names.size(); ++i)
      shares[report.resource_names[i]] = rat(row.resource_share[i]);
    rows.push_back({{"pc", row.pc},
                    {"class", row.class_name},
                    {"events", row.events},
                    {"shares", std::move(shares)},
                    {"taint_share", rat(row.taint_share)},
                    {"latency", rat(row.latency)},
                    {"ports", row.resource_list}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_to_text(const PcReport& report,
                           const SimulationResult& result) {
  std::ostringstream os;
  os << "per-instruction report (shares are fractions of total predicted "
        "cycles, "
     << result.predicted_cycles.str() << ")\n";
  os << pad("pc", 8) << pad("class", 14);
  for (const auto& name : report.resource_names) os << pad(name, 10, true);
  os << pad("taint", 10, true) << "  lat/ports\n";
  for (const PcReportRow& row : report.rows) {
    os << pad(std::to_string(row.pc), 8) << pad(row.class_name, 14);
    for (const Rat& share : row.resource_share)
      os << pad(fmt("%.1f%%", share.to_double() * 100.0), 10, true);
    os << pad(fmt("%.1f%%", row.taint_share.to_double() * 100.0), 10, true);
    os << "  " << row.latency.str() << "/"
       << (row.resource_list.empty() ? "-" : row.resource_list) << "\n";
  }
  return os.str();
}

std::string result_to_text(const SimulationResult& result) {
  std::ostringstream os;
  os << "cycles: " << result.predicted_cycles.str() << " ("
     << fmt("%.4f", result.predicted_cycles.to_double()) << ")\n";
  os << "instructions: " << result.instruction_count << "\n";
  os << pad("resource", 14) << pad("uses", 12, true) << pad("busy", 16, true)
     << pad("t_avail", 16, true) << "\n";
  for (const ResourceStats& st : result.resources)
    os << pad(st.name, 14) << pad(std::to_string(st.uses), 12, true)
       << pad(fmt("%.2f", st.busy.to_double()), 16, true)
       << pad(fmt("%.2f", st.t_avail.to_double()), 16, true) << "\n";
  os << "cache:\n";
  for (const CacheStatsEntry& e : result.cache)
    os << "  " << pad(e.name, 10) << " hits " << pad(std::to_string(e.stats.hits), 10, true)
       << "  misses " << pad(std::to_string(e.stats.misses), 10, true)
       << "  prefetch installs "
       << pad(std::to_string(e.stats.prefetch_installs), 10, true) << "\n";
  std::uint64_t total = 0;
  for (const auto& [_, count] : result.taint_histogram) total += count;
  os << "taint histogram (" << total << " counts";
  if (total != 0) {
    os << "):\n";
    for (const auto& [pc, count] : result.taint_histogram)
      os << "  pc " << pad(std::to_string(pc), 8) << " "
         << pad(std::to_string(count), 10, true) << "  "
         << fmt("%.1f%%", 100.0 * static_cast<double>(count) /
                              static_cast<double>(total))
         << "\n";
  } else {
    os << ")\n";
  }
  return os.str();
}

}  // namespace guslite
