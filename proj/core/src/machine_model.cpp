#include "guslite/machine_model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "guslite/error.hpp"
#include "json.hpp"

namespace guslite {

namespace {

using nlohmann::json;

Rat rat_from_json(const json& j, const std::string& field) {
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer())
    throw input_error(field + ": rational must be [num, den]");
  std::int64_t d = j[1].get<std::int64_t>();
  if (d == 0) throw input_error(field + ": zero denominator");
  return Rat(j[0].get<std::int64_t>(), d);
}

Rat nonneg_rat(const json& j, const std::string& field) {
  Rat r = rat_from_json(j, field);
  if (r.is_negative()) throw input_error(field + ": must be non-negative");
  return r;
}

const json& require(const json& obj, const std::string& key,
                    const std::string& where) {
  // Returns a reference: callers iterate the result (including .items()), so
  // a by-value temporary would dangle.
  if (!obj.contains(key))
    throw input_error(where + ": missing field '" + key + "'");
  return obj.at(key);
}

bool power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

CacheLevelSpec parse_level(const json& j, const std::string& where) {
  CacheLevelSpec lv;
  lv.name = require(j, "name", where).get<std::string>();
  std::string here = where + " '" + lv.name + "'";
  lv.size = require(j, "size", here).get<std::uint64_t>();
  lv.associativity = require(j, "associativity", here).get<std::uint32_t>();
  lv.line_size = require(j, "line_size", here).get<std::uint32_t>();
  lv.extra_latency = nonneg_rat(require(j, "extra_latency", here),
                                here + ".extra_latency");
  lv.inverse_throughput = nonneg_rat(require(j, "inverse_throughput", here),
                                     here + ".inverse_throughput");
  lv.next_line_prefetch = j.value("next_line_prefetch", false);
  if (!power_of_two(lv.line_size))
    throw input_error(here + ".line_size: must be a power of two");
  if (!power_of_two(lv.associativity))
    throw input_error(here + ".associativity: must be a power of two");
  if (lv.size == 0 ||
      lv.size % (std::uint64_t(lv.associativity) * lv.line_size) != 0)
    throw input_error(here +
                      ".size: must be divisible by associativity*line_size");
  return lv;
}

void check_reserved(const std::string& name, const std::string& where) {
  static const std::set<std::string> reserved = {"frontend", "dispatch",
                                                "retire", "memory"};
  if (reserved.count(name))
    throw input_error(where + ": name '" + name + "' is reserved");
}

}  // namespace

MachineModel load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("model: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw input_error("model: document must be an object");

  MachineModel m;
  m.frontend_inverse_throughput =
      nonneg_rat(require(doc, "frontend", "model"), "model.frontend");
  m.rob_size = require(doc, "rob_size", "model").get<std::uint64_t>();
  if (m.rob_size < 1) throw input_error("model.rob_size: must be >= 1");
  m.retire_inverse_throughput =
      nonneg_rat(require(doc, "retire", "model"), "model.retire");
  m.taint_queue_factor = doc.value("taint_queue_factor", std::uint64_t(2));
  if (m.taint_queue_factor < 1)
    throw input_error("model.taint_queue_factor: must be >= 1");

  std::set<std::string> seen;
  for (const auto& rj : require(doc, "resources", "model")) {
    ResourceSpec r;
    r.name = require(rj, "name", "model.resources[]").get<std::string>();
    check_reserved(r.name, "model.resources");
    if (!seen.insert(r.name).second)
      throw input_error("model.resources: duplicate name '" + r.name + "'");
    r.inverse_throughput =
        nonneg_rat(require(rj, "inverse_throughput", "model.resources"),
                   "model.resources '" + r.name + "'.inverse_throughput");
    m.resources.push_back(std::move(r));
  }

  for (const auto& [cname, cj] :
       require(doc, "classes", "model").items()) {
    InstClass c;
    c.name = cname;
    std::string here = "model.classes '" + cname + "'";
    c.latency = nonneg_rat(require(cj, "latency", here), here + ".latency");
    for (const auto& rn : require(cj, "resources", here)) {
      std::string name = rn.get<std::string>();
      if (!seen.count(name))
        throw input_error(here + ": unknown resource '" + name + "'");
      c.resources.push_back(name);
    }
    c.uop_count = cj.value("uop_count", std::uint32_t(1));
    c.retire_slots = cj.value("retire_slots", std::uint32_t(1));
    c.mem_extra_latency_applies = cj.value("mem_extra_latency_applies", false);
    if (c.uop_count < 1) throw input_error(here + ".uop_count: must be >= 1");
    if (c.retire_slots < 1)
      throw input_error(here + ".retire_slots: must be >= 1");
    m.classes.emplace(cname, std::move(c));
  }

  const json cache = require(doc, "cache", "model");
  std::uint32_t line = 0;
  for (const auto& lj : require(cache, "levels", "model.cache")) {
    CacheLevelSpec lv = parse_level(lj, "model.cache.levels");
    check_reserved(lv.name, "model.cache.levels");
    if (seen.count(lv.name) || m.find_cache_level(lv.name) >= 0)
      throw input_error("model.cache.levels: duplicate name '" + lv.name +
                        "'");
    if (line == 0)
      line = lv.line_size;
    else if (lv.line_size != line)
      throw input_error("model.cache.levels '" + lv.name +
                        "': line_size differs across levels");
    m.cache_levels.push_back(std::move(lv));
  }
  const json mem = require(cache, "memory", "model.cache");
  CacheLevelSpec backing;
  backing.name = "memory";
  backing.is_memory = true;
  backing.line_size = line == 0 ? 64 : line;
  backing.extra_latency = nonneg_rat(require(mem, "extra_latency",
                                             "model.cache.memory"),
                                     "model.cache.memory.extra_latency");
  backing.inverse_throughput =
      nonneg_rat(require(mem, "inverse_throughput", "model.cache.memory"),
                 "model.cache.memory.inverse_throughput");
  m.cache_levels.push_back(std::move(backing));
  return m;
}

MachineModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

MachineModel scale_capacity(const MachineModel& model,
                            const CapacityDimension& dim, const Rat& w) {
  if (!(Rat(0) < w)) throw input_error("capacity weight must be > 0");
  MachineModel m = model;
  switch (dim.kind) {
    case CapacityDimension::Kind::resource: {
      int idx = m.find_resource(dim.name);
      if (idx < 0)
        throw input_error("unknown resource dimension '" + dim.name + "'");
      m.resources[idx].inverse_throughput =
          m.resources[idx].inverse_throughput / w;
      break;
    }
    case CapacityDimension::Kind::frontend:
      m.frontend_inverse_throughput = m.frontend_inverse_throughput / w;
      break;
    case CapacityDimension::Kind::retire:
      m.retire_inverse_throughput = m.retire_inverse_throughput / w;
      break;
    case CapacityDimension::Kind::latency_global:
      for (auto& [_, c] : m.classes) c.latency = c.latency / w;
      for (auto& lv : m.cache_levels) lv.extra_latency = lv.extra_latency / w;
      break;
    case CapacityDimension::Kind::rob_size: {
      Rat scaled = Rat(static_cast<std::int64_t>(m.rob_size)) * w;
      std::int64_t floored = scaled.floor();
      m.rob_size = floored < 1 ? 1 : static_cast<std::uint64_t>(floored);
      break;
    }
    case CapacityDimension::Kind::cache_bandwidth: {
      int idx = m.find_cache_level(dim.name);
      if (idx < 0)
        throw input_error("unknown cache level dimension '" + dim.name + "'");
      m.cache_levels[idx].inverse_throughput =
          m.cache_levels[idx].inverse_throughput / w;
      break;
    }
  }
  return m;
}

CapacityDimension parse_dimension(const std::string& text,
                                  const MachineModel& model) {
  CapacityDimension d;
  if (text == "latency_global") {
    d.kind = CapacityDimension::Kind::latency_global;
  } else if (text == "frontend") {
    d.kind = CapacityDimension::Kind::frontend;
  } else if (text == "rob_size") {
    d.kind = CapacityDimension::Kind::rob_size;
  } else if (text == "retire") {
    d.kind = CapacityDimension::Kind::retire;
  } else if (text.rfind("resource:", 0) == 0) {
    d.kind = CapacityDimension::Kind::resource;
    d.name = text.substr(9);
    if (model.find_resource(d.name) < 0)
      throw input_error("unknown resource in dimension '" + text + "'");
  } else if (text.rfind("cache_bandwidth:", 0) == 0) {
    d.kind = CapacityDimension::Kind::cache_bandwidth;
    d.name = text.substr(16);
    if (model.find_cache_level(d.name) < 0)
      throw input_error("unknown cache level in dimension '" + text + "'");
  } else {
    throw input_error("unknown dimension '" + text + "'");
  }
  return d;
}

std::string dimension_to_string(const CapacityDimension& dim) {
  switch (dim.kind) {
    case CapacityDimension::Kind::latency_global:
      return "latency_global";
    case CapacityDimension::Kind::frontend:
      return "frontend";
    case CapacityDimension::Kind::rob_size:
      return "rob_size";
    case CapacityDimension::Kind::retire:
      return "retire";
    case CapacityDimension::Kind::resource:
      return "resource:" + dim.name;
    case CapacityDimension::Kind::cache_bandwidth:
      return "cache_bandwidth:" + dim.name;
  }
  throw internal_error("unreachable dimension kind");
}

std::vector<CapacityDimension> default_dimensions(const MachineModel& model) {
  std::vector<CapacityDimension> dims;
  dims.push_back({CapacityDimension::Kind::latency_global, ""});
  dims.push_back({CapacityDimension::Kind::frontend, ""});
  dims.push_back({CapacityDimension::Kind::rob_size, ""});
  dims.push_back({CapacityDimension::Kind::retire, ""});
  for (const auto& r : model.resources)
    dims.push_back({CapacityDimension::Kind::resource, r.name});
  for (const auto& lv : model.cache_levels)
    dims.push_back({CapacityDimension::Kind::cache_bandwidth, lv.name});
  return dims;
}

}  // namespace guslite
