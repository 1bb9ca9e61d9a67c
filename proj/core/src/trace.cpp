#include "guslite/trace.hpp"

#include <fstream>
#include <sstream>

#include "guslite/error.hpp"
#include "json.hpp"

namespace guslite {

namespace {

using nlohmann::json;

[[noreturn]] void bad_record(std::uint64_t line_no, const std::string& why) {
  throw input_error("trace line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

TraceEvent parse_trace_line(const std::string& line, std::uint64_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    bad_record(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_record(line_no, "record must be an object");
  TraceEvent ev;
  for (const auto& [key, val] : j.items()) {
    if (key == "pc") {
      ev.pc = val.get<std::uint64_t>();
    } else if (key == "class") {
      ev.class_name = val.get<std::string>();
    } else if (key == "rr") {
      for (const auto& r : val) ev.reg_reads.push_back(r.get<std::uint32_t>());
    } else if (key == "rw") {
      for (const auto& r : val) ev.reg_writes.push_back(r.get<std::uint32_t>());
    } else if (key == "mem") {
      for (const auto& mj : val) {
        MemAccess a;
        if (!mj.contains("a") || !mj.contains("s"))
          bad_record(line_no, "mem entry needs 'a' and 's'");
        a.addr = mj.at("a").get<std::uint64_t>();
        a.size = mj.at("s").get<std::uint16_t>();
        a.is_store = mj.value("st", false);
        if (a.size < 1) bad_record(line_no, "mem size must be >= 1");
        ev.mem.push_back(a);
      }
    } else {
      bad_record(line_no, "unknown field '" + key + "'");
    }
  }
  if (!j.contains("class")) bad_record(line_no, "missing 'class'");
  return ev;
}

bool StreamTraceCursor::next(TraceEvent& out) {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out = parse_trace_line(line, line_no_);
    return true;
  }
  return false;
}

namespace {

class FileTraceCursor : public TraceCursor {
 public:
  explicit FileTraceCursor(const std::string& path)
      : file_(path, std::ios::binary), inner_(file_) {
    if (!file_) throw input_error("cannot open trace file: " + path);
  }
  bool next(TraceEvent& out) override { return inner_.next(out); }

 private:
  std::ifstream file_;
  StreamTraceCursor inner_;
};

}  // namespace

std::unique_ptr<TraceCursor> open_trace_file(const std::string& path) {
  return std::make_unique<FileTraceCursor>(path);
}

std::string format_trace_line(const TraceEvent& ev) {
  // Hand-rolled for stable key order and byte-reproducible output.
  std::ostringstream os;
  os << "{\"pc\":" << ev.pc << ",\"class\":" << json(ev.class_name).dump()
     << ",\"rr\":[";
  for (std::size_t i = 0; i < ev.reg_reads.size(); ++i)
    os << (i ? "," : "") << ev.reg_reads[i];
  os << "],\"rw\":[";
  for (std::size_t i = 0; i < ev.reg_writes.size(); ++i)
    os << (i ? "," : "") << ev.reg_writes[i];
  os << "],\"mem\":[";
  for (std::size_t i = 0; i < ev.mem.size(); ++i) {
    const MemAccess& a = ev.mem[i];
    os << (i ? "," : "") << "{\"a\":" << a.addr << ",\"s\":" << a.size
       << ",\"st\":" << (a.is_store ? "true" : "false") << "}";
  }
  os << "]}";
  return os.str();
}

void write_trace(std::ostream& out, TraceCursor& cursor) {
  TraceEvent ev;
  while (cursor.next(ev)) out << format_trace_line(ev) << "\n";
}

// ---------------------------------------------------------------------------
// Kernel DSL

namespace {

std::uint32_t resolve_register(const KernelSpec& spec, const std::string& name,
                               const std::string& where) {
  for (std::size_t i = 0; i < spec.registers.size(); ++i)
    if (spec.registers[i] == name) return static_cast<std::uint32_t>(i);
  throw input_error(where + ": unresolved register '" + name + "'");
}

std::size_t resolve_loop(const KernelSpec& spec, const std::string& var,
                         const std::string& where) {
  for (std::size_t i = 0; i < spec.loops.size(); ++i)
    if (spec.loops[i].var == var) return i;
  throw input_error(where + ": address stride references unknown loop '" +
                    var + "'");
}

}  // namespace

KernelSpec load_kernel(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("kernel: invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw input_error("kernel: document must be an object");

  KernelSpec spec;
  for (const auto& r : doc.value("registers", json::array()))
    spec.registers.push_back(r.get<std::string>());
  for (const auto& lj : doc.value("loops", json::array())) {
    KernelLoop loop;
    loop.var = lj.at("var").get<std::string>();
    loop.count = lj.at("count").get<std::uint64_t>();
    for (const auto& prev : spec.loops)
      if (prev.var == loop.var)
        throw input_error("kernel.loops: duplicate variable '" + loop.var +
                          "'");
    spec.loops.push_back(std::move(loop));
  }
  if (!doc.contains("body")) throw input_error("kernel: missing 'body'");
  std::uint64_t index = 0;
  for (const auto& sj : doc.at("body")) {
    KernelStatement st;
    std::string where = "kernel.body[" + std::to_string(index) + "]";
    st.pc = sj.value("pc", index);
    st.class_name = sj.at("class").get<std::string>();
    for (const auto& r : sj.value("reads", json::array()))
      st.reg_reads.push_back(
          resolve_register(spec, r.get<std::string>(), where));
    for (const auto& r : sj.value("writes", json::array()))
      st.reg_writes.push_back(
          resolve_register(spec, r.get<std::string>(), where));
    for (const auto& mj : sj.value("mem", json::array())) {
      KernelMemRef ref;
      ref.base = mj.at("base").get<std::uint64_t>();
      ref.size = mj.at("size").get<std::uint16_t>();
      ref.is_store = mj.value("store", false);
      if (ref.size < 1) throw input_error(where + ": mem size must be >= 1");
      const json strides = mj.value("strides", json::object());
      for (const auto& [var, stride] : strides.items())
        ref.strides.emplace_back(resolve_loop(spec, var, where),
                                 stride.get<std::int64_t>());
      st.mem.push_back(std::move(ref));
    }
    spec.body.push_back(std::move(st));
    ++index;
  }
  return spec;
}

KernelSpec load_kernel_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open kernel file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_kernel(buf.str());
}

KernelSpec with_trip_counts(
    const KernelSpec& spec,
    const std::map<std::string, std::uint64_t>& trips) {
  KernelSpec out = spec;
  for (const auto& [var, count] : trips) {
    bool found = false;
    for (auto& loop : out.loops)
      if (loop.var == var) {
        loop.count = count;
        found = true;
      }
    if (!found)
      throw input_error("trip-count override names unknown loop '" + var +
                        "'");
  }
  return out;
}

KernelCursor::KernelCursor(const KernelSpec& spec)
    : spec_(spec), index_(spec.loops.size(), 0) {
  for (const auto& loop : spec_.loops)
    if (loop.count == 0) done_ = true;
  if (spec_.body.empty()) done_ = true;
}

bool KernelCursor::next(TraceEvent& out) {
  if (done_) return false;
  const KernelStatement& st = spec_.body[stmt_];
  out.pc = st.pc;
  out.class_name = st.class_name;
  out.reg_reads = st.reg_reads;
  out.reg_writes = st.reg_writes;
  out.mem.clear();
  for (const auto& ref : st.mem) {
    MemAccess a;
    std::int64_t offset = 0;
    for (const auto& [loop, stride] : ref.strides)
      offset += stride * static_cast<std::int64_t>(index_[loop]);
    a.addr = ref.base + static_cast<std::uint64_t>(offset);
    a.size = ref.size;
    a.is_store = ref.is_store;
    out.mem.push_back(a);
  }

  // Advance: next statement, then odometer over the loop nest
  // (innermost fastest).
  if (++stmt_ < spec_.body.size()) return true;
  stmt_ = 0;
  if (index_.empty()) {
    done_ = true;
    return true;
  }
  std::size_t level = index_.size();
  while (level > 0) {
    --level;
    if (++index_[level] < spec_.loops[level].count) return true;
    index_[level] = 0;
  }
  done_ = true;
  return true;
}

std::vector<TraceEvent> expand_kernel(const KernelSpec& spec) {
  std::vector<TraceEvent> events;
  KernelCursor cursor(spec);
  TraceEvent ev;
  while (cursor.next(ev)) events.push_back(ev);
  return events;
}

}  // namespace guslite
