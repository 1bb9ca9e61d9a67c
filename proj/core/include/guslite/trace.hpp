#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace guslite {

struct MemAccess {
  std::uint64_t addr = 0;
  std::uint16_t size = 0;  // bytes, 1..64; may span at most two cache lines
  bool is_store = false;

  friend bool operator==(const MemAccess& a, const MemAccess& b) {
    return a.addr == b.addr && a.size == b.size && a.is_store == b.is_store;
  }
};

// One dynamic instruction. The engine never decodes machine code: all
// semantics live in the class name plus operand lists. `pc` is an arbitrary
// caller-chosen static identifier (the taint histogram is keyed on it) and
// register ids are opaque small integers (flags are just registers).
struct TraceEvent {
  std::uint64_t pc = 0;
  std::string class_name;
  std::vector<std::uint32_t> reg_reads;
  std::vector<std::uint32_t> reg_writes;
  std::vector<MemAccess> mem;

  friend bool operator==(const TraceEvent& a, const TraceEvent& b) {
    return a.pc == b.pc && a.class_name == b.class_name &&
           a.reg_reads == b.reg_reads && a.reg_writes == b.reg_writes &&
           a.mem == b.mem;
  }
};

// Single-consumer lazy event stream; next() returns false at end of input.
struct TraceCursor {
  virtual ~TraceCursor() = default;
  virtual bool next(TraceEvent& out) = 0;
};

// Replays an in-memory event vector.
class VectorCursor : public TraceCursor {
 public:
  explicit VectorCursor(std::vector<TraceEvent> events)
      : events_(std::move(events)) {}
  bool next(TraceEvent& out) override {
    if (pos_ >= events_.size()) return false;
    out = events_[pos_++];
    return true;
  }

 private:
  std::vector<TraceEvent> events_;
  std::size_t pos_ = 0;
};

// Streaming parser over the line-oriented trace format: one JSON object per
// line, {"pc":u64,"class":str,"rr":[...],"rw":[...],"mem":[{"a","s","st"}]}.
// Blank lines are skipped; malformed records raise input_error with the line
// number. Never buffers the whole trace.
class StreamTraceCursor : public TraceCursor {
 public:
  // Non-owning; `in` must outlive the cursor.
  explicit StreamTraceCursor(std::istream& in) : in_(&in) {}
  bool next(TraceEvent& out) override;

 private:
  std::istream* in_;
  std::uint64_t line_no_ = 0;
};

// Owns the underlying file stream.
std::unique_ptr<TraceCursor> open_trace_file(const std::string& path);

// Parses one trace line (exposed for tests and tools).
TraceEvent parse_trace_line(const std::string& line, std::uint64_t line_no);

// Serializes one event in the trace format (stable key order, one line, no
// trailing newline). write_trace streams a whole cursor.
std::string format_trace_line(const TraceEvent& ev);
void write_trace(std::ostream& out, TraceCursor& cursor);

// ---------------------------------------------------------------------------
// Micro-kernel DSL: declarations + a loop nest + a body of instruction
// statements whose memory addresses are affine in the loop indices
// (base + Σ stride_var × index_var). Stands in for real binary
// instrumentation at small scale.

struct KernelMemRef {
  std::uint64_t base = 0;
  std::vector<std::pair<std::size_t, std::int64_t>> strides;  // (loop, stride)
  std::uint16_t size = 0;
  bool is_store = false;
};

struct KernelStatement {
  std::uint64_t pc = 0;
  std::string class_name;
  std::vector<std::uint32_t> reg_reads;
  std::vector<std::uint32_t> reg_writes;
  std::vector<KernelMemRef> mem;
};

struct KernelLoop {
  std::string var;
  std::uint64_t count = 0;
};

struct KernelSpec {
  std::vector<std::string> registers;  // id = position
  std::vector<KernelLoop> loops;       // outermost first
  std::vector<KernelStatement> body;
};

KernelSpec load_kernel(const std::string& text);
KernelSpec load_kernel_file(const std::string& path);

// Applies var → trip-count overrides ("i=2000"); unknown vars raise
// input_error.
KernelSpec with_trip_counts(const KernelSpec& spec,
                            const std::map<std::string, std::uint64_t>& trips);

// Fully unrolled dynamic stream in nesting order (outermost slowest).
// Deterministic and pure; an empty loop nest emits the body once.
class KernelCursor : public TraceCursor {
 public:
  explicit KernelCursor(const KernelSpec& spec);
  bool next(TraceEvent& out) override;

 private:
  const KernelSpec spec_;
  std::vector<std::uint64_t> index_;
  std::size_t stmt_ = 0;
  bool done_ = false;
};

std::vector<TraceEvent> expand_kernel(const KernelSpec& spec);

// Re-openable event source: sensitivity re-runs the same input once per
// (dimension, weight), so inputs are passed as cursor factories.
using TraceSource = std::function<std::unique_ptr<TraceCursor>()>;

inline TraceSource source_from_events(std::vector<TraceEvent> events) {
  auto shared =
      std::make_shared<std::vector<TraceEvent>>(std::move(events));
  return [shared] { return std::make_unique<VectorCursor>(*shared); };
}
inline TraceSource source_from_kernel(const KernelSpec& spec) {
  return [spec] { return std::make_unique<KernelCursor>(spec); };
}
inline TraceSource source_from_file(const std::string& path) {
  return [path] { return open_trace_file(path); };
}

}  // namespace guslite
