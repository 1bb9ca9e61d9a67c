#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace guslite {

// Set of dynamic-instruction ids carried on resources, instructions, and
// shadow entries. Backed by a sorted vector: ids are assigned in program
// order, so "oldest" == smallest, membership is a binary search, and union
// is a linear merge. Capacity-capped; overflow evicts the oldest ids (they
// belong to instructions that left the causality window long ago).
class TaintSet {
 public:
  bool contains(std::uint64_t id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  void clear() { ids_.clear(); }

  void insert(std::uint64_t id, std::size_t cap) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) return;
    ids_.insert(it, id);
    enforce_cap(cap);
  }

  // this ← this ∪ other (linear merge of two sorted vectors).
  void union_with(const TaintSet& other, std::size_t cap) {
    if (other.ids_.empty()) return;
    if (ids_.empty()) {
      ids_ = other.ids_;
      enforce_cap(cap);
      return;
    }
    std::vector<std::uint64_t> merged;
    merged.reserve(ids_.size() + other.ids_.size());
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                   other.ids_.end(), std::back_inserter(merged));
    ids_ = std::move(merged);
    enforce_cap(cap);
  }

  void assign(const TaintSet& other, std::size_t cap) {
    ids_ = other.ids_;
    enforce_cap(cap);
  }

  void assign_single(std::uint64_t id) {
    ids_.clear();
    ids_.push_back(id);
  }

  friend bool operator==(const TaintSet& a, const TaintSet& b) {
    return a.ids_ == b.ids_;
  }

 private:
  void enforce_cap(std::size_t cap) {
    if (ids_.size() > cap)
      ids_.erase(ids_.begin(), ids_.begin() + (ids_.size() - cap));
  }

  std::vector<std::uint64_t> ids_;
};

}  // namespace guslite
