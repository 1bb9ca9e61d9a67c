#include "doctest.h"

#include <cstddef>

#include "guslite/taint.hpp"

using guslite::TaintSet;

TEST_CASE("taint insert and contains") {
  TaintSet t;
  CHECK(t.size() == 0);
  CHECK_FALSE(t.contains(3));
  t.insert(3, 16);
  t.insert(1, 16);
  t.insert(2, 16);
  t.insert(3, 16);  // duplicate is a no-op
  CHECK(t.size() == 3);
  CHECK(t.contains(1));
  CHECK(t.contains(2));
  CHECK(t.contains(3));
  CHECK_FALSE(t.contains(4));
  // ids() is sorted ascending
  CHECK(t.ids() == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("taint union merges without duplicates") {
  TaintSet a, b;
  a.insert(1, 16);
  a.insert(5, 16);
  b.insert(1, 16);
  b.insert(3, 16);
  a.union_with(b, 16);
  CHECK(a.ids() == std::vector<std::uint64_t>{1, 3, 5});
  CHECK(b.size() == 2);  // source untouched
}

TEST_CASE("taint assign replaces content") {
  TaintSet a;
  a.insert(1, 16);
  a.insert(2, 16);
  TaintSet b;
  b.insert(9, 16);
  a.assign(b, 16);
  CHECK(a.ids() == std::vector<std::uint64_t>{9});
  a.assign_single(4);
  CHECK(a.ids() == std::vector<std::uint64_t>{4});
}

TEST_CASE("capacity evicts the smallest ids first") {
  // ids increase over time, so the smallest ids are the oldest entries.
  TaintSet t;
  for (std::uint64_t id = 0; id < 8; ++id) t.insert(id, 4);
  CHECK(t.size() == 4);
  CHECK(t.ids() == std::vector<std::uint64_t>{4, 5, 6, 7});
  CHECK_FALSE(t.contains(0));
  CHECK(t.contains(7));
}

TEST_CASE("capacity applies to unions") {
  TaintSet a, b;
  for (std::uint64_t id = 0; id < 3; ++id) a.insert(id, 8);
  for (std::uint64_t id = 10; id < 13; ++id) b.insert(id, 8);
  a.union_with(b, 4);
  CHECK(a.size() == 4);
  CHECK(a.ids() == std::vector<std::uint64_t>{2, 10, 11, 12});
}

TEST_CASE("inserting an already present id never evicts") {
  TaintSet t;
  for (std::uint64_t id = 0; id < 4; ++id) t.insert(id, 4);
  t.insert(2, 4);  // already present, set already at capacity
  CHECK(t.size() == 4);
  CHECK(t.contains(0));
}
