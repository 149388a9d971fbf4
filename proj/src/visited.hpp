#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sheesh/common.hpp"

namespace sheesh::detail {

/// Epoch-stamped visited marks; reset() is O(1) except on epoch wrap.
class VisitedTable {
 public:
  void ensure(std::size_t capacity) {
    if (marks_.size() < capacity) marks_.resize(capacity, 0);
  }

  void reset() {
    if (++epoch_ == 0) {
      std::fill(marks_.begin(), marks_.end(), 0);
      epoch_ = 1;
    }
  }

  /// Marks `id`; returns whether it was already marked.
  bool test_and_set(NodeId id) {
    if (marks_[id] == epoch_) return true;
    marks_[id] = epoch_;
    return false;
  }

 private:
  std::vector<std::uint32_t> marks_;
  std::uint32_t epoch_ = 0;
};

inline VisitedTable& thread_visited(std::size_t capacity) {
  thread_local VisitedTable table;
  table.ensure(capacity);
  return table;
}

}  // namespace sheesh::detail
