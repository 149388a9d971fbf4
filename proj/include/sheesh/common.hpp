#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace sheesh {

/// Graph-internal identifier of a center. Datasets use 64-bit indices.
using NodeId = std::uint32_t;
inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();

/// A (node, squared distance) pair. Ordering is by distance, then by id, so
/// that every container of neighbors has a single deterministic order.
struct Neighbor {
  NodeId id = kInvalidNode;
  float distance = 0.0f;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
  friend bool operator>(const Neighbor& a, const Neighbor& b) { return b < a; }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Thrown when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed on-disk vector data. `offset` is the byte offset of the
/// offending record header or payload.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration, detected before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SHEESH_EXPECTS(cond, msg)                                 \
  do {                                                            \
    if (!(cond)) throw ::sheesh::ContractViolation(std::string(msg)); \
  } while (0)

}  // namespace sheesh
