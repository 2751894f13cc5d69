#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace miab {

/// Simulation time in ticks. One tick is the default per-hop latency.
using Tick = std::uint64_t;

/// Node identifier, unique within a topology.
struct NodeId {
  std::uint16_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint16_t v) : value(v) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

using NodeSet = std::set<NodeId>;
using Path = std::vector<NodeId>;

inline std::string to_string(NodeId id) { return std::to_string(id.value); }

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch a single type at the process boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MIAB_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

MIAB_DEFINE_ERROR(InvalidRequest);
MIAB_DEFINE_ERROR(Overflow);
MIAB_DEFINE_ERROR(MalformedBottle);
MIAB_DEFINE_ERROR(PreconditionViolation);
MIAB_DEFINE_ERROR(UnknownNode);
MIAB_DEFINE_ERROR(UnknownEdge);
MIAB_DEFINE_ERROR(ConfigError);
MIAB_DEFINE_ERROR(IncompleteTrace);
MIAB_DEFINE_ERROR(InvalidCount);
MIAB_DEFINE_ERROR(InvalidPath);

#undef MIAB_DEFINE_ERROR

}  // namespace miab

template <>
struct std::hash<miab::NodeId> {
  std::size_t operator()(miab::NodeId id) const noexcept {
    return std::hash<std::uint16_t>{}(id.value);
  }
};
