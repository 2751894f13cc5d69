#include "miab/domain.hpp"

#include <algorithm>
#include <limits>

namespace miab {

std::string to_string(const BottleId& id) {
  return std::to_string(id.origin.value) + "-" + std::to_string(id.seq);
}

std::string_view to_string(FsmState s) {
  switch (s) {
    case FsmState::idle:
      return "idle";
    case FsmState::route_req:
      return "route_req";
    case FsmState::btl_manage:
      return "btl_manage";
  }
  return "?";
}

const RouteEntry* RoutingTable::find(NodeId dest) const {
  auto it = entries_.find(dest);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<RouteEntry> RoutingTable::erase(NodeId dest) {
  auto it = entries_.find(dest);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  RouteEntry removed = it->second;
  entries_.erase(it);
  return removed;
}

std::vector<std::pair<NodeId, RouteEntry>> RoutingTable::purge_next_hop(
    NodeId hop) {
  std::vector<std::pair<NodeId, RouteEntry>> removed;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.next_hop == hop) {
      removed.emplace_back(it->first, it->second);
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::size_t NodeState::queued_packet_count() const {
  std::size_t n = 0;
  for (const auto& [id, req] : pending) {
    n += req.queued_packets.size();
  }
  return n;
}

const PendingRequest* NodeState::pending_for(NodeId dest) const {
  for (const auto& [id, req] : pending) {
    if (req.dest == dest) {
      return &req;
    }
  }
  return nullptr;
}

Bottle make_bottle(NodeId src, NodeId dest, std::uint16_t seq) {
  if (src == dest) {
    throw InvalidRequest("bottle requested from node " + to_string(src) +
                         " to itself");
  }
  return Bottle{.src = src,
                .dest = dest,
                .id = BottleId{src, seq},
                .rf = false,
                .failure = false,
                .history = {src}};
}

std::size_t bottle_hops(const Bottle& b) {
  return b.history.empty() ? 0 : b.history.size() - 1;
}

void validate_bottle(const Bottle& b) {
  const std::string id = to_string(b.id);
  if (b.history.empty()) {
    throw MalformedBottle("bottle " + id + " has an empty history");
  }
  if (b.history.front() != b.src) {
    throw MalformedBottle("bottle " + id + " history does not start at src");
  }
  if (b.rf && b.failure) {
    throw MalformedBottle("bottle " + id + " is both rf and failure");
  }
  Path sorted = b.history;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw MalformedBottle("bottle " + id + " history revisits a node");
  }
  if (b.rf && b.history.back() != b.dest) {
    throw MalformedBottle("rf bottle " + id + " history does not end at dest");
  }
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

}  // namespace

std::vector<std::uint8_t> serialize_bottle(const Bottle& b) {
  if (b.history.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Overflow("bottle " + to_string(b.id) + " history of " +
                   std::to_string(b.history.size()) +
                   " entries exceeds the 16-bit length field");
  }
  std::vector<std::uint8_t> out;
  out.reserve(bottle_wire_size(b.history.size()));
  put_u16(out, b.src.value);
  put_u16(out, b.dest.value);
  put_u16(out, b.id.origin.value);
  put_u16(out, b.id.seq);
  out.push_back(static_cast<std::uint8_t>((b.rf ? 0x1 : 0) |
                                          (b.failure ? 0x2 : 0)));
  put_u16(out, static_cast<std::uint16_t>(b.history.size()));
  for (NodeId n : b.history) {
    put_u16(out, n.value);
  }
  return out;
}

Bottle deserialize_bottle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBottleHeaderBytes) {
    throw MalformedBottle("truncated bottle header: " +
                          std::to_string(bytes.size()) + " bytes");
  }
  const std::uint8_t flags = bytes[8];
  if (flags & ~0x3u) {
    throw MalformedBottle("unknown bottle flag bits");
  }
  const std::size_t len = get_u16(bytes, 9);
  if (bytes.size() != bottle_wire_size(len)) {
    throw MalformedBottle("bottle length mismatch: header says " +
                          std::to_string(len) + " history entries, got " +
                          std::to_string(bytes.size()) + " bytes");
  }
  Bottle b;
  b.src = NodeId{get_u16(bytes, 0)};
  b.dest = NodeId{get_u16(bytes, 2)};
  b.id = BottleId{NodeId{get_u16(bytes, 4)}, get_u16(bytes, 6)};
  b.rf = flags & 0x1;
  b.failure = flags & 0x2;
  b.history.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    b.history.emplace_back(get_u16(bytes, kBottleHeaderBytes + 2 * i));
  }
  return b;
}

}  // namespace miab
