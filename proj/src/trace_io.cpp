// Line-delimited JSON encoding of trace records.

#include <sstream>

#include "json.hpp"
#include "miab/engine.hpp"

namespace miab {

using ojson = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ojson path_json(const Path& p) {
  ojson out = ojson::array();
  for (NodeId n : p) {
    out.push_back(n.value);
  }
  return out;
}

ojson bottle_json(const Bottle& b) {
  ojson j;
  j["id"] = to_string(b.id);
  j["src"] = b.src.value;
  j["dest"] = b.dest.value;
  j["rf"] = b.rf;
  j["failure"] = b.failure;
  j["history"] = path_json(b.history);
  return j;
}

ojson packet_json(const DataPacket& p) {
  ojson j;
  j["src"] = p.src.value;
  j["dest"] = p.dest.value;
  j["len"] = p.payload_len;
  j["path"] = path_json(p.path);
  return j;
}

NodeId node_of(const ojson& j, const char* key) {
  return NodeId{j.at(key).get<std::uint16_t>()};
}

Path path_of(const ojson& j) {
  Path p;
  for (const auto& n : j) {
    p.emplace_back(n.get<std::uint16_t>());
  }
  return p;
}

BottleId bottle_id_of(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) {
    throw ConfigError("malformed bottle id '" + s + "'");
  }
  return BottleId{NodeId{static_cast<std::uint16_t>(std::stoul(s.substr(0, dash)))},
                  static_cast<std::uint16_t>(std::stoul(s.substr(dash + 1)))};
}

Bottle bottle_of(const ojson& j) {
  return Bottle{.src = node_of(j, "src"),
                .dest = node_of(j, "dest"),
                .id = bottle_id_of(j.at("id").get<std::string>()),
                .rf = j.at("rf").get<bool>(),
                .failure = j.at("failure").get<bool>(),
                .history = path_of(j.at("history"))};
}

DataPacket packet_of(const ojson& j) {
  return DataPacket{.src = node_of(j, "src"),
                    .dest = node_of(j, "dest"),
                    .payload_len = j.at("len").get<std::uint32_t>(),
                    .path = path_of(j.at("path"))};
}

template <typename Enum, std::size_t N>
Enum enum_of(const std::string& s, const Enum (&values)[N]) {
  for (Enum v : values) {
    if (to_string(v) == s) {
      return v;
    }
  }
  throw ConfigError("unknown trace value '" + s + "'");
}

constexpr EliminateReason kEliminateReasons[] = {
    EliminateReason::hop_limit, EliminateReason::dead_end,
    EliminateReason::return_path_broken};
constexpr DropReason kDropReasons[] = {
    DropReason::queue_full, DropReason::inaccessible, DropReason::ttl_expired,
    DropReason::node_down, DropReason::route_broken};
constexpr FailReason kFailReasons[] = {FailReason::link_down,
                                       FailReason::receiver_down};
constexpr EndReason kEndReasons[] = {EndReason::quiescent, EndReason::horizon};

}  // namespace

std::string trace_line(const TraceEvent& ev) {
  ojson j;
  j["at"] = ev.at;
  j["seq"] = ev.seq;
  if (ev.node) {
    j["node"] = ev.node->value;
  }
  std::visit(
      overloaded{
          [&](const record::Sent& r) {
            j["type"] = "sent";
            j["msg"] = r.msg;
            j["to"] = r.to.value;
            if (const auto* b = std::get_if<Bottle>(&r.payload)) {
              j["kind"] = "bottle";
              j["bytes"] = bottle_wire_size(b->history.size());
              j["bottle"] = bottle_json(*b);
            } else {
              j["kind"] = "data";
              j["packet"] = packet_json(std::get<DataPacket>(r.payload));
            }
          },
          [&](const record::Received& r) {
            j["type"] = "received";
            j["msg"] = r.msg;
            j["from"] = r.from.value;
          },
          [&](const record::DeliveryFailed& r) {
            j["type"] = "delivery_failed";
            j["msg"] = r.msg;
            j["to"] = r.to.value;
            j["reason"] = to_string(r.reason);
          },
          [&](const record::Eliminated& r) {
            j["type"] = "eliminated";
            j["id"] = to_string(r.id);
            j["reason"] = to_string(r.reason);
          },
          [&](const record::TableUpdated& r) {
            j["type"] = "table_updated";
            j["dest"] = r.dest.value;
            j["next_hop"] = r.next_hop.value;
            j["hops"] = r.hops;
          },
          [&](const record::RouteRemoved& r) {
            j["type"] = "route_removed";
            j["dest"] = r.dest.value;
            j["next_hop"] = r.next_hop.value;
            j["hops"] = r.hops;
          },
          [&](const record::DiscoveryAttempt& r) {
            j["type"] = "discovery_attempt";
            j["dest"] = r.dest.value;
            j["id"] = to_string(r.id);
            j["attempt"] = r.attempt;
          },
          [&](const record::RouteFound& r) {
            j["type"] = "route_found";
            j["dest"] = r.dest.value;
            j["path"] = path_json(r.path);
          },
          [&](const record::Inaccessible& r) {
            j["type"] = "inaccessible";
            j["dest"] = r.dest.value;
          },
          [&](const record::DataDelivered& r) {
            j["type"] = "data_delivered";
            j["src"] = r.src.value;
            j["hops"] = r.hops;
          },
          [&](const record::DataDropped& r) {
            j["type"] = "data_dropped";
            j["src"] = r.src.value;
            j["dest"] = r.dest.value;
            j["reason"] = to_string(r.reason);
          },
          [&](const record::FaultApplied& r) {
            j["type"] = "fault";
            j["op"] = to_string(r.fault.op);
            j["a"] = r.fault.a.value;
            if (r.fault.op == Fault::Op::fail_link ||
                r.fault.op == Fault::Op::restore_link) {
              j["b"] = r.fault.b.value;
            }
          },
          [&](const record::RunEnd& r) {
            j["type"] = "end";
            j["reason"] = to_string(r.reason);
          },
      },
      ev.record);
  return j.dump();
}

std::string format_trace(std::span<const TraceEvent> trace) {
  std::string out;
  for (const TraceEvent& ev : trace) {
    out += trace_line(ev);
    out += '\n';
  }
  return out;
}

TraceEvent parse_trace_line(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw ConfigError(std::string("trace: ") + e.what());
  }
  try {
    TraceEvent ev;
    ev.at = j.at("at").get<Tick>();
    ev.seq = j.at("seq").get<std::uint64_t>();
    if (j.contains("node")) {
      ev.node = node_of(j, "node");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "sent") {
      Payload payload =
          j.at("kind") == "bottle" ? Payload{bottle_of(j.at("bottle"))}
                                   : Payload{packet_of(j.at("packet"))};
      ev.record = record::Sent{j.at("msg").get<std::uint64_t>(),
                               node_of(j, "to"), std::move(payload)};
    } else if (type == "received") {
      ev.record = record::Received{j.at("msg").get<std::uint64_t>(),
                                   node_of(j, "from")};
    } else if (type == "delivery_failed") {
      ev.record = record::DeliveryFailed{
          j.at("msg").get<std::uint64_t>(), node_of(j, "to"),
          enum_of(j.at("reason").get<std::string>(), kFailReasons)};
    } else if (type == "eliminated") {
      ev.record = record::Eliminated{
          bottle_id_of(j.at("id").get<std::string>()),
          enum_of(j.at("reason").get<std::string>(), kEliminateReasons)};
    } else if (type == "table_updated") {
      ev.record = record::TableUpdated{node_of(j, "dest"),
                                       node_of(j, "next_hop"),
                                       j.at("hops").get<std::uint32_t>()};
    } else if (type == "route_removed") {
      ev.record = record::RouteRemoved{node_of(j, "dest"),
                                       node_of(j, "next_hop"),
                                       j.at("hops").get<std::uint32_t>()};
    } else if (type == "discovery_attempt") {
      ev.record = record::DiscoveryAttempt{
          node_of(j, "dest"), bottle_id_of(j.at("id").get<std::string>()),
          j.at("attempt").get<std::uint32_t>()};
    } else if (type == "route_found") {
      ev.record = record::RouteFound{node_of(j, "dest"), path_of(j.at("path"))};
    } else if (type == "inaccessible") {
      ev.record = record::Inaccessible{node_of(j, "dest")};
    } else if (type == "data_delivered") {
      ev.record = record::DataDelivered{node_of(j, "src"),
                                        j.at("hops").get<std::uint32_t>()};
    } else if (type == "data_dropped") {
      ev.record = record::DataDropped{
          node_of(j, "src"), node_of(j, "dest"),
          enum_of(j.at("reason").get<std::string>(), kDropReasons)};
    } else if (type == "fault") {
      Fault f{fault_op_from_string(j.at("op").get<std::string>()),
              node_of(j, "a"), NodeId{}};
      if (j.contains("b")) {
        f.b = node_of(j, "b");
      }
      ev.record = record::FaultApplied{f};
    } else if (type == "end") {
      ev.record = record::RunEnd{
          enum_of(j.at("reason").get<std::string>(), kEndReasons)};
    } else {
      throw ConfigError("trace: unknown record type '" + type + "'");
    }
    return ev;
  } catch (const ojson::exception& e) {
    throw ConfigError(std::string("trace: ") + e.what());
  }
}

Trace parse_trace(const std::string& text) {
  Trace out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      out.push_back(parse_trace_line(line));
    }
  }
  return out;
}

}  // namespace miab
