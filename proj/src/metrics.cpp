#include "miab/metrics.hpp"

#include <cstdio>
#include <utility>

#include "json.hpp"
#include "miab/oracle.hpp"

namespace miab {

namespace {

struct Mean {
  double sum = 0;
  std::uint64_t n = 0;

  void add(double x) {
    sum += x;
    ++n;
  }
  std::optional<double> value() const {
    return n == 0 ? std::nullopt : std::optional<double>(sum / n);
  }
};

void apply_fault(Topology& t, const Fault& f) {
  switch (f.op) {
    case Fault::Op::fail_node:
      t.fail_node(f.a);
      break;
    case Fault::Op::restore_node:
      t.restore_node(f.a);
      break;
    case Fault::Op::fail_link:
      t.fail_link(f.a, f.b);
      break;
    case Fault::Op::restore_link:
      t.restore_link(f.a, f.b);
      break;
  }
}

}  // namespace

void TraceReplay::apply(const TraceEvent& ev) {
  if (const auto* u = std::get_if<record::TableUpdated>(&ev.record)) {
    tables_[*ev.node].install(u->dest, RouteEntry{u->next_hop, u->hops});
  } else if (const auto* r = std::get_if<record::RouteRemoved>(&ev.record)) {
    tables_[*ev.node].erase(r->dest);
  } else if (const auto* f = std::get_if<record::FaultApplied>(&ev.record)) {
    apply_fault(topology_, f->fault);
  }
}

std::optional<double> table_optimality(
    const std::map<NodeId, RoutingTable>& tables, const Topology& t) {
  std::uint64_t total = 0;
  std::uint64_t optimal = 0;
  for (const auto& [node, rtab] : tables) {
    if (rtab.empty()) {
      continue;
    }
    const auto dist = oracle::distances_from(t, node);
    for (const auto& [dest, entry] : rtab) {
      ++total;
      auto it = dist.find(dest);
      if (it != dist.end() && it->second == entry.hop_count) {
        ++optimal;
      }
    }
  }
  if (total == 0) {
    return std::nullopt;
  }
  return static_cast<double>(optimal) / static_cast<double>(total);
}

std::vector<DeliverySample> delivery_samples(std::span<const TraceEvent> trace,
                                             const Topology& initial) {
  std::vector<DeliverySample> out;
  TraceReplay replay(initial);
  for (const TraceEvent& ev : trace) {
    replay.apply(ev);
    if (const auto* d = std::get_if<record::DataDelivered>(&ev.record)) {
      const auto dist =
          oracle::bfs_distance(replay.topology(), d->src, *ev.node);
      if (dist && *dist > 0) {
        out.push_back(DeliverySample{ev.at, d->src, *ev.node, d->hops,
                                     static_cast<double>(d->hops) / *dist});
      }
    }
  }
  return out;
}

RunSummary summarize(std::span<const TraceEvent> trace,
                     const Topology& initial) {
  if (trace.empty() ||
      !std::holds_alternative<record::RunEnd>(trace.back().record)) {
    throw IncompleteTrace("trace does not end with a run-end record");
  }
  RunSummary s;
  TraceReplay replay(initial);
  std::map<std::pair<NodeId, NodeId>, Tick> open;
  Mean latency;
  Mean stretch;
  Mean delivery;

  for (const TraceEvent& ev : trace) {
    replay.apply(ev);
    if (const auto* d = std::get_if<record::DiscoveryAttempt>(&ev.record)) {
      if (d->attempt == 0) {
        ++s.discoveries_attempted;
        open[{*ev.node, d->dest}] = ev.at;
      } else {
        ++s.retries;
      }
    } else if (const auto* f = std::get_if<record::RouteFound>(&ev.record)) {
      ++s.discoveries_succeeded;
      if (auto it = open.find({*ev.node, f->dest}); it != open.end()) {
        latency.add(static_cast<double>(ev.at - it->second));
        open.erase(it);
      }
      const auto dist =
          oracle::bfs_distance(replay.topology(), *ev.node, f->dest);
      if (dist && *dist > 0 && !f->path.empty()) {
        stretch.add(static_cast<double>(f->path.size() - 1) / *dist);
      }
    } else if (const auto* i = std::get_if<record::Inaccessible>(&ev.record)) {
      ++s.discoveries_failed;
      open.erase({*ev.node, i->dest});
    } else if (const auto* sent = std::get_if<record::Sent>(&ev.record)) {
      if (const auto* b = std::get_if<Bottle>(&sent->payload)) {
        ++s.bottle_sends;
        s.total_bottle_bytes += bottle_wire_size(b->history.size());
      }
    } else if (const auto* dd = std::get_if<record::DataDelivered>(&ev.record)) {
      ++s.data_delivered;
      const auto dist =
          oracle::bfs_distance(replay.topology(), dd->src, *ev.node);
      if (dist && *dist > 0) {
        delivery.add(static_cast<double>(dd->hops) / *dist);
      }
    } else if (std::holds_alternative<record::DataDropped>(ev.record)) {
      ++s.data_dropped;
    }
  }

  s.mean_discovery_latency = latency.value();
  s.mean_stretch = stretch.value();
  s.mean_delivery_stretch = delivery.value();
  if (s.bottle_sends > 0) {
    s.mean_bottle_bytes = static_cast<double>(s.total_bottle_bytes) /
                          static_cast<double>(s.bottle_sends);
  }
  for (const auto& [node, rtab] : replay.tables()) {
    s.table_entries += rtab.size();
  }
  s.table_optimality = table_optimality(replay.tables(), replay.topology());
  return s;
}

std::string summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["discoveries_attempted"] = s.discoveries_attempted;
  j["discoveries_succeeded"] = s.discoveries_succeeded;
  j["discoveries_failed"] = s.discoveries_failed;
  j["retries"] = s.retries;
  j["mean_discovery_latency"] = opt(s.mean_discovery_latency);
  j["mean_stretch"] = opt(s.mean_stretch);
  j["total_bottle_bytes"] = s.total_bottle_bytes;
  j["bottle_sends"] = s.bottle_sends;
  j["mean_bottle_bytes"] = opt(s.mean_bottle_bytes);
  j["table_entries"] = s.table_entries;
  j["table_optimality"] = opt(s.table_optimality);
  j["data_delivered"] = s.data_delivered;
  j["data_dropped"] = s.data_dropped;
  j["mean_delivery_stretch"] = opt(s.mean_delivery_stretch);
  return j.dump(2) + "\n";
}

std::string summary_table(const RunSummary& s) {
  std::vector<std::pair<std::string, std::string>> rows;
  auto count = [&](const char* name, std::uint64_t v) {
    rows.emplace_back(name, std::to_string(v));
  };
  auto real = [&](const char* name, const std::optional<double>& v) {
    char buf[32] = "-";
    if (v) {
      std::snprintf(buf, sizeof buf, "%.4f", *v);
    }
    rows.emplace_back(name, buf);
  };
  count("discoveries attempted", s.discoveries_attempted);
  count("discoveries succeeded", s.discoveries_succeeded);
  count("discoveries failed", s.discoveries_failed);
  count("retries", s.retries);
  real("mean discovery latency", s.mean_discovery_latency);
  real("mean stretch", s.mean_stretch);
  count("total bottle bytes", s.total_bottle_bytes);
  count("bottle sends", s.bottle_sends);
  real("mean bottle bytes", s.mean_bottle_bytes);
  count("table entries", s.table_entries);
  real("table optimality", s.table_optimality);
  count("data delivered", s.data_delivered);
  count("data dropped", s.data_dropped);
  real("mean delivery stretch", s.mean_delivery_stretch);

  std::size_t width = 0;
  for (const auto& [name, value] : rows) {
    width = std::max(width, name.size());
  }
  std::string out;
  for (const auto& [name, value] : rows) {
    out += name;
    out.append(width - name.size() + 2, ' ');
    out += value;
    out += '\n';
  }
  return out;
}

}  // namespace miab
