#include "miab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "miab/generators.hpp"

namespace miab {

using nlohmann::json;

namespace {

class Fields {
 public:
  Fields(const json& obj, std::string context)
      : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) {
      fail("expected an object");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(context_ + ": " + what);
  }

  [[noreturn]] void fail(const std::string& field,
                         const std::string& what) const {
    throw ConfigError(context_ + ": field '" + field + "': " + what);
  }

  bool has(const std::string& field) const { return obj_.contains(field); }

  const json& at(const std::string& field) const {
    if (!obj_.contains(field)) {
      fail(field, "missing");
    }
    return obj_.at(field);
  }

  std::uint64_t uint(const std::string& field,
                     std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) const {
    const json& v = at(field);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(field, "expected a non-negative integer, got " + v.dump());
    }
    const auto x = v.get<std::uint64_t>();
    if (x > max) {
      fail(field, "value " + std::to_string(x) + " exceeds " + std::to_string(max));
    }
    return x;
  }

  std::uint64_t uint_or(const std::string& field, std::uint64_t fallback) const {
    return has(field) ? uint(field) : fallback;
  }

  NodeId node(const std::string& field) const {
    return NodeId{static_cast<std::uint16_t>(
        uint(field, std::numeric_limits<std::uint16_t>::max()))};
  }

  std::string str(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_string()) {
      fail(field, "expected a string, got " + v.dump());
    }
    return v.get<std::string>();
  }

  bool boolean(const std::string& field) const {
    const json& v = at(field);
    if (!v.is_boolean()) {
      fail(field, "expected true or false, got " + v.dump());
    }
    return v.get<bool>();
  }

  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; })) {
        fail(key, "unknown field");
      }
    }
  }

  const std::string& context() const { return context_; }

 private:
  const json& obj_;
  std::string context_;
};

Topology topology_from(const Fields& f, const std::filesystem::path& base_dir,
                       std::uint64_t seed) {
  const std::string ctx = f.context() + ": field 'topology'";
  const Fields t(f.at("topology"), ctx);
  try {
    if (t.has("file")) {
      t.only({"file"});
      std::filesystem::path p = t.str("file");
      return load_topology(p.is_absolute() ? p : base_dir / p);
    }
    if (t.has("generate")) {
      t.only({"generate"});
      const Fields g(t.at("generate"), ctx + ".generate");
      g.only({"kind", "nodes", "seed"});
      return generate_topology(topology_kind_from_string(g.str("kind")),
                               g.uint("nodes"), g.uint_or("seed", seed));
    }
    return parse_topology(f.at("topology").dump(), ctx);
  } catch (const InvalidCount& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.find(ctx) != std::string::npos) {
      throw;
    }
    throw ConfigError(ctx + ": " + msg);
  }
}

ProtocolConfig protocol_from(const Fields& root, std::size_t node_count) {
  const json empty = json::object();
  const Fields p(root.has("protocol") ? root.at("protocol") : empty,
                 root.context() + ": field 'protocol'");
  p.only({"hop_limit", "timeout", "retry_limit", "queue_cap",
          "per_hop_latency", "beacon_period", "guided_forwarding"});
  const Tick latency = p.uint_or("per_hop_latency", 1);
  if (latency == 0) {
    p.fail("per_hop_latency", "must be positive");
  }
  ProtocolConfig cfg = ProtocolConfig::defaults_for(node_count, latency);
  if (p.has("hop_limit")) {
    cfg.hop_limit = static_cast<std::uint32_t>(
        p.uint("hop_limit", std::numeric_limits<std::uint16_t>::max() - 1));
    if (cfg.hop_limit == 0) {
      p.fail("hop_limit", "must be positive");
    }
    cfg.timeout = 2 * Tick{cfg.hop_limit} * latency;
  }
  cfg.timeout = p.uint_or("timeout", cfg.timeout);
  cfg.retry_limit = static_cast<std::uint32_t>(
      p.has("retry_limit") ? p.uint("retry_limit", 1'000'000) : cfg.retry_limit);
  cfg.queue_cap = p.uint_or("queue_cap", cfg.queue_cap);
  cfg.beacon_period = p.uint_or("beacon_period", latency);
  if (cfg.beacon_period == 0) {
    p.fail("beacon_period", "must be positive");
  }
  if (p.has("guided_forwarding")) {
    cfg.guided_forwarding = p.boolean("guided_forwarding");
  }
  return cfg;
}

void require_node(const Fields& f, const std::string& field, NodeId n,
                  const Topology& t) {
  if (!t.has_node(n)) {
    f.fail(field, "node " + to_string(n) + " is not in the topology");
  }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text,
                              const std::filesystem::path& base_dir,
                              const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  const Fields root(doc, origin);
  root.only({"seed", "topology", "protocol", "requests", "random_requests",
             "faults", "horizon", "output"});

  ScenarioConfig cfg;
  cfg.seed = root.uint("seed");
  cfg.topology = topology_from(root, base_dir, cfg.seed);
  cfg.protocol = protocol_from(root, cfg.topology.node_count());

  if (root.has("requests")) {
    const json& list = root.at("requests");
    if (!list.is_array()) {
      root.fail("requests", "expected an array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Fields r(list[i], origin + ": field 'requests[" +
                                  std::to_string(i) + "]'");
      r.only({"at", "src", "dest", "payload_len"});
      RequestSpec req{.at = r.uint_or("at", 0),
                      .src = r.node("src"),
                      .dest = r.node("dest"),
                      .payload_len = static_cast<std::uint32_t>(
                          r.uint_or("payload_len", 0))};
      require_node(r, "src", req.src, cfg.topology);
      require_node(r, "dest", req.dest, cfg.topology);
      cfg.requests.push_back(req);
    }
  }

  if (root.has("random_requests")) {
    const Fields r(root.at("random_requests"),
                   origin + ": field 'random_requests'");
    r.only({"count", "start", "interval", "payload_len"});
    RandomRequests rr;
    rr.count = r.uint("count");
    rr.start = r.uint_or("start", 0);
    if (r.has("interval")) {
      rr.interval = r.uint("interval");
    }
    rr.payload_len = static_cast<std::uint32_t>(r.uint_or("payload_len", 0));
    if (rr.count > 0 && cfg.topology.node_count() < 2) {
      r.fail("count", "random requests need at least two nodes");
    }
    cfg.random_requests = rr;
  }

  if (root.has("faults")) {
    const json& list = root.at("faults");
    if (!list.is_array()) {
      root.fail("faults", "expected an array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Fields f(list[i],
                     origin + ": field 'faults[" + std::to_string(i) + "]'");
      FaultSpec spec;
      spec.at = f.uint("at");
      const std::string op = f.str("op");
      try {
        spec.fault.op = fault_op_from_string(op);
      } catch (const ConfigError& e) {
        f.fail("op", e.what());
      }
      if (spec.fault.op == Fault::Op::fail_link ||
          spec.fault.op == Fault::Op::restore_link) {
        f.only({"at", "op", "edge"});
        const json& e = f.at("edge");
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
            !e[1].is_number_unsigned()) {
          f.fail("edge", "expected [a, b], got " + e.dump());
        }
        spec.fault.a = NodeId{e[0].get<std::uint16_t>()};
        spec.fault.b = NodeId{e[1].get<std::uint16_t>()};
        if (!cfg.topology.has_edge(spec.fault.a, spec.fault.b)) {
          f.fail("edge", "not an edge of the topology");
        }
      } else {
        f.only({"at", "op", "node"});
        spec.fault.a = f.node("node");
        require_node(f, "node", spec.fault.a, cfg.topology);
      }
      cfg.faults.push_back(spec);
    }
  }

  if (root.has("horizon")) {
    cfg.horizon = root.uint("horizon");
  }

  if (root.has("output")) {
    const Fields o(root.at("output"), origin + ": field 'output'");
    o.only({"trace", "summary", "dot"});
    auto resolve = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (!o.has(key)) {
        return std::nullopt;
      }
      std::filesystem::path p = o.str(key);
      return p.is_absolute() ? p : base_dir / p;
    };
    cfg.outputs = ScenarioOutputs{resolve("trace"), resolve("summary"),
                                  resolve("dot")};
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string() + ": cannot open scenario file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path(), path.string());
}

std::vector<RequestSpec> resolve_requests(const ScenarioConfig& cfg) {
  std::vector<RequestSpec> out = cfg.requests;
  if (cfg.random_requests && cfg.random_requests->count > 0) {
    const RandomRequests& rr = *cfg.random_requests;
    const Tick interval = rr.interval.value_or(
        (Tick{cfg.protocol.retry_limit} + 2) * cfg.protocol.timeout);
    const std::vector<NodeId> nodes(cfg.topology.nodes().begin(),
                                    cfg.topology.nodes().end());
    Rng rng(cfg.seed, kScenarioStream);
    for (std::size_t k = 0; k < rr.count; ++k) {
      const std::size_t src = rng.below(nodes.size());
      std::size_t dest = rng.below(nodes.size() - 1);
      if (dest >= src) {
        ++dest;
      }
      out.push_back(RequestSpec{rr.start + k * interval, nodes[src],
                                nodes[dest], rr.payload_len});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RequestSpec& x, const RequestSpec& y) {
                     return x.at < y.at;
                   });
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            Simulator::Observer observer) {
  ScenarioResult result;
  result.requests = resolve_requests(cfg);

  Simulator sim(cfg.topology, cfg.protocol, cfg.seed);
  // Faults first so a request at the same tick sees the faulted network.
  for (const FaultSpec& f : cfg.faults) {
    sim.schedule_fault(f.at, f.fault);
  }
  for (const RequestSpec& r : result.requests) {
    sim.schedule_request(r.at, r.src, r.dest, r.payload_len);
  }
  if (observer) {
    sim.set_observer(std::move(observer));
  }
  sim.run(cfg.horizon);

  result.trace = sim.trace();
  result.bottle_bytes = sim.bottle_bytes();
  result.summary = summarize(result.trace, cfg.topology);
  for (const TraceEvent& ev : result.trace) {
    if (const auto* f = std::get_if<record::RouteFound>(&ev.record)) {
      result.first_route = f->path;
      break;
    }
  }
  return result;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError(path.string() + ": cannot open for writing");
  }
  out << text;
}

}  // namespace

void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result) {
  if (cfg.outputs.trace) {
    write_file(*cfg.outputs.trace, format_trace(result.trace));
  }
  if (cfg.outputs.summary) {
    write_file(*cfg.outputs.summary, summary_json(result.summary));
  }
  if (cfg.outputs.dot) {
    write_file(*cfg.outputs.dot, export_dot(cfg.topology, result.first_route));
  }
}

}  // namespace miab
