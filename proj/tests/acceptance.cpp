// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "miab/generators.hpp"
#include "miab/metrics.hpp"
#include "miab/oracle.hpp"
#include "miab/scenario.hpp"

using namespace miab;

namespace {

constexpr double kFsmBudgetSeconds = 1.0;
constexpr int kDiscoveryRuns = 100;
constexpr double kDiscoveryRate = 0.95;
constexpr double kDiscoveryBudgetSeconds = 10.0;
constexpr int kSparseRuns = 100;
constexpr double kSparseRate = 0.80;
constexpr double kSparseBudgetSeconds = 60.0;
constexpr int kConvergenceSeeds = 20;
constexpr std::size_t kConvergenceRequests = 50;
constexpr int kOverheadSeeds = 20;
constexpr std::size_t kOverheadRequests = 10;
constexpr std::uint64_t kPairStream = 0x30000;

const std::filesystem::path kData = MIAB_TEST_DATA;

RandomRequests random_requests(std::size_t count) {
  RandomRequests rr;
  rr.count = count;
  return rr;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NodeId node_at(const Topology& t, std::size_t i) {
  return *std::next(t.nodes().begin(), static_cast<std::ptrdiff_t>(i));
}

bool is_simple_path(const Topology& t, const Path& p, NodeId src, NodeId dest) {
  if (p.size() < 2 || p.front() != src || p.back() != dest) return false;
  if (std::set<NodeId>(p.begin(), p.end()).size() != p.size()) return false;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!t.has_edge(p[i - 1], p[i])) return false;
  }
  return true;
}

// Checks every routing table touched by an event against oracle distances
// and current neighbor sets. Tables only change through records emitted at
// their owning node, so checking those nodes after each event covers every
// instant.
class AdmissibilityWatch {
 public:
  explicit AdmissibilityWatch(const Topology& t) {
    for (NodeId v : t.nodes()) dist_[v] = oracle::distances_from(t, v);
  }

  Simulator::Observer observer() {
    return [this](const Simulator& sim, std::span<const TraceEvent> emitted) {
      std::set<NodeId> touched;
      for (const TraceEvent& ev : emitted) {
        if (ev.node) touched.insert(*ev.node);
      }
      for (NodeId v : touched) {
        const NodeState& s = sim.node(v);
        const auto& d = dist_.at(v);
        for (const auto& [dest, e] : s.rtab) {
          ++checked;
          auto it = d.find(dest);
          if (it == d.end() || e.hop_count < it->second ||
              !s.nbors.contains(e.next_hop) ||
              !sim.topology().link_live(v, e.next_hop)) {
            ++violations;
          }
        }
      }
    };
  }

  std::uint64_t checked = 0;
  std::uint64_t violations = 0;

 private:
  std::map<NodeId, std::map<NodeId, std::uint32_t>> dist_;
};

struct Totals {
  std::uint64_t runs = 0;
  std::uint64_t byte_mismatches = 0;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
};

Totals g_admissibility;
Totals g_accounting;

void account(const Simulator& sim, const Topology& t) {
  ++g_accounting.runs;
  if (summarize(sim.trace(), t).total_bottle_bytes != sim.bottle_bytes()) {
    ++g_accounting.byte_mismatches;
  }
}

template <typename T>
std::vector<std::pair<TraceEvent, T>> records_of(const Trace& trace) {
  std::vector<std::pair<TraceEvent, T>> out;
  for (const TraceEvent& ev : trace) {
    if (const auto* x = std::get_if<T>(&ev.record)) out.emplace_back(ev, *x);
  }
  return out;
}

// One discovery from src to dest on a fresh simulator.
struct Discovery {
  std::optional<Path> route;
  std::size_t attempts = 0;
  std::size_t inaccessible = 0;
  Tick inaccessible_at = 0;
  Tick last_attempt_at = 0;
};

Discovery discover(const Topology& t, std::uint64_t seed, NodeId src,
                   NodeId dest) {
  Simulator sim(t, ProtocolConfig::defaults_for(t.node_count()), seed);
  AdmissibilityWatch watch(t);
  sim.set_observer(watch.observer());
  sim.schedule_request(0, src, dest);
  sim.run();
  ++g_admissibility.runs;
  g_admissibility.checked += watch.checked;
  g_admissibility.violations += watch.violations;
  account(sim, t);

  Discovery d;
  for (const auto& [ev, f] : records_of<record::RouteFound>(sim.trace())) {
    if (*ev.node == src && f.dest == dest && !d.route) d.route = f.path;
  }
  for (const auto& [ev, a] : records_of<record::DiscoveryAttempt>(sim.trace())) {
    ++d.attempts;
    d.last_attempt_at = ev.at;
  }
  for (const auto& [ev, i] : records_of<record::Inaccessible>(sim.trace())) {
    ++d.inaccessible;
    d.inaccessible_at = ev.at;
  }
  return d;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Transition {
  FsmState from;
  bool pkt_pending;
  bool btl_pending;
  FsmState to;
};

Verdict fsm_conformance() {
  const auto start = Clock::now();
  // The seven transitions of the protocol diagram.
  const Transition diagram[] = {
      {FsmState::idle, true, false, FsmState::route_req},
      {FsmState::idle, false, false, FsmState::idle},
      {FsmState::idle, false, true, FsmState::btl_manage},
      {FsmState::route_req, true, false, FsmState::route_req},
      {FsmState::btl_manage, false, true, FsmState::btl_manage},
      {FsmState::route_req, false, false, FsmState::idle},
      {FsmState::btl_manage, false, false, FsmState::idle},
  };
  int covered = 0;
  int uncovered = 0;
  int mismatches = 0;
  for (FsmState s : {FsmState::idle, FsmState::route_req, FsmState::btl_manage}) {
    for (bool pkt : {false, true}) {
      for (bool btl : {false, true}) {
        const FsmState got = next_state(s, !pkt, !btl);
        const Transition* edge = nullptr;
        for (const Transition& e : diagram) {
          if (e.from == s && e.pkt_pending == pkt && e.btl_pending == btl) edge = &e;
        }
        if (edge != nullptr) {
          ++covered;
          mismatches += got != edge->to;
        } else {
          // Outside the diagram: pending bottles first, then packets.
          ++uncovered;
          const FsmState want = btl ? FsmState::btl_manage
                                : pkt ? FsmState::route_req
                                      : FsmState::idle;
          mismatches += got != want;
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && covered + uncovered == 12 && secs < kFsmBudgetSeconds,
          fmt("12 inputs (%d diagram, %d by priority rule), %d mismatches, %.3f s",
              covered, uncovered, mismatches, secs)};
}

Verdict discovery_success() {
  const auto start = Clock::now();
  int found = 0;
  int invalid = 0;
  for (int seed = 0; seed < kDiscoveryRuns; ++seed) {
    const Topology t = generate_topology(TopologyKind::generic, 15, seed);
    Rng rng(seed, kPairStream);
    const NodeId src = node_at(t, rng.below(15));
    NodeId dest = src;
    while (dest == src || !oracle::connected(t, src, dest)) {
      dest = node_at(t, rng.below(15));
    }
    const Discovery d = discover(t, seed, src, dest);
    if (d.route) {
      ++found;
      invalid += !is_simple_path(t, *d.route, src, dest);
    }
  }
  const double rate = static_cast<double>(found) / kDiscoveryRuns;
  const double secs = seconds_since(start);
  return {rate >= kDiscoveryRate && invalid == 0 && secs < kDiscoveryBudgetSeconds,
          fmt("generic/15: %d/%d found (%.1f%%, need >= %.0f%%), %d invalid paths, %.2f s",
              found, kDiscoveryRuns, 100 * rate, 100 * kDiscoveryRate, invalid, secs)};
}

Verdict sparse_network() {
  const auto start = Clock::now();
  int found = 0;
  int invalid = 0;
  int exact_inaccessible = 0;
  for (int seed = 0; seed < kSparseRuns; ++seed) {
    const Topology t = generate_topology(TopologyKind::sparse_partitioned, 100, seed);
    const auto comps = oracle::components(t);
    Rng rng(seed, kPairStream);

    // Connected pair: two distinct nodes of one cluster.
    const NodeSet& home = comps[rng.below(comps.size())];
    const std::vector<NodeId> members(home.begin(), home.end());
    const NodeId src = members[rng.below(members.size())];
    NodeId dest = src;
    while (dest == src) dest = members[rng.below(members.size())];
    const Discovery d = discover(t, seed, src, dest);
    if (d.route) {
      ++found;
      invalid += !is_simple_path(t, *d.route, src, dest);
    }

    // Disconnected pair: endpoints in different clusters.
    NodeId far = node_at(t, rng.below(100));
    while (oracle::connected(t, src, far)) far = node_at(t, rng.below(100));
    const Discovery u = discover(t, seed, src, far);
    const auto cfg = ProtocolConfig::defaults_for(100);
    if (!u.route && u.inaccessible == 1 && u.attempts == cfg.retry_limit + 1 &&
        u.inaccessible_at == u.last_attempt_at + cfg.timeout) {
      ++exact_inaccessible;
    }
  }
  const double rate = static_cast<double>(found) / kSparseRuns;
  const double secs = seconds_since(start);
  return {rate >= kSparseRate && invalid == 0 && exact_inaccessible == kSparseRuns &&
              secs < kSparseBudgetSeconds,
          fmt("sparse/100: connected %d/%d found (%.1f%%, need >= %.0f%%), "
              "%d invalid paths; disconnected %d/%d inaccessible after exactly "
              "4 bottles; %.2f s",
              found, kSparseRuns, 100 * rate, 100 * kSparseRate, invalid,
              exact_inaccessible, kSparseRuns, secs)};
}

Verdict admissibility() {
  return {g_admissibility.runs > 0 && g_admissibility.checked > 0 &&
              g_admissibility.violations == 0,
          fmt("%llu runs, %llu entry checks, %llu violations",
              static_cast<unsigned long long>(g_admissibility.runs),
              static_cast<unsigned long long>(g_admissibility.checked),
              static_cast<unsigned long long>(g_admissibility.violations))};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

Verdict convergence() {
  std::vector<double> opt_early;
  std::vector<double> opt_late;
  double stretch_early = 0;
  double stretch_late = 0;
  std::size_t n_early = 0;
  std::size_t n_late = 0;
  for (int seed = 0; seed < kConvergenceSeeds; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.topology = generate_topology(TopologyKind::generic, 15, seed);
    cfg.protocol = ProtocolConfig::defaults_for(15);
    cfg.random_requests = random_requests(kConvergenceRequests);
    const ScenarioResult r = run_scenario(cfg);
    const auto& reqs = r.requests;

    // Tables after request 10 completes, i.e. just before request 11.
    TraceReplay replay(cfg.topology);
    for (const TraceEvent& ev : r.trace) {
      if (ev.at >= reqs[10].at) break;
      replay.apply(ev);
    }
    opt_early.push_back(table_optimality(replay.tables(), replay.topology()).value_or(0));
    opt_late.push_back(r.summary.table_optimality.value_or(0));

    // Per-request stretch: packets delivered while request k is current.
    for (const DeliverySample& s : delivery_samples(r.trace, cfg.topology)) {
      const auto k = static_cast<std::size_t>(
          std::upper_bound(reqs.begin(), reqs.end(), s.at,
                           [](Tick at, const RequestSpec& q) { return at < q.at; }) -
          reqs.begin());  // 1-based request index
      if (k >= 1 && k <= 10) {
        stretch_early += s.stretch;
        ++n_early;
      } else if (k >= 41 && k <= 50) {
        stretch_late += s.stretch;
        ++n_late;
      }
    }
  }
  const double med_early = median(opt_early);
  const double med_late = median(opt_late);
  const double s_early = n_early ? stretch_early / n_early : 0;
  const double s_late = n_late ? stretch_late / n_late : 0;
  return {n_early > 0 && n_late > 0 && med_early <= med_late && s_late <= s_early,
          fmt("median optimality %.3f at request 10 -> %.3f at request 50; "
              "mean stretch %.3f (requests 1-10, n=%zu) -> %.3f (41-50, n=%zu)",
              med_early, med_late, s_early, n_early, s_late, n_late)};
}

double mean_bottle_bytes(TopologyKind kind, std::size_t nodes, int seed) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.topology = generate_topology(kind, nodes, seed);
  cfg.protocol = ProtocolConfig::defaults_for(nodes);
  cfg.random_requests = random_requests(kOverheadRequests);
  const ScenarioResult r = run_scenario(cfg);
  ++g_accounting.runs;
  if (r.summary.total_bottle_bytes != r.bottle_bytes) ++g_accounting.byte_mismatches;
  return r.summary.mean_bottle_bytes.value_or(0);
}

Verdict overhead() {
  int wins = 0;
  double sparse_sum = 0;
  double generic_sum = 0;
  for (int seed = 0; seed < kOverheadSeeds; ++seed) {
    const double sparse = mean_bottle_bytes(TopologyKind::sparse_partitioned, 100, seed);
    const double generic = mean_bottle_bytes(TopologyKind::generic, 15, seed);
    wins += sparse > generic;
    sparse_sum += sparse;
    generic_sum += generic;
  }
  return {g_accounting.byte_mismatches == 0 && wins == kOverheadSeeds,
          fmt("byte counter matched trace in %llu/%llu runs; mean bytes/bottle "
              "sparse/100 %.1f vs generic/15 %.1f, sparse larger in %d/%d seeds",
              static_cast<unsigned long long>(g_accounting.runs - g_accounting.byte_mismatches),
              static_cast<unsigned long long>(g_accounting.runs),
              sparse_sum / kOverheadSeeds, generic_sum / kOverheadSeeds, wins,
              kOverheadSeeds)};
}

Verdict failure_handling() {
  const ScenarioConfig cfg = load_scenario(kData / "bridge_failure.json");
  const NodeId bridge{2};
  const NodeId src{0};
  const NodeId dest{4};
  Tick fail_at = 0;
  for (const FaultSpec& f : cfg.faults) {
    if (f.fault.op == Fault::Op::fail_node) fail_at = f.at;
  }

  std::uint64_t stale_entries = 0;
  const ScenarioResult r = run_scenario(
      cfg, [&](const Simulator& sim, std::span<const TraceEvent>) {
        if (sim.now() <= fail_at) return;
        for (const auto& [v, s] : sim.nodes()) {
          if (!sim.topology().node_up(v)) continue;
          for (const auto& [d, e] : s.rtab) stale_entries += e.next_hop == bridge;
        }
      });

  std::optional<Path> before;
  std::optional<Path> after;
  for (const auto& [ev, f] : records_of<record::RouteFound>(r.trace)) {
    if (*ev.node != src || f.dest != dest) continue;
    (ev.at < fail_at ? before : after) = f.path;
  }
  Topology faulted = cfg.topology;
  for (const FaultSpec& f : cfg.faults) {
    switch (f.fault.op) {
      case Fault::Op::fail_node: faulted.fail_node(f.fault.a); break;
      case Fault::Op::restore_node: faulted.restore_node(f.fault.a); break;
      case Fault::Op::fail_link: faulted.fail_link(f.fault.a, f.fault.b); break;
      case Fault::Op::restore_link: faulted.restore_link(f.fault.a, f.fault.b); break;
    }
  }

  std::set<BottleId> notices;
  std::size_t notice_msgs = 0;
  bool along_route = true;
  for (const auto& [ev, s] : records_of<record::Sent>(r.trace)) {
    const auto* b = std::get_if<Bottle>(&s.payload);
    if (b == nullptr || !b->failure) continue;
    notices.insert(b->id);
    ++notice_msgs;
    along_route = along_route && before && b->history.size() <= before->size() &&
                  std::equal(b->history.begin(), b->history.end(), before->begin());
  }

  bool delivered_after = false;
  for (const auto& [ev, d] : records_of<record::DataDelivered>(r.trace)) {
    delivered_after = delivered_after || (ev.at > fail_at && *ev.node == dest);
  }

  const bool route_via_bridge =
      before && std::find(before->begin(), before->end(), bridge) != before->end();
  const std::size_t path_len = before ? before->size() - 1 : 0;
  const bool rediscovered = after && is_simple_path(faulted, *after, src, dest) &&
                            std::all_of(after->begin() + 1, after->end(),
                                        [&](NodeId v) { return v != bridge; });
  bool live = true;
  if (after) {
    for (std::size_t i = 1; i < after->size(); ++i) {
      live = live && faulted.link_live((*after)[i - 1], (*after)[i]);
    }
  }
  return {route_via_bridge && stale_entries == 0 && notices.size() == 1 &&
              notice_msgs <= path_len && along_route && rediscovered && live &&
              delivered_after,
          fmt("route via bridge %s; %llu stale entries after failure; %zu failure "
              "bottle(s), %zu messages (path length %zu), along route %s; "
              "rediscovered %s, delivered %s",
              route_via_bridge ? "yes" : "no",
              static_cast<unsigned long long>(stale_entries), notices.size(),
              notice_msgs, path_len, along_route ? "yes" : "no",
              rediscovered && live ? "yes" : "no", delivered_after ? "yes" : "no")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict determinism() {
  const ScenarioConfig cfg = load_scenario(kData / "two_node.json");
  const std::string first = format_trace(run_scenario(cfg).trace);
  const std::string second = format_trace(run_scenario(cfg).trace);
  const std::string golden = slurp(kData / "two_node.trace.jsonl");

  ScenarioConfig big;
  big.seed = 17;
  big.topology = generate_topology(TopologyKind::sparse_partitioned, 100, 17);
  big.protocol = ProtocolConfig::defaults_for(100);
  big.random_requests = random_requests(20);
  const bool big_same =
      format_trace(run_scenario(big).trace) == format_trace(run_scenario(big).trace);

  return {!golden.empty() && first == second && first == golden && big_same,
          fmt("two-node rerun %s, golden file %s (%zu bytes), sparse/100 rerun %s",
              first == second ? "identical" : "differs",
              golden.empty() ? "missing" : first == golden ? "matches" : "differs",
              golden.size(), big_same ? "identical" : "differs")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const Criterion criteria[] = {
      {1, "FSM conformance", fsm_conformance},
      {2, "discovery success", discovery_success},
      {3, "large sparse network", sparse_network},
      {4, "admissibility invariant", admissibility},
      {5, "convergence", convergence},
      {6, "overhead accounting", overhead},
      {7, "failure handling", failure_handling},
      {8, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
