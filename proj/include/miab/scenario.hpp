#pragma once

// Scenario files: one JSON document naming the topology, seed, protocol
// parameters, traffic, faults and output paths.
//
//   {
//     "seed": 7,
//     "topology": {"generate": {"kind": "generic", "nodes": 15}},
//     "protocol": {"hop_limit": 60, "retry_limit": 3},
//     "requests": [{"at": 0, "src": 0, "dest": 8}],
//     "random_requests": {"count": 50},
//     "faults": [{"at": 900, "op": "fail_node", "node": 2}],
//     "horizon": 100000,
//     "output": {"trace": "run.jsonl", "summary": "run.json", "dot": "run.dot"}
//   }
//
// "topology" is either {"file": path}, {"generate": {...}} or an inline
// {"nodes": [...], "edges": [...]} document. Relative paths resolve against
// the scenario file's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "miab/engine.hpp"
#include "miab/fsm.hpp"
#include "miab/metrics.hpp"
#include "miab/network.hpp"

namespace miab {

struct RequestSpec {
  Tick at = 0;
  NodeId src;
  NodeId dest;
  std::uint32_t payload_len = 0;
};

struct RandomRequests {
  std::size_t count = 0;
  Tick start = 0;
  std::optional<Tick> interval;  // default: (retry_limit + 2) * timeout
  std::uint32_t payload_len = 0;
};

struct FaultSpec {
  Tick at = 0;
  Fault fault;
};

struct ScenarioOutputs {
  std::optional<std::filesystem::path> trace;
  std::optional<std::filesystem::path> summary;
  std::optional<std::filesystem::path> dot;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  Topology topology;
  ProtocolConfig protocol;
  std::vector<RequestSpec> requests;
  std::optional<RandomRequests> random_requests;
  std::vector<FaultSpec> faults;
  std::optional<Tick> horizon;
  ScenarioOutputs outputs;
};

/// Throws ConfigError with "<origin>: field '<name>': ..." context.
ScenarioConfig parse_scenario(const std::string& text,
                              const std::filesystem::path& base_dir,
                              const std::string& origin = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Explicit requests followed by the expanded random requests, in time order.
std::vector<RequestSpec> resolve_requests(const ScenarioConfig& cfg);

struct ScenarioResult {
  Trace trace;
  RunSummary summary;
  std::uint64_t bottle_bytes = 0;
  std::vector<RequestSpec> requests;
  std::optional<Path> first_route;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            Simulator::Observer observer = {});

/// Writes whichever of trace, summary and DOT outputs are configured.
void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result);

}  // namespace miab
