// Command-line front end: topology generation, scenario runs and trace
// summaries.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "miab/generators.hpp"
#include "miab/metrics.hpp"
#include "miab/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw miab::ConfigError(path + ": cannot open");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw miab::ConfigError(path + ": cannot open for writing");
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"miabnet: message-in-a-bottle route discovery simulator"};
  app.require_subcommand(1);

  std::string kind = "generic";
  std::size_t nodes = 15;
  std::uint64_t seed = 0;
  std::string gen_out;
  std::string gen_dot;
  auto* gen = app.add_subcommand("gen", "Generate a topology file");
  gen->add_option("--kind", kind, "generic | sparse-partitioned | dense")
      ->capture_default_str();
  gen->add_option("--nodes", nodes, "Node count")->capture_default_str();
  gen->add_option("--seed", seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output topology file (stdout if omitted)");
  gen->add_option("--dot-out", gen_dot, "Also write a Graphviz rendering");

  std::string config;
  std::string trace_out;
  std::string summary_out;
  std::string dot_out;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("--config", config, "Scenario file")->required();
  run->add_option("--trace-out", trace_out, "Override output.trace");
  run->add_option("--summary-out", summary_out, "Override output.summary");
  run->add_option("--dot-out", dot_out, "Override output.dot");

  std::string trace_in;
  std::string topology_in;
  bool as_json = false;
  auto* sum = app.add_subcommand("summarize", "Summarize a recorded trace");
  sum->add_option("--trace", trace_in, "Trace file")->required();
  sum->add_option("--topology", topology_in, "Initial topology file")
      ->required();
  sum->add_flag("--json", as_json, "Print the summary as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const miab::Topology t = miab::generate_topology(
          miab::topology_kind_from_string(kind), nodes, seed);
      if (gen_out.empty()) {
        std::cout << miab::dump_topology(t);
      } else {
        write_file(gen_out, miab::dump_topology(t));
      }
      if (!gen_dot.empty()) {
        write_file(gen_dot, miab::export_dot(t));
      }
    } else if (*run) {
      miab::ScenarioConfig cfg = miab::load_scenario(config);
      if (!trace_out.empty()) cfg.outputs.trace = trace_out;
      if (!summary_out.empty()) cfg.outputs.summary = summary_out;
      if (!dot_out.empty()) cfg.outputs.dot = dot_out;
      const miab::ScenarioResult result = miab::run_scenario(cfg);
      miab::write_outputs(cfg, result);
      std::cout << miab::summary_table(result.summary);
    } else if (*sum) {
      const miab::Trace trace = miab::parse_trace(read_file(trace_in));
      const miab::Topology t = miab::load_topology(topology_in);
      const miab::RunSummary s = miab::summarize(trace, t);
      std::cout << (as_json ? miab::summary_json(s) : miab::summary_table(s));
    }
  } catch (const miab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
