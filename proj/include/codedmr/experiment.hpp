#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "codedmr/engine.hpp"

namespace codedmr::experiment {

/// Everything a `run` needs. Front ends fill this from flags or a JSON
/// config; validate() enforces the engine/protocol preconditions before any
/// work starts.
struct ExperimentConfig {
  std::string workload = "terasort";  // terasort | wordcount | synthetic
  engine::Strategy strategy = engine::Strategy::coded;
  std::uint32_t q = 0;
  std::uint32_t k = 0;
  std::uint32_t servers = 0;     // uncoded1 without (q,k)
  std::uint32_t subfiles = 0;    // uncoded1 without (q,k)
  std::uint32_t functions = 0;   // Q; 0 picks the workload default (K, or the word count)
  std::uint64_t records = 100000;  // terasort records / wordcount tokens
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;     // partitioner samples; 0 -> max(partitions-1, 1024)
  std::uint32_t value_bytes = 64;  // synthetic value size
  std::vector<std::string> words;  // wordcount targets; empty -> and,if,when,the
  std::string input_path;          // optional raw dataset to load instead of generating
  double rate_mbps = 100.0;
  simnet::MulticastModel multicast = simnet::MulticastModel::single_send;
  std::uint64_t overhead_bytes = 0;

  void validate() const;
  std::uint32_t resolved_servers() const;    // K
  std::uint32_t resolved_functions() const;  // Q
  simnet::NetConfig net_config() const;
};

struct RunOutcome {
  ExperimentConfig config;
  engine::JobResult result;
  engine::VerifyReport verify;
};

/// Builds the dataset and workload, runs the job and verifies the output.
RunOutcome run_experiment(const ExperimentConfig& config);

struct ComparisonRow {
  std::string label;
  ExperimentConfig config;
  engine::JobReport report;
  bool verified = false;
  double bit_speedup = 1.0;  // first row's load-counted bits / this row's
};

struct Comparison {
  std::vector<ComparisonRow> rows;

  /// Aligned table, one row per run: loads, shuffle bits, the simulated
  /// phase times in pipeline order and the shuffle-bit speedup vs row 1.
  std::string to_text() const;
  std::string to_csv() const;
};

/// Runs every config on its own dataset (identical seeds give identical
/// datasets) and relates shuffle bit totals to the first row.
Comparison compare(const std::vector<ExperimentConfig>& configs);

struct DesignSummary {
  std::uint32_t q = 0, k = 0, servers = 0, subfiles = 0;
  std::uint64_t groups = 0;
  protocol::AnalyticLoads loads;
  bool validated = false;      // exhaustive checks only run for small designs
  bool validation_ok = false;
  std::string json;            // design dump
};

/// Builds and summarizes a design; writes the JSON dump to `out_path` when
/// nonempty.
DesignSummary gen_design(std::uint32_t q, std::uint32_t k, const std::string& out_path);

/// Human-readable summary lines for gen_design (includes a warning when
/// k = 2, where the scheme has no coding gain).
std::string describe(const DesignSummary& summary);

}  // namespace codedmr::experiment
