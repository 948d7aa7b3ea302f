// Command-line front end: generate designs and datasets, run single jobs,
// and compare strategies side by side.
//
// Exit codes: 0 success, 1 verification or internal failure, 2 parameter
// error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "codedmr/experiment.hpp"
#include "codedmr/terasort.hpp"

namespace {

using codedmr::ParameterError;
using codedmr::experiment::ExperimentConfig;

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open output file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Applies one JSON object onto a config; keys mirror the CLI flags and take
// precedence over them.
void apply_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  if (j.contains("workload")) cfg.workload = j["workload"].get<std::string>();
  if (j.contains("strategy")) {
    cfg.strategy = codedmr::engine::strategy_from_name(j["strategy"].get<std::string>());
  }
  if (j.contains("q")) cfg.q = j["q"].get<std::uint32_t>();
  if (j.contains("k")) cfg.k = j["k"].get<std::uint32_t>();
  if (j.contains("servers")) cfg.servers = j["servers"].get<std::uint32_t>();
  if (j.contains("subfiles")) cfg.subfiles = j["subfiles"].get<std::uint32_t>();
  if (j.contains("funcs")) cfg.functions = j["funcs"].get<std::uint32_t>();
  if (j.contains("records")) cfg.records = j["records"].get<std::uint64_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("samples")) cfg.samples = j["samples"].get<std::uint64_t>();
  if (j.contains("value_bytes")) cfg.value_bytes = j["value_bytes"].get<std::uint32_t>();
  if (j.contains("words")) cfg.words = j["words"].get<std::vector<std::string>>();
  if (j.contains("input")) cfg.input_path = j["input"].get<std::string>();
  if (j.contains("rate_mbps")) cfg.rate_mbps = j["rate_mbps"].get<double>();
  if (j.contains("multicast")) {
    const auto name = j["multicast"].get<std::string>();
    if (name == "single") {
      cfg.multicast = codedmr::simnet::MulticastModel::single_send;
    } else if (name == "per-receiver") {
      cfg.multicast = codedmr::simnet::MulticastModel::per_receiver;
    } else {
      throw ParameterError("multicast must be 'single' or 'per-receiver'");
    }
  }
  if (j.contains("overhead_bytes")) cfg.overhead_bytes = j["overhead_bytes"].get<std::uint64_t>();
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

// "strategy=coded,q=2,k=8" -> overrides on top of the shared config.
ExperimentConfig parse_run_spec(const ExperimentConfig& shared, const std::string& spec) {
  ExperimentConfig cfg = shared;
  nlohmann::json j = nlohmann::json::object();
  for (const std::string& pair : split_csv(spec)) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("malformed --run entry '" + pair + "' (expected key=value)");
    }
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (key == "strategy" || key == "workload" || key == "multicast" || key == "input") {
      j[key] = value;
    } else if (key == "rate_mbps") {
      j[key] = std::stod(value);
    } else {
      j[key] = std::stoull(value);
    }
  }
  apply_json(j, cfg);
  return cfg;
}

struct CommonFlags {
  ExperimentConfig cfg;
  std::string config_path;
  std::string out_path;
  std::string transfer_log_path;
  std::string strategy = "coded";
  std::string multicast = "single";
  std::string words_csv;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--workload", f.cfg.workload, "terasort, wordcount or synthetic");
  cmd->add_option("--strategy", f.strategy, "uncoded1, uncodedk or coded");
  cmd->add_option("--q", f.cfg.q, "blocks per parallel class");
  cmd->add_option("--k", f.cfg.k, "parallel classes (computation load of the coded scheme)");
  cmd->add_option("--servers", f.cfg.servers, "server count K (uncoded1 without q/k)");
  cmd->add_option("--subfiles", f.cfg.subfiles, "subfile count N (uncoded1 without q/k)");
  cmd->add_option("--funcs", f.cfg.functions, "function count Q (default: K)");
  cmd->add_option("--records", f.cfg.records, "dataset records (terasort) or tokens (wordcount)");
  cmd->add_option("--seed", f.cfg.seed, "master seed")->envname("CODEDMR_SEED");
  cmd->add_option("--samples", f.cfg.samples, "partitioner sample count (default max(Q-1,1024))");
  cmd->add_option("--value-bytes", f.cfg.value_bytes, "synthetic value size in bytes");
  cmd->add_option("--words", f.words_csv, "comma-separated wordcount targets");
  cmd->add_option("--input", f.cfg.input_path, "load the dataset from a file");
  cmd->add_option("--rate-mbps", f.cfg.rate_mbps, "per-server send rate in Mbps");
  cmd->add_option("--multicast", f.multicast, "multicast cost model: single or per-receiver");
  cmd->add_option("--overhead-bytes", f.cfg.overhead_bytes, "extra bytes charged per message");
  cmd->add_option("--config", f.config_path, "JSON config; its keys override the flags");
  cmd->add_option("--out", f.out_path, "output file");
  cmd->add_option("--transfer-log", f.transfer_log_path, "write the shuffle transfer log CSV");
}

ExperimentConfig resolve_flags(const CommonFlags& f) {
  ExperimentConfig cfg = f.cfg;
  cfg.strategy = codedmr::engine::strategy_from_name(f.strategy);
  if (f.multicast == "single") {
    cfg.multicast = codedmr::simnet::MulticastModel::single_send;
  } else if (f.multicast == "per-receiver") {
    cfg.multicast = codedmr::simnet::MulticastModel::per_receiver;
  } else {
    throw ParameterError("multicast must be 'single' or 'per-receiver'");
  }
  if (!f.words_csv.empty()) cfg.words = split_csv(f.words_csv);
  return cfg;
}

int cmd_gen_design(std::uint32_t q, std::uint32_t k, const std::string& out) {
  const auto summary = codedmr::experiment::gen_design(q, k, out);
  std::cout << codedmr::experiment::describe(summary);
  if (!out.empty()) std::cout << "design written to " << out << '\n';
  return summary.validated && !summary.validation_ok ? 1 : 0;
}

int cmd_gen_data(std::uint64_t records, std::uint64_t seed, const std::string& out) {
  const codedmr::Bytes data = codedmr::workloads::generate_records(records, seed);
  write_file(out, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
  std::cout << "wrote " << records << " records (" << data.size() << " bytes) to " << out << '\n';
  return 0;
}

int cmd_run(const CommonFlags& flags) {
  ExperimentConfig cfg = resolve_flags(flags);
  if (!flags.config_path.empty()) apply_json(load_json(flags.config_path), cfg);
  const auto outcome = codedmr::experiment::run_experiment(cfg);

  std::cout << outcome.result.report.to_json() << '\n';
  std::cout << "verification: " << (outcome.verify.passed ? "pass" : "FAIL") << " ("
            << outcome.verify.detail << ")\n";
  if (!flags.out_path.empty()) write_file(flags.out_path, outcome.result.report.to_json());
  if (!flags.transfer_log_path.empty()) {
    write_file(flags.transfer_log_path, outcome.result.log.to_csv());
  }
  return outcome.verify.passed ? 0 : 1;
}

int cmd_compare(const CommonFlags& flags, const std::vector<std::string>& run_specs) {
  ExperimentConfig shared = resolve_flags(flags);
  std::vector<ExperimentConfig> configs;
  if (!flags.config_path.empty()) {
    const nlohmann::json j = load_json(flags.config_path);
    if (j.contains("shared")) apply_json(j["shared"], shared);
    for (const auto& run : j.value("runs", nlohmann::json::array())) {
      ExperimentConfig cfg = shared;
      apply_json(run, cfg);
      configs.push_back(std::move(cfg));
    }
  }
  for (const std::string& spec : run_specs) {
    configs.push_back(parse_run_spec(shared, spec));
  }
  const auto cmp = codedmr::experiment::compare(configs);
  std::cout << cmp.to_text();
  if (!flags.out_path.empty()) write_file(flags.out_path, cmp.to_csv());
  bool all_verified = true;
  for (const auto& row : cmp.rows) all_verified = all_verified && row.verified;
  return all_verified ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded-shuffle MapReduce simulator"};
  app.require_subcommand(1);

  std::uint32_t q = 0, k = 0;
  std::string design_out;
  CLI::App* gen_design = app.add_subcommand("gen-design", "construct and dump a design");
  gen_design->add_option("--q", q, "blocks per parallel class")->required();
  gen_design->add_option("--k", k, "parallel classes")->required();
  gen_design->add_option("--out", design_out, "design JSON path");

  std::uint64_t data_records = 0, data_seed = 1;
  std::string data_out;
  CLI::App* gen_data = app.add_subcommand("gen-data", "write a raw 100-byte-record dataset");
  gen_data->add_option("--records", data_records, "record count")->required();
  gen_data->add_option("--seed", data_seed, "seed")->envname("CODEDMR_SEED");
  gen_data->add_option("--out", data_out, "output path")->required();

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one job and verify its output");
  add_common_flags(run, run_flags);

  CommonFlags cmp_flags;
  std::vector<std::string> run_specs;
  CLI::App* compare = app.add_subcommand("compare", "run several configurations side by side");
  add_common_flags(compare, cmp_flags);
  compare->add_option("--run", run_specs,
                      "per-row overrides, e.g. strategy=coded,q=2,k=8 (repeatable)");

  try {
    app.parse(argc, argv);
    if (gen_design->parsed()) return cmd_gen_design(q, k, design_out);
    if (gen_data->parsed()) return cmd_gen_data(data_records, data_seed, data_out);
    if (run->parsed()) return cmd_run(run_flags);
    if (compare->parsed()) return cmd_compare(cmp_flags, run_specs);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
