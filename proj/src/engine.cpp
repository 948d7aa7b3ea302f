#include "codedmr/engine.hpp"

#include <algorithm>
#include <deque>
#include <optional>

#include <openssl/evp.h>

#include "json.hpp"

namespace codedmr::engine {

namespace {

// Nominal per-server rates for the simulated compute phases. These are
// record-keeping proxies (bytes touched / rate), not wall-clock predictions;
// only their determinism matters.
constexpr double kComputeBytesPerSecond = 100e6;
constexpr double kPlanStructuresPerSecond = 1e6;

struct BitCounters {
  std::uint64_t payload = 0;
  std::uint64_t header = 0;
  std::uint64_t padding = 0;
};

double max_of(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

/// Tracks which values each reducer has gathered; every needed value must
/// arrive exactly once (locally, by unicast, or by decode).
class GatherTable {
 public:
  GatherTable(std::uint32_t functions, std::uint32_t subfiles)
      : subfiles_(subfiles), slots_(static_cast<std::size_t>(functions) * subfiles, nullptr) {}

  void deliver(std::uint32_t function, std::uint32_t subfile, const Bytes* value) {
    const Bytes*& slot = slots_[index(function, subfile)];
    if (slot != nullptr) {
      throw ProtocolError("value for function " + std::to_string(function) + ", subfile " +
                          std::to_string(subfile) + " delivered twice");
    }
    slot = value;
  }

  std::vector<Bytes> take_row(std::uint32_t function) const {
    std::vector<Bytes> row;
    row.reserve(subfiles_);
    for (std::uint32_t n = 1; n <= subfiles_; ++n) {
      const Bytes* slot = slots_[index(function, n)];
      if (slot == nullptr) {
        throw ProtocolError("value for function " + std::to_string(function) + ", subfile " +
                            std::to_string(n) + " was never delivered");
      }
      row.push_back(*slot);
    }
    return row;
  }

 private:
  std::size_t index(std::uint32_t function, std::uint32_t subfile) const {
    return static_cast<std::size_t>(function - 1) * subfiles_ + (subfile - 1);
  }

  std::uint32_t subfiles_;
  std::vector<const Bytes*> slots_;
};

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::uncoded_r1: return "uncoded1";
    case Strategy::uncoded_k: return "uncodedk";
    case Strategy::coded: return "coded";
  }
  throw ParameterError("unknown strategy");
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "uncoded1") return Strategy::uncoded_r1;
  if (name == "uncodedk") return Strategy::uncoded_k;
  if (name == "coded") return Strategy::coded;
  throw ParameterError("unknown strategy '" + std::string(name) +
                       "' (expected uncoded1, uncodedk or coded)");
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ProtocolError("sha256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

protocol::Placement round_robin_placement(std::uint32_t subfiles, std::uint32_t servers) {
  if (servers == 0) throw ParameterError("server count must be positive");
  protocol::Placement pl;
  pl.servers = servers;
  pl.subfiles = subfiles;
  pl.held.resize(servers);
  for (std::uint32_t n = 1; n <= subfiles; ++n) {
    pl.held[(n - 1) % servers].push_back(n);
  }
  return pl;
}

std::vector<Unicast> plan_uncoded_unicasts(const protocol::Placement& placement,
                                           const protocol::ReduceAssignment& reducers) {
  if (placement.servers != reducers.per_server.size()) {
    throw ParameterError("placement and reduce assignment disagree on the server count");
  }
  // Canonical sender for a subfile: lowest-ordinal holder.
  std::vector<std::int64_t> holder(placement.subfiles + 1, -1);
  for (std::uint32_t s = 0; s < placement.servers; ++s) {
    for (std::uint32_t n : placement.held[s]) {
      if (holder[n] < 0) holder[n] = s;
    }
  }
  std::vector<std::vector<bool>> holds(placement.servers,
                                       std::vector<bool>(placement.subfiles + 1, false));
  for (std::uint32_t s = 0; s < placement.servers; ++s) {
    for (std::uint32_t n : placement.held[s]) holds[s][n] = true;
  }
  std::vector<std::uint32_t> reducer_of(reducers.functions + 1, 0);
  for (std::uint32_t s = 0; s < reducers.per_server.size(); ++s) {
    for (std::uint32_t f : reducers.per_server[s]) reducer_of[f] = s;
  }

  std::vector<Unicast> out;
  for (std::uint32_t f = 1; f <= reducers.functions; ++f) {
    const std::uint32_t receiver = reducer_of[f];
    for (std::uint32_t n = 1; n <= placement.subfiles; ++n) {
      if (holds[receiver][n]) continue;
      if (holder[n] < 0) {
        throw ProtocolError("subfile " + std::to_string(n) + " is held by no server");
      }
      out.push_back({static_cast<std::uint32_t>(holder[n]), receiver, f, n});
    }
  }
  return out;
}

JobResult run_job(const Bytes& dataset, const Workload& workload, const JobParams& params) {
  params.net.validate();
  const std::uint32_t functions = workload.functions();
  if (functions == 0) throw ParameterError("workload defines no functions");

  // --- CodeGen: design, placement, reducer assignment, group schedule ---
  const bool needs_design =
      params.strategy != Strategy::uncoded_r1 || (params.q != 0 || params.k != 0);
  std::optional<protocol::ShufflePlan> plan;
  protocol::Placement placement;
  std::uint32_t servers = 0;
  std::uint32_t subfiles = 0;
  design::DesignParams dp{};

  if (needs_design) {
    dp = design::make_params(params.q, params.k);
    servers = dp.servers();
    subfiles = dp.subfiles();
  } else {
    if (params.servers == 0 || params.subfiles == 0) {
      throw ParameterError("uncoded1 needs either (q,k) or explicit servers and subfiles");
    }
    servers = params.servers;
    subfiles = params.subfiles;
  }
  const protocol::ReduceAssignment reducers = protocol::assign_reducers(functions, servers);

  std::size_t plan_structures = servers + subfiles;
  if (params.strategy == Strategy::coded) {
    plan.emplace(design::build_design(dp), functions);
    placement = plan->placement();
    plan_structures += plan->groups().size();
  } else if (params.strategy == Strategy::uncoded_k) {
    placement = protocol::place_subfiles(design::build_design(dp));
  } else {
    placement = round_robin_placement(subfiles, servers);
  }

  JobResult result{{}, {}, simnet::TransferLog(params.net), {}};
  JobReport& report = result.report;
  report.strategy = std::string(strategy_name(params.strategy));
  report.q = needs_design ? dp.q : 0;
  report.k = needs_design ? dp.k : 0;
  report.K = servers;
  report.N = subfiles;
  report.Q = functions;
  report.phase_seconds.codegen =
      static_cast<double>(plan_structures) / kPlanStructuresPerSecond;

  switch (params.strategy) {
    case Strategy::uncoded_r1:
      report.analytic_load = 1.0 - 1.0 / servers;
      break;
    case Strategy::uncoded_k:
      report.analytic_load = 1.0 - static_cast<double>(dp.k) / servers;
      break;
    case Strategy::coded:
      report.analytic_load =
          (1.0 - static_cast<double>(dp.k) / servers) / (dp.k - 1);
      break;
  }

  // --- Map ---
  const std::vector<Bytes> subfile_data = workload.split(dataset, subfiles);
  if (subfile_data.size() != subfiles) {
    throw ProtocolError("workload split produced the wrong number of subfiles");
  }
  // Values are computed once per (function, subfile); the cost model still
  // charges every holder, which is where the r-fold map cost shows up.
  std::vector<std::vector<Bytes>> values(subfiles);
  std::uint64_t total_value_bytes = 0;
  for (std::uint32_t n = 0; n < subfiles; ++n) {
    values[n] = workload.map(subfile_data[n]);
    if (values[n].size() != functions) {
      throw ProtocolError("workload map produced the wrong number of values");
    }
    for (const Bytes& v : values[n]) total_value_bytes += v.size();
  }
  {
    std::vector<double> busy(servers, 0);
    for (std::uint32_t s = 0; s < servers; ++s) {
      std::uint64_t bytes = 0;
      for (std::uint32_t n : placement.held[s]) bytes += subfile_data[n - 1].size();
      busy[s] = static_cast<double>(bytes) / kComputeBytesPerSecond;
    }
    report.phase_seconds.map = max_of(busy);
  }

  const protocol::ValueSource source =
      [&values](std::uint32_t function,
                std::uint32_t subfile) -> std::optional<std::span<const std::uint8_t>> {
    return std::span<const std::uint8_t>(values[subfile - 1][function - 1]);
  };

  // --- Pack/Encode, Shuffle, Unpack/Decode ---
  GatherTable gathered(functions, subfiles);
  std::deque<Bytes> decoded_store;
  BitCounters bits;
  std::vector<double> encode_busy(servers, 0);
  std::vector<double> decode_busy(servers, 0);

  std::vector<std::uint32_t> reducer_of(functions + 1, 0);
  for (std::uint32_t s = 0; s < servers; ++s) {
    for (std::uint32_t f : reducers.per_server[s]) reducer_of[f] = s;
  }
  for (std::uint32_t f = 1; f <= functions; ++f) {
    for (std::uint32_t n : placement.held[reducer_of[f]]) {
      gathered.deliver(f, n, &values[n - 1][f - 1]);
    }
  }

  if (params.strategy == Strategy::coded) {
    const std::uint32_t k = dp.k;
    const std::uint32_t group_count = static_cast<std::uint32_t>(plan->groups().size());
    std::vector<protocol::CodedTransmission> txs;
    for (std::uint32_t round = 0; round < plan->rounds(); ++round) {
      for (std::uint32_t g = 0; g < group_count; ++g) {
        txs.clear();
        for (std::uint32_t pos = 1; pos <= k; ++pos) {
          protocol::CodedTransmission tx =
              protocol::encode_transmission(*plan, g, pos, round, source);
          const bool all_empty =
              std::all_of(tx.components.begin(), tx.components.end(),
                          [](const protocol::TransmissionComponent& c) {
                            return c.true_length == 0;
                          });
          if (all_empty) continue;  // nothing to deliver; receivers know the parts are empty
          const std::uint32_t sender = plan->member_ordinal(g, pos);
          result.log.transmit(sender, k - 1, tx.wire_size(), "shuffle");
          bits.payload += 8 * tx.payload.size();
          bits.header += 8 * (tx.wire_size() - tx.payload.size() + params.net.per_message_overhead);
          for (const protocol::TransmissionComponent& c : tx.components) {
            bits.padding += 8 * (tx.payload.size() - c.true_length);
          }
          encode_busy[sender] += static_cast<double>(tx.payload.size()) / kComputeBytesPerSecond;
          txs.push_back(std::move(tx));
        }
        for (std::uint32_t pos = 1; pos <= k; ++pos) {
          const std::uint32_t receiver = plan->member_ordinal(g, pos);
          Bytes value = protocol::decode_transmissions(*plan, g, pos, round, txs, source);
          const protocol::ShufflePlan::Target t = plan->target(g, pos, round);
          decoded_store.push_back(std::move(value));
          gathered.deliver(t.function, t.subfile, &decoded_store.back());
          std::uint64_t received_bytes = 0;
          for (const protocol::CodedTransmission& tx : txs) {
            if (tx.sender_class != pos) received_bytes += tx.payload.size();
          }
          decode_busy[receiver] += static_cast<double>(received_bytes) / kComputeBytesPerSecond;
        }
        for (protocol::CodedTransmission& tx : txs) {
          result.transmissions.push_back(std::move(tx));
        }
      }
    }
  } else {
    for (const Unicast& u : plan_uncoded_unicasts(placement, reducers)) {
      const Bytes& v = values[u.subfile - 1][u.function - 1];
      gathered.deliver(u.function, u.subfile, &v);
      if (v.empty()) continue;  // nothing crosses the wire for an empty value
      result.log.transmit(u.sender, 1, v.size(), "shuffle");
      bits.payload += 8 * v.size();
      bits.header += 8 * params.net.per_message_overhead;
      encode_busy[u.sender] += static_cast<double>(v.size()) / kComputeBytesPerSecond;
      decode_busy[u.receiver] += static_cast<double>(v.size()) / kComputeBytesPerSecond;
    }
  }

  report.phase_seconds.encode = max_of(encode_busy);
  report.phase_seconds.decode = max_of(decode_busy);
  report.phase_seconds.shuffle = result.log.phase_seconds();
  report.payload_bits = bits.payload;
  report.overhead_bits = bits.header;
  report.padding_bits = bits.padding;
  report.shuffle_bits = bits.payload + bits.header;
  report.measured_load =
      total_value_bytes == 0
          ? 0.0
          : static_cast<double>(bits.payload) / (8.0 * static_cast<double>(total_value_bytes));

  // --- Reduce ---
  result.outputs.resize(functions);
  {
    std::vector<double> busy(servers, 0);
    for (std::uint32_t f = 1; f <= functions; ++f) {
      const std::uint32_t reducer = reducer_of[f];
      const std::vector<Bytes> row = gathered.take_row(f);
      std::uint64_t in_bytes = 0;
      for (const Bytes& v : row) in_bytes += v.size();
      busy[reducer] += static_cast<double>(in_bytes) / kComputeBytesPerSecond;
      result.outputs[f - 1] = workload.reduce(f, row);
    }
    report.phase_seconds.reduce = max_of(busy);
  }

  {
    Bytes all;
    std::size_t total = 0;
    for (const Bytes& frag : result.outputs) total += frag.size();
    all.reserve(total);
    for (const Bytes& frag : result.outputs) all.insert(all.end(), frag.begin(), frag.end());
    report.output_sha256 = sha256_hex(all);
  }
  return result;
}

VerifyReport verify_output(const std::vector<Bytes>& outputs, const Workload& workload,
                           const Bytes& dataset) {
  const Bytes reference = workload.reference(dataset);
  std::uint64_t offset = 0;
  for (const Bytes& frag : outputs) {
    for (std::uint8_t b : frag) {
      if (offset >= reference.size() || reference[offset] != b) {
        return {false, offset,
                "output differs from the reference at byte " + std::to_string(offset)};
      }
      ++offset;
    }
  }
  if (offset != reference.size()) {
    return {false, offset,
            "output ends at byte " + std::to_string(offset) + " but the reference has " +
                std::to_string(reference.size())};
  }
  return {true, 0, "output matches the reference"};
}

std::string JobReport::to_json() const {
  nlohmann::ordered_json j;
  j["strategy"] = strategy;
  j["q"] = q;
  j["k"] = k;
  j["K"] = K;
  j["N"] = N;
  j["Q"] = Q;
  j["phase_seconds"] = {{"codegen", phase_seconds.codegen}, {"map", phase_seconds.map},
                        {"encode", phase_seconds.encode},   {"shuffle", phase_seconds.shuffle},
                        {"decode", phase_seconds.decode},   {"reduce", phase_seconds.reduce}};
  j["shuffle_bits"] = shuffle_bits;
  j["payload_bits"] = payload_bits;
  j["overhead_bits"] = overhead_bits;
  j["padding_bits"] = padding_bits;
  j["measured_load"] = measured_load;
  j["analytic_load"] = analytic_load;
  j["output_sha256"] = output_sha256;
  return j.dump(2);
}

}  // namespace codedmr::engine
