#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codedmr/common.hpp"
#include "codedmr/protocol.hpp"
#include "codedmr/simnet.hpp"
#include "codedmr/workload.hpp"

namespace codedmr::engine {

/// Shuffle strategy for a job.
///  - uncoded_r1: every subfile mapped on one server, needed values unicast.
///  - uncoded_k: the design placement (computation load r = k) but a plain
///    unicast shuffle from canonical holders.
///  - coded: the design placement with the XOR multicast shuffle.
enum class Strategy { uncoded_r1, uncoded_k, coded };

std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

struct JobParams {
  Strategy strategy = Strategy::coded;
  std::uint32_t q = 0;  // required for coded / uncoded_k
  std::uint32_t k = 0;
  // uncoded_r1 may instead fix the cluster shape directly:
  std::uint32_t servers = 0;   // K, used when q/k are unset
  std::uint32_t subfiles = 0;  // N, used when q/k are unset
  simnet::NetConfig net;
};

struct PhaseSeconds {
  double codegen = 0;
  double map = 0;
  double encode = 0;
  double shuffle = 0;
  double decode = 0;
  double reduce = 0;

  double total() const { return codegen + map + encode + shuffle + decode + reduce; }
};

/// Per-job accounting. Bit buckets:
///  - payload_bits: transmitted shuffle payload, the quantity the
///    communication load counts (a coded multicast counts once; part
///    zero-padding inflates it);
///  - overhead_bits: transmission headers plus any per-message overhead,
///    reported separately and excluded from the load;
///  - padding_bits: how much of the payload was zero-extension of short
///    parts (diagnostic for unequal value sizes);
///  - shuffle_bits = payload_bits + overhead_bits.
/// measured_load = payload_bits / (Q * N * mean value bits).
struct JobReport {
  std::string strategy;
  std::uint32_t q = 0, k = 0, K = 0, N = 0, Q = 0;
  PhaseSeconds phase_seconds;
  std::uint64_t shuffle_bits = 0;
  std::uint64_t payload_bits = 0;
  std::uint64_t overhead_bits = 0;
  std::uint64_t padding_bits = 0;
  double measured_load = 0;
  double analytic_load = 0;
  std::string output_sha256;

  std::string to_json() const;
};

struct JobResult {
  std::vector<Bytes> outputs;  // reduce output per function, 1..Q
  JobReport report;
  simnet::TransferLog log;
  std::vector<protocol::CodedTransmission> transmissions;  // coded runs only
};

/// Runs CodeGen -> Map -> Pack/Encode -> Shuffle -> Unpack/Decode -> Reduce
/// under the chosen strategy. Outputs are byte-for-byte what the workload's
/// reference produces; a decode failure or conservation violation raises
/// ProtocolError (it would be a bug, not an input condition).
JobResult run_job(const Bytes& dataset, const Workload& workload, const JobParams& params);

struct VerifyReport {
  bool passed = false;
  std::uint64_t first_mismatch = 0;  // byte offset, meaningful when !passed
  std::string detail;
};

/// Byte-exact comparison of the concatenated outputs against the workload's
/// single-node reference.
VerifyReport verify_output(const std::vector<Bytes>& outputs, const Workload& workload,
                           const Bytes& dataset);

/// r = 1 placement: subfile n lives on server (n-1) mod K.
protocol::Placement round_robin_placement(std::uint32_t subfiles, std::uint32_t servers);

struct Unicast {
  std::uint32_t sender = 0;    // server ordinal
  std::uint32_t receiver = 0;  // server ordinal
  std::uint32_t function = 0;  // 1-based
  std::uint32_t subfile = 0;   // 1-based
};

/// The plain shuffle: every value a reducer is missing is unicast once from
/// its lowest-ordinal holder. Deterministic order (function, then subfile).
std::vector<Unicast> plan_uncoded_unicasts(const protocol::Placement& placement,
                                           const protocol::ReduceAssignment& reducers);

std::string sha256_hex(std::span<const std::uint8_t> data);

}  // namespace codedmr::engine
