#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "codedmr/common.hpp"

namespace codedmr::simnet {

/// How a multicast is charged: once per message (matches counting a coded
/// broadcast once) or once per receiver.
enum class MulticastModel { single_send, per_receiver };

struct NetConfig {
  double rate_bps = 100e6;  // per-server send rate
  MulticastModel model = MulticastModel::single_send;
  std::uint64_t per_message_overhead = 0;  // extra bytes charged per message

  void validate() const;
};

struct TransferEvent {
  std::uint32_t sender = 0;
  std::uint32_t receiver_count = 0;
  std::uint64_t bytes = 0;  // wire bytes incl. per-message overhead
  double start_s = 0;
  double end_s = 0;
  std::string phase;
};

/// Deterministic accounting of transmissions. Each sender transmits its
/// queued messages sequentially; distinct senders overlap, so the phase time
/// is the maximum per-sender busy time. No latency, congestion or transport
/// dynamics are modeled.
class TransferLog {
 public:
  explicit TransferLog(NetConfig cfg);

  /// Appends one event. `message_bytes` excludes the per-message overhead,
  /// which is added here. Under the per-receiver model the bits (and time)
  /// are charged once per receiver.
  const TransferEvent& transmit(std::uint32_t sender, std::uint32_t receiver_count,
                                std::uint64_t message_bytes, std::string_view phase);

  const NetConfig& config() const { return cfg_; }
  const std::vector<TransferEvent>& events() const { return events_; }

  /// Max sender busy time across the log.
  double phase_seconds() const;

  /// Model-dependent bit total (per-receiver counts multiply).
  std::uint64_t counted_bits() const { return counted_bits_; }

  /// Sum of event wire bytes (model-independent).
  std::uint64_t total_bytes() const { return total_bytes_; }

  /// CSV with header sender,receiver_count,bytes,start_s,end_s,phase.
  std::string to_csv() const;

 private:
  NetConfig cfg_;
  std::vector<TransferEvent> events_;
  std::vector<double> sender_busy_s_;
  std::uint64_t counted_bits_ = 0;
  std::uint64_t total_bytes_ = 0;
};

}  // namespace codedmr::simnet
