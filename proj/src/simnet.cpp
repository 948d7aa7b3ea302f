#include "codedmr/simnet.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace codedmr::simnet {

void NetConfig::validate() const {
  if (!(rate_bps > 0)) throw ParameterError("network rate must be positive");
}

TransferLog::TransferLog(NetConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const TransferEvent& TransferLog::transmit(std::uint32_t sender, std::uint32_t receiver_count,
                                           std::uint64_t message_bytes, std::string_view phase) {
  if (receiver_count == 0) throw ParameterError("transmit: no receivers");
  const std::uint64_t wire_bytes = message_bytes + cfg_.per_message_overhead;
  const std::uint64_t multiplier =
      cfg_.model == MulticastModel::per_receiver ? receiver_count : 1;
  const std::uint64_t bits = wire_bytes * 8 * multiplier;

  if (sender >= sender_busy_s_.size()) sender_busy_s_.resize(sender + 1, 0.0);
  const double start = sender_busy_s_[sender];
  const double end = start + static_cast<double>(bits) / cfg_.rate_bps;
  sender_busy_s_[sender] = end;

  counted_bits_ += bits;
  total_bytes_ += wire_bytes;
  events_.push_back({sender, receiver_count, wire_bytes, start, end, std::string(phase)});
  return events_.back();
}

double TransferLog::phase_seconds() const {
  double max_busy = 0.0;
  for (double busy : sender_busy_s_) max_busy = std::max(max_busy, busy);
  return max_busy;
}

std::string TransferLog::to_csv() const {
  std::ostringstream out;
  out << "sender,receiver_count,bytes,start_s,end_s,phase\n";
  out << std::setprecision(9) << std::fixed;
  for (const TransferEvent& e : events_) {
    out << e.sender << ',' << e.receiver_count << ',' << e.bytes << ',' << e.start_s << ','
        << e.end_s << ',' << e.phase << '\n';
  }
  return out.str();
}

}  // namespace codedmr::simnet
