#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <boost/rational.hpp>

#include "codedmr/common.hpp"
#include "codedmr/design.hpp"

namespace codedmr::protocol {

/// A server is a block of the design: (class_index, level). Server ordinals
/// run 0..K-1 in (class, level) lexicographic order; the human-facing server
/// number is ordinal+1.
struct ServerId {
  std::uint32_t class_index = 0;  // 1..k
  std::uint32_t level = 0;        // 0..q-1
};

std::uint32_t server_ordinal(const design::DesignParams& params, ServerId id);
ServerId server_from_ordinal(const design::DesignParams& params, std::uint32_t ordinal);

/// Which subfiles each server maps. Under the design placement every server
/// holds its block's points, so each subfile is replicated on exactly k
/// servers (computation load r = k).
struct Placement {
  std::uint32_t servers = 0;
  std::uint32_t subfiles = 0;
  std::vector<std::vector<std::uint32_t>> held;  // [ordinal] -> sorted 1-based subfile ids
};

Placement place_subfiles(const design::ResolvableDesign& d);

/// Partition of the Q output functions over the K servers: the server with
/// 1-based ordinal s reduces functions {s, s+K, s+2K, ...}.
struct ReduceAssignment {
  std::uint32_t functions = 0;
  std::vector<std::vector<std::uint32_t>> per_server;  // [ordinal] -> 1-based function ids
};

/// Requires K | Q; throws ParameterError otherwise.
ReduceAssignment assign_reducers(std::uint32_t functions, std::uint32_t servers);

/// A multicast group: one block per parallel class (member position ell =
/// class ell), chosen so the common intersection of all k blocks is empty.
/// target_subfile[ell-1] is the unique point shared by the other k-1 blocks;
/// it never lies in member ell's own block.
struct ShuffleGroup {
  std::vector<std::uint32_t> levels;          // level j_ell per class, size k
  std::vector<std::uint32_t> target_subfile;  // per member position, size k
};

/// All q^(k-1)(q-1) groups in lexicographic (j_1,...,j_k) order. Every block
/// appears in exactly q^(k-2)(q-1) of them.
std::vector<ShuffleGroup> enumerate_groups(const design::ResolvableDesign& d);

/// Deterministic edge labeling: for the packet wanted by member `target_pos`,
/// the k-1 other members (in class order) are labeled 1..k-1. Positions are
/// 1-based; label is 0 when sender == target.
std::uint32_t part_label(std::uint32_t target_pos, std::uint32_t sender_pos);

struct EdgeLabeling {
  // labels[target-1][sender-1] in 1..k-1, or 0 on the diagonal.
  std::vector<std::vector<std::uint32_t>> labels;
};

EdgeLabeling bipartite_step(const ShuffleGroup& g);

/// Slice `part_index` (1-based) of a value split into part_count parts of
/// stride ceil(len/part_count); trailing parts may be short or empty.
std::span<const std::uint8_t> packet_part(std::span<const std::uint8_t> value,
                                          std::uint32_t part_index,
                                          std::uint32_t part_count);

struct TransmissionComponent {
  std::uint8_t target_pos = 0;     // 1..k, member position in the group
  std::uint8_t part_index = 0;     // 1..k-1
  std::uint32_t true_length = 0;   // bytes before zero-padding
};

/// One coded multicast: the byte-wise XOR of one packet part per other group
/// member, zero-padded to the longest part. The header records each
/// component's true length so receivers can strip the padding.
///
/// Wire layout (little-endian): u16 group index, u8 sender class, u8 sender
/// level, u8 component count, then per component u8 target position, u8 part
/// index, u32 true length, followed by the payload bytes.
struct CodedTransmission {
  std::uint16_t group_index = 0;
  std::uint8_t sender_class = 0;  // 1..k (also the sender's member position)
  std::uint8_t sender_level = 0;
  std::vector<TransmissionComponent> components;  // ordered by target_pos
  Bytes payload;

  std::size_t wire_size() const { return 5 + 6 * components.size() + payload.size(); }
  Bytes serialize() const;
  static CodedTransmission deserialize(std::span<const std::uint8_t> wire);
};

/// Callback used by encode/decode to fetch the serialized intermediate value
/// nu(function, subfile); both indices are 1-based. Returning nullopt means
/// the caller cannot produce the value, which is a protocol error wherever
/// the value is required.
using ValueSource = std::function<std::optional<std::span<const std::uint8_t>>(
    std::uint32_t function, std::uint32_t subfile)>;

/// Complete shuffle plan for a design and Q functions: placement, reducer
/// assignment and the multicast group schedule. The plan repeats the group
/// schedule Q/K times (rounds) when Q > K.
class ShufflePlan {
 public:
  ShufflePlan(design::ResolvableDesign d, std::uint32_t functions);

  const design::ResolvableDesign& layout() const { return design_; }
  const design::DesignParams& params() const { return design_.params; }
  const Placement& placement() const { return placement_; }
  const ReduceAssignment& reducers() const { return reducers_; }
  const std::vector<ShuffleGroup>& groups() const { return groups_; }
  std::uint32_t rounds() const { return reducers_.functions / params().servers(); }

  ServerId member(std::uint32_t group_index, std::uint32_t member_pos) const;
  std::uint32_t member_ordinal(std::uint32_t group_index, std::uint32_t member_pos) const;

  struct Target {
    std::uint32_t function = 0;  // 1-based
    std::uint32_t subfile = 0;   // 1-based
  };

  /// The intermediate value member `member_pos` recovers from this group in
  /// round `round` (0-based): its round-th reduce function evaluated on the
  /// unique subfile shared by the other k-1 blocks.
  Target target(std::uint32_t group_index, std::uint32_t member_pos, std::uint32_t round) const;

 private:
  design::ResolvableDesign design_;
  Placement placement_;
  ReduceAssignment reducers_;
  std::vector<ShuffleGroup> groups_;
};

/// Builds the coded multicast sent by `sender_pos` for one group and round.
/// Throws ProtocolError naming group, sender and target when the source
/// cannot supply a required value.
CodedTransmission encode_transmission(const ShufflePlan& plan, std::uint32_t group_index,
                                      std::uint32_t sender_pos, std::uint32_t round,
                                      const ValueSource& source);

/// Recovers the receiver's target value from the group's transmissions. The
/// receiver XOR-cancels the parts it can compute locally, extracts its k-1
/// missing parts and concatenates them by part index, truncating each to the
/// header's true length.
///
/// Transmissions sent by the receiver itself are ignored. A sender whose
/// parts are all empty may be omitted entirely; its contributions are taken
/// as zero-length. Duplicate senders, foreign groups or headers that
/// disagree with locally computed part lengths raise ProtocolError.
Bytes decode_transmissions(const ShufflePlan& plan, std::uint32_t group_index,
                           std::uint32_t receiver_pos, std::uint32_t round,
                           std::span<const CodedTransmission> received,
                           const ValueSource& source);

using Load = boost::rational<std::int64_t>;

/// Closed-form communication loads for K = k*q servers, plus the
/// subfile/group requirements of the binomial-placement baseline scheme.
struct AnalyticLoads {
  Load uncoded;                    // 1 - r/K
  Load proposed;                   // (1/(k-1)) * (1 - k/K), computation load r = k
  Load prior;                      // (1/r) * (1 - r/K)
  std::uint64_t prior_subfiles = 0;  // C(K, r), minimum N of the baseline
  std::uint64_t prior_groups = 0;    // C(K, r+1) multicast groups
};

AnalyticLoads analytic_loads(const design::DesignParams& params, std::uint32_t r);

}  // namespace codedmr::protocol
