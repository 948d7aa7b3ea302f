#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "codedmr/common.hpp"
#include "codedmr/workload.hpp"

namespace codedmr::workloads {

// Records are 100 bytes: a 10-byte key compared lexicographically by
// unsigned byte value (leftmost byte most significant) and a 90-byte opaque
// value. Datasets are raw concatenations of records, no delimiters.
inline constexpr std::size_t kKeyBytes = 10;
inline constexpr std::size_t kRecordBytes = 100;

/// Deterministic dataset of `count` records with near-uniform random bytes.
Bytes generate_records(std::uint64_t count, std::uint64_t seed);

/// Sorted boundary keys b_1 < ... < b_{P-1} defining P right-open key
/// ranges: partition 1 is d < b_1, partition i is b_{i-1} <= d < b_i, and
/// partition P is d >= b_{P-1}. Boundaries are byte strings; synthesized
/// boundaries may be longer than a key.
struct PartitionBoundaries {
  std::vector<std::string> keys;

  std::uint32_t partitions() const { return static_cast<std::uint32_t>(keys.size()) + 1; }
};

/// Draws `samples` record positions from a seeded generator (without
/// replacement while positions last), sorts the sampled keys and keeps the
/// ceil(j*s/P)-th smallest for j in [P-1]. Colliding picks advance to the
/// next distinct sample; when none is left, a boundary is synthesized by
/// appending 0x00 bytes so the sequence stays strictly increasing.
PartitionBoundaries sample_and_partition(const Bytes& dataset, std::uint64_t samples,
                                         std::uint32_t partitions, std::uint64_t seed);

/// Minimal strictly-increasing boundaries for jobs with no data to sample.
PartitionBoundaries degenerate_boundaries(std::uint32_t partitions);

/// Partition of `key` by direct comparison against the boundary list.
std::uint32_t partition_by_search(const PartitionBoundaries& b, std::string_view key);

/// Two-level 256-way index over the first two key bytes. Lookup narrows the
/// boundary list to the range sharing the key's two-byte prefix, then scans
/// it; the result always agrees with partition_by_search.
class KeyTrie {
 public:
  explicit KeyTrie(const PartitionBoundaries& b);

  std::uint32_t lookup(std::string_view key) const;
  std::uint32_t partitions() const { return static_cast<std::uint32_t>(boundaries_.size()) + 1; }

 private:
  std::vector<std::string> boundaries_;
  std::vector<std::uint32_t> first_ge_;  // per 2-byte prefix, first boundary at or above it
};

/// Distributed sort of fixed-size records. Function j collects the records
/// of key partition j; reduce sorts them (stable in subfile order, so ties
/// reproduce the single-node reference exactly). A mapped value is the
/// record count (u32 little-endian) followed by the raw records, or empty
/// when the subfile contributes nothing to the partition.
class TerasortWorkload : public engine::Workload {
 public:
  explicit TerasortWorkload(PartitionBoundaries boundaries);

  std::string name() const override { return "terasort"; }
  std::uint32_t functions() const override { return trie_.partitions(); }
  std::vector<Bytes> split(const Bytes& dataset, std::uint32_t subfile_count) const override;
  std::vector<Bytes> map(const Bytes& subfile) const override;
  Bytes reduce(std::uint32_t function, const std::vector<Bytes>& values) const override;
  Bytes reference(const Bytes& dataset) const override;

 private:
  KeyTrie trie_;
};

}  // namespace codedmr::workloads
