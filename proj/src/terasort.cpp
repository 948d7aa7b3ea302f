#include "codedmr/terasort.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <unordered_set>

namespace codedmr::workloads {

namespace {

std::string_view record_key(const std::uint8_t* record) {
  return {reinterpret_cast<const char*>(record), kKeyBytes};
}

std::uint64_t record_count(const Bytes& dataset) {
  if (dataset.size() % kRecordBytes != 0) {
    throw ParameterError("dataset is not a whole number of 100-byte records");
  }
  return dataset.size() / kRecordBytes;
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Stable sort of record pointers by key; ties keep input order so partition
// outputs concatenate to the single-node stable sort of the whole dataset.
void stable_sort_records(std::vector<const std::uint8_t*>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const std::uint8_t* a, const std::uint8_t* b) {
                     return std::memcmp(a, b, kKeyBytes) < 0;
                   });
}

}  // namespace

Bytes generate_records(std::uint64_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out(count * kRecordBytes);
  std::size_t off = 0;
  for (std::uint64_t r = 0; r < count; ++r) {
    for (int w = 0; w < 12; ++w) {
      std::uint64_t x = rng();
      for (int b = 0; b < 8; ++b) {
        out[off++] = static_cast<std::uint8_t>(x & 0xff);
        x >>= 8;
      }
    }
    std::uint64_t x = rng();
    for (int b = 0; b < 4; ++b) {
      out[off++] = static_cast<std::uint8_t>(x & 0xff);
      x >>= 8;
    }
  }
  return out;
}

PartitionBoundaries sample_and_partition(const Bytes& dataset, std::uint64_t samples,
                                         std::uint32_t partitions, std::uint64_t seed) {
  const std::uint64_t n = record_count(dataset);
  if (n == 0) throw ParameterError("cannot sample partition boundaries from an empty dataset");
  if (partitions < 2) throw ParameterError("at least 2 partitions are required");
  if (samples < partitions - 1) {
    throw ParameterError("sample count must be at least partitions-1");
  }

  // Draw positions without replacement while they last; the tail (only when
  // samples > record count) repeats positions, which the dedup rule absorbs.
  // Draws use modulo reduction so the sequence is identical across
  // toolchains.
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> positions;
  positions.reserve(samples);
  std::unordered_set<std::uint64_t> taken;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (taken.size() == n) {
      positions.push_back(rng() % n);
      continue;
    }
    std::uint64_t pos = rng() % n;
    while (taken.count(pos)) pos = (pos + 1) % n;
    taken.insert(pos);
    positions.push_back(pos);
  }

  std::vector<std::string> sorted;
  sorted.reserve(samples);
  for (std::uint64_t pos : positions) {
    const std::uint8_t* rec = dataset.data() + pos * kRecordBytes;
    sorted.emplace_back(reinterpret_cast<const char*>(rec), kKeyBytes);
  }
  std::sort(sorted.begin(), sorted.end());

  PartitionBoundaries out;
  out.keys.reserve(partitions - 1);
  for (std::uint32_t j = 1; j < partitions; ++j) {
    // i-th smallest sample with i = ceil(j*s/P), converted to 0-based.
    const std::uint64_t i = (static_cast<std::uint64_t>(j) * samples + partitions - 1) / partitions;
    std::size_t idx = static_cast<std::size_t>(i - 1);
    std::string candidate = sorted[idx];
    if (!out.keys.empty() && candidate <= out.keys.back()) {
      while (idx + 1 < sorted.size() && sorted[idx] <= out.keys.back()) ++idx;
      if (sorted[idx] > out.keys.back()) {
        candidate = sorted[idx];
      } else {
        candidate = out.keys.back() + '\0';  // no distinct sample left
      }
    }
    out.keys.push_back(std::move(candidate));
  }
  return out;
}

PartitionBoundaries degenerate_boundaries(std::uint32_t partitions) {
  if (partitions < 2) throw ParameterError("at least 2 partitions are required");
  PartitionBoundaries out;
  std::string key;
  for (std::uint32_t j = 1; j < partitions; ++j) {
    key.push_back('\0');
    out.keys.push_back(key);
  }
  return out;
}

std::uint32_t partition_by_search(const PartitionBoundaries& b, std::string_view key) {
  const auto it = std::upper_bound(b.keys.begin(), b.keys.end(), key,
                                   [](std::string_view k, const std::string& boundary) {
                                     return k < std::string_view(boundary);
                                   });
  return static_cast<std::uint32_t>(it - b.keys.begin()) + 1;
}

KeyTrie::KeyTrie(const PartitionBoundaries& b) : boundaries_(b.keys) {
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_[i - 1] < boundaries_[i])) {
      throw ParameterError("partition boundaries must be strictly increasing");
    }
  }
  auto prefix2 = [](const std::string& s) -> std::uint32_t {
    const std::uint32_t b0 = s.empty() ? 0 : static_cast<std::uint8_t>(s[0]);
    const std::uint32_t b1 = s.size() < 2 ? 0 : static_cast<std::uint8_t>(s[1]);
    return (b0 << 8) | b1;
  };
  first_ge_.assign(0x10001, 0);
  std::size_t cursor = 0;
  for (std::uint32_t p = 0; p <= 0x10000; ++p) {
    while (cursor < boundaries_.size() && prefix2(boundaries_[cursor]) < p) ++cursor;
    first_ge_[p] = static_cast<std::uint32_t>(cursor);
  }
}

std::uint32_t KeyTrie::lookup(std::string_view key) const {
  if (key.size() < 2) throw ParameterError("key shorter than the 2-byte trie prefix");
  const std::uint32_t p = (static_cast<std::uint8_t>(key[0]) << 8) |
                          static_cast<std::uint8_t>(key[1]);
  // Boundaries below first_ge_[p] have a smaller prefix, hence are <= key.
  std::uint32_t at_or_below = first_ge_[p];
  for (std::uint32_t i = first_ge_[p]; i < first_ge_[p + 1]; ++i) {
    if (std::string_view(boundaries_[i]) <= key) {
      ++at_or_below;
    } else {
      break;
    }
  }
  return at_or_below + 1;
}

TerasortWorkload::TerasortWorkload(PartitionBoundaries boundaries) : trie_(boundaries) {}

std::vector<Bytes> TerasortWorkload::split(const Bytes& dataset,
                                           std::uint32_t subfile_count) const {
  const std::uint64_t n = record_count(dataset);
  if (subfile_count == 0) throw ParameterError("subfile count must be positive");
  std::vector<Bytes> out(subfile_count);
  // Near-equal record counts; the first n mod N subfiles take one extra.
  const std::uint64_t base = n / subfile_count;
  const std::uint64_t extra = n % subfile_count;
  std::uint64_t pos = 0;
  for (std::uint32_t i = 0; i < subfile_count; ++i) {
    const std::uint64_t take = base + (i < extra ? 1 : 0);
    out[i].assign(dataset.begin() + pos * kRecordBytes,
                  dataset.begin() + (pos + take) * kRecordBytes);
    pos += take;
  }
  return out;
}

std::vector<Bytes> TerasortWorkload::map(const Bytes& subfile) const {
  const std::uint64_t n = record_count(subfile);
  const std::uint32_t parts = trie_.partitions();
  std::vector<std::vector<const std::uint8_t*>> buckets(parts);
  for (std::uint64_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = subfile.data() + r * kRecordBytes;
    buckets[trie_.lookup(record_key(rec)) - 1].push_back(rec);
  }
  std::vector<Bytes> values(parts);
  for (std::uint32_t j = 0; j < parts; ++j) {
    if (buckets[j].empty()) continue;  // empty partitions serialize to nothing
    Bytes& v = values[j];
    v.reserve(4 + buckets[j].size() * kRecordBytes);
    put_u32(v, static_cast<std::uint32_t>(buckets[j].size()));
    for (const std::uint8_t* rec : buckets[j]) v.insert(v.end(), rec, rec + kRecordBytes);
  }
  return values;
}

Bytes TerasortWorkload::reduce(std::uint32_t function, const std::vector<Bytes>& values) const {
  if (function < 1 || function > trie_.partitions()) {
    throw ParameterError("reduce function index out of range");
  }
  std::vector<const std::uint8_t*> records;
  for (const Bytes& v : values) {
    if (v.empty()) continue;
    if (v.size() < 4) throw ProtocolError("mapped value shorter than its count prefix");
    const std::uint32_t count = read_u32(v.data());
    if (v.size() != 4 + static_cast<std::size_t>(count) * kRecordBytes) {
      throw ProtocolError("mapped value length disagrees with its record count");
    }
    for (std::uint32_t r = 0; r < count; ++r) records.push_back(v.data() + 4 + r * kRecordBytes);
  }
  stable_sort_records(records);
  Bytes out;
  out.reserve(records.size() * kRecordBytes);
  for (const std::uint8_t* rec : records) out.insert(out.end(), rec, rec + kRecordBytes);
  return out;
}

Bytes TerasortWorkload::reference(const Bytes& dataset) const {
  const std::uint64_t n = record_count(dataset);
  std::vector<const std::uint8_t*> records;
  records.reserve(n);
  for (std::uint64_t r = 0; r < n; ++r) records.push_back(dataset.data() + r * kRecordBytes);
  stable_sort_records(records);
  Bytes out;
  out.reserve(dataset.size());
  for (const std::uint8_t* rec : records) out.insert(out.end(), rec, rec + kRecordBytes);
  return out;
}

}  // namespace codedmr::workloads
