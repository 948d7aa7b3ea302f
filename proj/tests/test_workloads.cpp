#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "codedmr/terasort.hpp"
#include "codedmr/wordcount.hpp"

using namespace codedmr;
using namespace codedmr::workloads;

namespace {

std::string key_of(const Bytes& dataset, std::uint64_t record) {
  return std::string(reinterpret_cast<const char*>(dataset.data() + record * kRecordBytes),
                     kKeyBytes);
}

Bytes records_with_keys(const std::vector<std::string>& keys) {
  Bytes out;
  for (const auto& key : keys) {
    REQUIRE(key.size() == kKeyBytes);
    out.insert(out.end(), key.begin(), key.end());
    out.insert(out.end(), kRecordBytes - kKeyBytes, 0x5a);
  }
  return out;
}

std::string padded_key(std::string prefix, char fill = '\0') {
  prefix.resize(kKeyBytes, fill);
  return prefix;
}

}  // namespace

TEST_CASE("generate_records: size, determinism, empty case") {
  CHECK(generate_records(0, 1).empty());
  const Bytes a = generate_records(1000, 42);
  CHECK(a.size() == 1000 * kRecordBytes);
  CHECK(a == generate_records(1000, 42));
  CHECK(a != generate_records(1000, 43));
}

TEST_CASE("generate_records: first key byte is uniform (chi-square within 3 sigma)") {
  const Bytes data = generate_records(1000000, 1);
  std::array<std::uint64_t, 256> histogram{};
  for (std::uint64_t r = 0; r < 1000000; ++r) ++histogram[data[r * kRecordBytes]];
  const double expected = 1000000.0 / 256.0;
  double chi2 = 0;
  for (std::uint64_t count : histogram) {
    const double d = static_cast<double>(count) - expected;
    chi2 += d * d / expected;
  }
  // 255 degrees of freedom: mean 255, sigma sqrt(510).
  CHECK(chi2 < 255.0 + 3.0 * std::sqrt(510.0));
}

TEST_CASE("sample_and_partition: s = P-1 keeps the sorted samples themselves") {
  const std::vector<std::string> keys = {padded_key("g"), padded_key("c"), padded_key("t")};
  const Bytes data = records_with_keys(keys);
  const auto b = sample_and_partition(data, 3, 4, 9);
  REQUIRE(b.keys.size() == 3);
  CHECK(b.keys[0] == padded_key("c"));
  CHECK(b.keys[1] == padded_key("g"));
  CHECK(b.keys[2] == padded_key("t"));
}

TEST_CASE("sample_and_partition: parameter errors") {
  CHECK_THROWS_AS(sample_and_partition(Bytes{}, 10, 4, 1), ParameterError);
  const Bytes data = generate_records(10, 1);
  CHECK_THROWS_AS(sample_and_partition(data, 2, 4, 1), ParameterError);  // s < P-1
}

TEST_CASE("sample_and_partition: all-equal keys synthesize distinct boundaries") {
  const Bytes data = records_with_keys(std::vector<std::string>(20, padded_key("mm")));
  const auto b = sample_and_partition(data, 16, 8, 3);
  REQUIRE(b.keys.size() == 7);
  for (std::size_t i = 1; i < b.keys.size(); ++i) CHECK(b.keys[i - 1] < b.keys[i]);
  // Every record lands in the same partition.
  const KeyTrie trie(b);
  const std::uint32_t p = trie.lookup(padded_key("mm"));
  for (std::uint64_t r = 0; r < 20; ++r) CHECK(trie.lookup(key_of(data, r)) == p);
}

TEST_CASE("sample_and_partition: skew stays within 25% of the mean at n=1e6") {
  const std::uint64_t n = 1000000;
  const std::uint32_t partitions = 16;
  const Bytes data = generate_records(n, 1);
  const auto b = sample_and_partition(data, 10000, partitions, 1);
  const KeyTrie trie(b);
  std::vector<std::uint64_t> counts(partitions + 1, 0);
  for (std::uint64_t r = 0; r < n; ++r) ++counts[trie.lookup(key_of(data, r))];
  const double mean = static_cast<double>(n) / partitions;
  for (std::uint32_t p = 1; p <= partitions; ++p) {
    CHECK(std::abs(static_cast<double>(counts[p]) - mean) <= 0.25 * mean);
  }
}

TEST_CASE("lookup: boundary edge cases follow the right-open ranges") {
  PartitionBoundaries b;
  b.keys = {padded_key("b"), padded_key("d"), padded_key("f")};
  const KeyTrie trie(b);
  CHECK(trie.lookup(padded_key("a")) == 1);        // below b_1
  CHECK(trie.lookup(padded_key("b")) == 2);        // equal to b_1 -> partition 2
  CHECK(trie.lookup(padded_key("d")) == 3);        // equal to b_2 -> partition 3
  CHECK(trie.lookup(padded_key("e")) == 3);
  CHECK(trie.lookup(padded_key("f", '\xff')) == 4);  // >= b_3
  for (const std::string& key :
       {padded_key("a"), padded_key("b"), padded_key("c"), padded_key("f", '\xff')}) {
    CHECK(trie.lookup(key) == partition_by_search(b, key));
  }
}

TEST_CASE("lookup: trie agrees with direct search everywhere") {
  const Bytes data = generate_records(4096, 5);
  const auto b = sample_and_partition(data, 1024, 16, 5);
  const KeyTrie trie(b);

  // Exhaustive over the 2-byte prefixes the trie indexes on.
  std::string key(kKeyBytes, '\x7f');
  for (std::uint32_t p = 0; p < 0x10000; ++p) {
    key[0] = static_cast<char>(p >> 8);
    key[1] = static_cast<char>(p & 0xff);
    CHECK(trie.lookup(key) == partition_by_search(b, key));
  }

  // Random full keys, including against degenerate variable-length boundaries.
  const auto degenerate = degenerate_boundaries(6);
  const KeyTrie deg_trie(degenerate);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100000; ++trial) {
    std::string k(kKeyBytes, 0);
    for (auto& c : k) c = static_cast<char>(rng() & 0xff);
    CHECK(trie.lookup(k) == partition_by_search(b, k));
    if (trial < 1000) CHECK(deg_trie.lookup(k) == partition_by_search(degenerate, k));
  }
}

TEST_CASE("terasort: map buckets agree with the trie and round-trip through reduce") {
  const Bytes data = generate_records(500, 21);
  const auto boundaries = sample_and_partition(data, 64, 4, 21);
  const TerasortWorkload sorter(boundaries);

  const auto subfiles = sorter.split(data, 3);
  REQUIRE(subfiles.size() == 3);
  CHECK(subfiles[0].size() == 167 * kRecordBytes);  // 500 = 167 + 167 + 166
  CHECK(subfiles[1].size() == 167 * kRecordBytes);
  CHECK(subfiles[2].size() == 166 * kRecordBytes);

  std::vector<std::vector<Bytes>> values;
  for (const Bytes& sf : subfiles) values.push_back(sorter.map(sf));

  Bytes all_outputs;
  for (std::uint32_t f = 1; f <= 4; ++f) {
    std::vector<Bytes> row;
    for (const auto& v : values) row.push_back(v[f - 1]);
    const Bytes fragment = sorter.reduce(f, row);
    all_outputs.insert(all_outputs.end(), fragment.begin(), fragment.end());
  }
  CHECK(all_outputs == sorter.reference(data));
}

TEST_CASE("terasort: global order and multiset preservation") {
  const Bytes data = generate_records(2000, 33);
  const TerasortWorkload sorter(sample_and_partition(data, 256, 8, 33));
  const auto subfiles = sorter.split(data, 4);
  std::vector<std::vector<Bytes>> values;
  for (const Bytes& sf : subfiles) values.push_back(sorter.map(sf));

  std::vector<Bytes> fragments;
  for (std::uint32_t f = 1; f <= 8; ++f) {
    std::vector<Bytes> row;
    for (const auto& v : values) row.push_back(v[f - 1]);
    fragments.push_back(sorter.reduce(f, row));
  }

  // Sorted within each fragment; fragment maxima below the next minima.
  std::string prev_max;
  bool have_prev = false;
  std::uint64_t total_records = 0;
  for (const Bytes& frag : fragments) {
    REQUIRE(frag.size() % kRecordBytes == 0);
    const std::uint64_t count = frag.size() / kRecordBytes;
    total_records += count;
    for (std::uint64_t r = 0; r < count; ++r) {
      const std::string key = key_of(frag, r);
      if (r > 0) CHECK(key_of(frag, r - 1) <= key);
      if (r == 0 && have_prev && count > 0) CHECK(prev_max <= key);
    }
    if (count > 0) {
      prev_max = key_of(frag, count - 1);
      have_prev = true;
    }
  }
  CHECK(total_records == 2000);

  std::multiset<std::string> in_keys, out_keys;
  for (std::uint64_t r = 0; r < 2000; ++r) in_keys.insert(key_of(data, r));
  for (const Bytes& frag : fragments) {
    for (std::uint64_t r = 0; r < frag.size() / kRecordBytes; ++r) {
      out_keys.insert(key_of(frag, r));
    }
  }
  CHECK(in_keys == out_keys);
}

TEST_CASE("terasort: rejects misaligned datasets") {
  const TerasortWorkload sorter(degenerate_boundaries(2));
  Bytes bad(150, 0);
  CHECK_THROWS_AS(sorter.split(bad, 2), ParameterError);
}

TEST_CASE("wordcount: counts one word directly") {
  const WordCountWorkload wc({"and", "if", "when", "the"});
  const std::string text = "and if the cat and the dog and";
  const Bytes data(text.begin(), text.end());
  const Bytes ref = wc.reference(data);
  REQUIRE(ref.size() == 32);
  std::uint64_t and_count = 0;
  std::memcpy(&and_count, ref.data(), 8);
  CHECK(and_count == 3);
}

TEST_CASE("wordcount: per-subfile counts add up to the whole-file counts") {
  const WordCountWorkload wc({"and", "if", "when", "the"});
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Bytes text = generate_text(200 + seed * 7, seed, wc.words());
    const std::uint32_t subfile_count = 1 + seed % 8;
    const auto subfiles = wc.split(text, subfile_count);
    REQUIRE(subfiles.size() == subfile_count);

    // Split loses no bytes.
    std::size_t total = 0;
    for (const auto& s : subfiles) total += s.size();
    CHECK(total == text.size());

    std::vector<Bytes> row_storage;
    Bytes summed;
    for (std::uint32_t f = 1; f <= 4; ++f) {
      std::vector<Bytes> row;
      for (const auto& s : subfiles) row.push_back(wc.map(s)[f - 1]);
      const Bytes frag = wc.reduce(f, row);
      summed.insert(summed.end(), frag.begin(), frag.end());
    }
    CHECK(summed == wc.reference(text));
  }
}

TEST_CASE("wordcount: empty text counts zero") {
  const WordCountWorkload wc({"and", "if"});
  const Bytes ref = wc.reference({});
  CHECK(ref == Bytes(16, 0));
}

TEST_CASE("wordcount: rejects empty or duplicate word lists") {
  CHECK_THROWS_AS(WordCountWorkload({}), ParameterError);
  CHECK_THROWS_AS(WordCountWorkload({"a", "a"}), ParameterError);
  CHECK_THROWS_AS(WordCountWorkload({""}), ParameterError);
}

TEST_CASE("generate_text is deterministic and space-separated") {
  const Bytes a = generate_text(100, 4, {"and"});
  CHECK(a == generate_text(100, 4, {"and"}));
  CHECK_FALSE(a.empty());
  CHECK(std::count(a.begin(), a.end(), ' ') == 99);
}
