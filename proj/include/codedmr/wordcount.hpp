#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedmr/common.hpp"
#include "codedmr/workload.hpp"

namespace codedmr::workloads {

/// Counts occurrences of Q target words in a text. Tokens are maximal runs
/// of non-whitespace bytes, matched exactly. Mapped value j is the count of
/// word j in the subfile as a u64 little-endian; reduce sums the counts.
/// Subfile boundaries always fall on whitespace, so per-subfile counts add
/// up to the whole-text counts.
class WordCountWorkload : public engine::Workload {
 public:
  explicit WordCountWorkload(std::vector<std::string> words);

  std::string name() const override { return "wordcount"; }
  std::uint32_t functions() const override { return static_cast<std::uint32_t>(words_.size()); }
  std::vector<Bytes> split(const Bytes& dataset, std::uint32_t subfile_count) const override;
  std::vector<Bytes> map(const Bytes& subfile) const override;
  Bytes reduce(std::uint32_t function, const std::vector<Bytes>& values) const override;
  Bytes reference(const Bytes& dataset) const override;

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::uint64_t> count_words(const Bytes& text) const;

  std::vector<std::string> words_;
};

/// Deterministic space-separated text of `tokens` words drawn from a small
/// vocabulary that includes `include_words`.
Bytes generate_text(std::uint64_t tokens, std::uint64_t seed,
                    const std::vector<std::string>& include_words);

}  // namespace codedmr::workloads
