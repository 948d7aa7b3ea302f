#include "codedmr/wordcount.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

namespace codedmr::workloads {

namespace {

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64(const Bytes& v) {
  if (v.size() != 8) throw ProtocolError("word count value must be exactly 8 bytes");
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | v[static_cast<std::size_t>(i)];
  return x;
}

}  // namespace

WordCountWorkload::WordCountWorkload(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) throw ParameterError("word count needs at least one target word");
  for (const std::string& w : words_) {
    if (w.empty()) throw ParameterError("target words must be nonempty");
  }
  auto sorted = words_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("target words must be distinct");
  }
}

std::vector<Bytes> WordCountWorkload::split(const Bytes& dataset,
                                            std::uint32_t subfile_count) const {
  if (subfile_count == 0) throw ParameterError("subfile count must be positive");
  std::vector<Bytes> out(subfile_count);
  std::size_t start = 0;
  for (std::uint32_t i = 0; i < subfile_count; ++i) {
    std::size_t end = dataset.size() * (i + 1) / subfile_count;
    // Never cut a token: push the boundary to the next whitespace.
    while (end < dataset.size() && end > 0 && !is_space(dataset[end - 1]) &&
           !is_space(dataset[end])) {
      ++end;
    }
    if (i + 1 == subfile_count) end = dataset.size();
    end = std::max(end, start);
    out[i].assign(dataset.begin() + start, dataset.begin() + end);
    start = end;
  }
  return out;
}

std::vector<std::uint64_t> WordCountWorkload::count_words(const Bytes& text) const {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t j = 0; j < words_.size(); ++j) index.emplace(words_[j], j);
  std::vector<std::uint64_t> counts(words_.size(), 0);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string_view token(reinterpret_cast<const char*>(text.data() + start), i - start);
      const auto it = index.find(token);
      if (it != index.end()) ++counts[it->second];
    }
  }
  return counts;
}

std::vector<Bytes> WordCountWorkload::map(const Bytes& subfile) const {
  const auto counts = count_words(subfile);
  std::vector<Bytes> values(words_.size());
  for (std::size_t j = 0; j < counts.size(); ++j) put_u64(values[j], counts[j]);
  return values;
}

Bytes WordCountWorkload::reduce(std::uint32_t function, const std::vector<Bytes>& values) const {
  if (function < 1 || function > words_.size()) {
    throw ParameterError("reduce function index out of range");
  }
  std::uint64_t total = 0;
  for (const Bytes& v : values) total += read_u64(v);
  Bytes out;
  put_u64(out, total);
  return out;
}

Bytes WordCountWorkload::reference(const Bytes& dataset) const {
  const auto counts = count_words(dataset);
  Bytes out;
  out.reserve(counts.size() * 8);
  for (std::uint64_t c : counts) put_u64(out, c);
  return out;
}

Bytes generate_text(std::uint64_t tokens, std::uint64_t seed,
                    const std::vector<std::string>& include_words) {
  static const char* kFiller[] = {"lorem", "ipsum", "river",  "stone", "cloud", "ember",
                                  "quiet", "novel", "harbor", "maple", "osier", "tide"};
  std::vector<std::string> vocab(include_words);
  for (const char* w : kFiller) vocab.emplace_back(w);

  std::mt19937_64 rng(seed);
  Bytes out;
  for (std::uint64_t t = 0; t < tokens; ++t) {
    const std::string& w = vocab[rng() % vocab.size()];
    if (t) out.push_back(' ');
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

}  // namespace codedmr::workloads
