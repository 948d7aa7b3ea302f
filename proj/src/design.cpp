#include "codedmr/design.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace codedmr::design {

namespace {

constexpr std::uint64_t kMaxPoints = 1u << 24;

std::uint32_t checked_pow(std::uint32_t base, std::uint32_t exp) {
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < exp; ++i) {
    n *= base;
    if (n > kMaxPoints) {
      throw ParameterError("design too large: q^(k-1) exceeds 2^24 points");
    }
  }
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::uint32_t DesignParams::subfiles() const { return checked_pow(q, k - 1); }

DesignParams make_params(std::uint32_t q, std::uint32_t k) {
  if (q < 2) throw ParameterError("q must be at least 2");
  if (k < 2) throw ParameterError("k must be at least 2");
  if (q > 256) throw ParameterError("q must be at most 256");
  if (k > 64) throw ParameterError("k must be at most 64");
  DesignParams p{q, k};
  p.subfiles();  // enforce the point-count ceiling
  return p;
}

CodewordMatrix::CodewordMatrix(DesignParams params, std::vector<std::uint8_t> entries)
    : params_(make_params(params.q, params.k)),
      cols_(params_.subfiles()),
      entries_(std::move(entries)) {
  if (entries_.size() != static_cast<std::size_t>(params_.k) * cols_) {
    throw ParameterError("codeword matrix has wrong shape");
  }
  std::vector<bool> seen(cols_, false);
  for (std::uint32_t col = 0; col < cols_; ++col) {
    std::uint64_t rank = 0;
    std::uint32_t sum = 0;
    for (std::uint32_t row = 0; row + 1 < params_.k; ++row) {
      const std::uint8_t sym = at(row, col);
      if (sym >= params_.q) throw ParameterError("codeword symbol out of range");
      rank = rank * params_.q + sym;
      sum += sym;
    }
    if (at(params_.k - 1, col) != sum % params_.q) {
      throw ParameterError("codeword column violates the parity relation");
    }
    if (seen[rank]) throw ParameterError("duplicate codeword column");
    seen[rank] = true;
  }
}

CodewordMatrix generate_codeword_matrix(const DesignParams& params) {
  const DesignParams p = make_params(params.q, params.k);
  const std::uint32_t n = p.subfiles();
  std::vector<std::uint8_t> entries(static_cast<std::size_t>(p.k) * n);
  for (std::uint32_t col = 0; col < n; ++col) {
    // Column = base-q digits of the column index (first coordinate most
    // significant) followed by the parity symbol.
    std::uint32_t rem = col;
    std::uint32_t sum = 0;
    for (std::uint32_t row = p.k - 1; row-- > 0;) {
      const std::uint8_t digit = static_cast<std::uint8_t>(rem % p.q);
      rem /= p.q;
      entries[static_cast<std::size_t>(row) * n + col] = digit;
      sum += digit;
    }
    entries[static_cast<std::size_t>(p.k - 1) * n + col] =
        static_cast<std::uint8_t>(sum % p.q);
  }
  return CodewordMatrix(p, std::move(entries));
}

const Block& ResolvableDesign::block(std::uint32_t class_index, std::uint32_t level) const {
  if (class_index < 1 || class_index > params.k || level >= params.q) {
    throw ParameterError("block index out of range");
  }
  return classes[class_index - 1][level];
}

ResolvableDesign build_design(const CodewordMatrix& matrix) {
  const DesignParams& p = matrix.params();
  ResolvableDesign d;
  d.params = p;
  d.classes.resize(p.k);
  for (std::uint32_t i = 0; i < p.k; ++i) {
    auto& cls = d.classes[i];
    cls.resize(p.q);
    for (std::uint32_t l = 0; l < p.q; ++l) {
      cls[l].class_index = i + 1;
      cls[l].level = l;
    }
    for (std::uint32_t j = 0; j < matrix.cols(); ++j) {
      cls[matrix.at(i, j)].points.push_back(j + 1);
    }
  }
  return d;
}

ResolvableDesign build_design(const DesignParams& params) {
  return build_design(generate_codeword_matrix(params));
}

std::vector<std::uint32_t> intersect_blocks(std::span<const Block* const> blocks) {
  if (blocks.empty()) throw ParameterError("intersect_blocks: no blocks given");
  std::vector<std::uint32_t> classes;
  classes.reserve(blocks.size());
  for (const Block* b : blocks) classes.push_back(b->class_index);
  std::sort(classes.begin(), classes.end());
  if (std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
    throw ParameterError("intersect_blocks: two blocks share a parallel class");
  }
  std::vector<std::uint32_t> acc = blocks.front()->points;
  std::vector<std::uint32_t> next;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    next.clear();
    std::set_intersection(acc.begin(), acc.end(), blocks[i]->points.begin(),
                          blocks[i]->points.end(), std::back_inserter(next));
    acc.swap(next);
  }
  return acc;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport validate_design(const ResolvableDesign& d) {
  ValidationReport report;
  const std::uint32_t q = d.params.q;
  const std::uint32_t k = d.params.k;
  const std::uint32_t n = d.params.subfiles();
  const std::uint64_t block_size = n / q;  // q^(k-2)

  auto add = [&report](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  {
    bool ok = d.classes.size() == k;
    std::string detail;
    for (std::uint32_t i = 0; ok && i < k; ++i) {
      if (d.classes[i].size() != q) ok = false;
      for (std::uint32_t l = 0; ok && l < q; ++l) {
        const Block& b = d.classes[i][l];
        if (b.class_index != i + 1 || b.level != l) {
          ok = false;
          detail = "class " + std::to_string(i + 1) + " level " + std::to_string(l) +
                   " is mislabeled";
        }
      }
    }
    add("shape", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (const auto& cls : d.classes) {
      for (const Block& b : cls) {
        if (b.points.size() != block_size) {
          ok = false;
          detail = "block (" + std::to_string(b.class_index) + "," +
                   std::to_string(b.level) + ") has " + std::to_string(b.points.size()) +
                   " points, expected " + std::to_string(block_size);
          break;
        }
      }
      if (!ok) break;
    }
    add("block_size", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (const auto& cls : d.classes) {
      std::vector<std::uint32_t> all;
      for (const Block& b : cls) all.insert(all.end(), b.points.begin(), b.points.end());
      std::sort(all.begin(), all.end());
      bool covers = all.size() == n;
      for (std::uint32_t j = 0; covers && j < n; ++j) covers = all[j] == j + 1;
      if (!covers) {
        ok = false;
        detail = "class " + std::to_string(cls.front().class_index) +
                 " does not partition the point set";
        break;
      }
    }
    add("class_partition", ok, detail);
  }

  {
    // Every choice of k-1 blocks from k-1 distinct classes meets in one point.
    bool ok = true;
    std::string detail;
    std::uint64_t combos = 1;
    for (std::uint32_t i = 0; i + 1 < k; ++i) combos *= q;
    for (std::uint32_t skip = 0; ok && skip < k; ++skip) {
      std::vector<std::uint32_t> cls_of;
      for (std::uint32_t i = 0; i < k; ++i)
        if (i != skip) cls_of.push_back(i);
      for (std::uint64_t code = 0; ok && code < combos; ++code) {
        std::uint64_t rem = code;
        std::vector<const Block*> chosen;
        chosen.reserve(k - 1);
        for (std::uint32_t i = 0; i + 1 < k; ++i) {
          chosen.push_back(&d.classes[cls_of[i]][rem % q]);
          rem /= q;
        }
        const std::size_t size = intersect_blocks(chosen).size();
        if (size != 1) {
          ok = false;
          detail = "a (k-1)-wise intersection has cardinality " + std::to_string(size);
        }
      }
    }
    add("unit_intersections", ok, detail);
  }

  return report;
}

std::string to_json(const ResolvableDesign& d) {
  nlohmann::ordered_json j;
  j["q"] = d.params.q;
  j["k"] = d.params.k;
  j["K"] = d.params.servers();
  j["N"] = d.params.subfiles();
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (const auto& cls : d.classes) {
    nlohmann::ordered_json jc = nlohmann::ordered_json::array();
    for (const Block& b : cls) jc.push_back(b.points);
    classes.push_back(std::move(jc));
  }
  return j.dump(2);
}

}  // namespace codedmr::design
