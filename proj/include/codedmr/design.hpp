#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codedmr/common.hpp"

namespace codedmr::design {

/// Parameters of the single parity-check construction: k parallel classes of
/// q blocks each over the alphabet Z_q. Derived sizes are K = k*q servers and
/// N = q^(k-1) subfiles (points).
///
/// q does not need to be prime; all arithmetic is plain mod-q integer
/// arithmetic, never field arithmetic.
struct DesignParams {
  std::uint32_t q = 0;
  std::uint32_t k = 0;

  std::uint32_t servers() const { return k * q; }  // K
  std::uint32_t subfiles() const;                  // N = q^(k-1)
};

/// Validates q >= 2, k >= 2, q <= 256, k <= 64 and the point-count ceiling
/// q^(k-1) <= 2^24. Throws ParameterError naming the violated bound.
DesignParams make_params(std::uint32_t q, std::uint32_t k);

/// k x q^(k-1) matrix over Z_q whose columns are the codewords of a (k, k-1)
/// single parity-check code: the first k-1 symbols of a column are a message
/// vector and the last symbol is their sum mod q. Columns enumerate every
/// message exactly once; generate_codeword_matrix() emits them in
/// lexicographic order with the first coordinate most significant, so column
/// indices are reproducible.
class CodewordMatrix {
 public:
  /// Takes ownership of row-major entries (k rows, q^(k-1) columns) and
  /// verifies the parity relation and message distinctness per column.
  CodewordMatrix(DesignParams params, std::vector<std::uint8_t> entries);

  const DesignParams& params() const { return params_; }
  std::uint32_t rows() const { return params_.k; }
  std::uint32_t cols() const { return cols_; }

  /// Symbol at (row, col), both 0-based.
  std::uint8_t at(std::uint32_t row, std::uint32_t col) const {
    return entries_[static_cast<std::size_t>(row) * cols_ + col];
  }

 private:
  DesignParams params_;
  std::uint32_t cols_ = 0;
  std::vector<std::uint8_t> entries_;
};

CodewordMatrix generate_codeword_matrix(const DesignParams& params);

/// Block B(i,l): the set of 1-based column indices j with T[i][j] = l.
/// Every block of a valid design has exactly q^(k-2) points.
struct Block {
  std::uint32_t class_index = 0;      // 1..k
  std::uint32_t level = 0;            // 0..q-1
  std::vector<std::uint32_t> points;  // sorted, 1-based subfile ids
};

/// k parallel classes of q blocks each. Within a class the blocks are
/// pairwise disjoint and cover [1..N].
struct ResolvableDesign {
  DesignParams params;
  std::vector<std::vector<Block>> classes;  // classes[class_index-1][level]

  const Block& block(std::uint32_t class_index, std::uint32_t level) const;
};

ResolvableDesign build_design(const CodewordMatrix& matrix);
ResolvableDesign build_design(const DesignParams& params);

/// Exact intersection of blocks drawn from pairwise-distinct parallel
/// classes. Any k-1 blocks from distinct classes intersect in exactly one
/// point. Throws ParameterError when two blocks share a class.
std::vector<std::uint32_t> intersect_blocks(std::span<const Block* const> blocks);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
};

/// Re-derives the structural invariants of a design and reports each check:
/// per-class level coverage, block sizes, the partition property, and unit
/// intersections across every choice of k-1 blocks from distinct classes.
/// Failures become report entries, never exceptions.
ValidationReport validate_design(const ResolvableDesign& d);

/// Dump as JSON {"q", "k", "K", "N", "classes": [[[points...], ...], ...]}.
std::string to_json(const ResolvableDesign& d);

}  // namespace codedmr::design
