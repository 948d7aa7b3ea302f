#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedmr/common.hpp"

namespace codedmr::engine {

/// A MapReduce job specification. The engine only sees this interface:
/// split the dataset into N subfiles, map each subfile to Q serialized
/// intermediate values, reduce each function over the values of all
/// subfiles, and produce a single-node reference output for verification.
///
/// Contracts the engine relies on:
///  - map depends only on its subfile's bytes;
///  - reduce is insensitive to how the values arrived, as long as they are
///    presented indexed by subfile;
///  - concatenating the reduce outputs for functions 1..Q byte-for-byte
///    equals reference(dataset).
class Workload {
 public:
  virtual ~Workload() = default;

  virtual std::string name() const = 0;
  virtual std::uint32_t functions() const = 0;  // Q

  /// Splits the dataset into exactly `subfile_count` disjoint subfiles.
  virtual std::vector<Bytes> split(const Bytes& dataset, std::uint32_t subfile_count) const = 0;

  /// Maps one subfile to its Q intermediate values (index j-1 holds the
  /// value for function j).
  virtual std::vector<Bytes> map(const Bytes& subfile) const = 0;

  /// Reduces function `function` (1-based) over `values`, indexed by subfile
  /// (index n-1 holds the value mapped from subfile n).
  virtual Bytes reduce(std::uint32_t function, const std::vector<Bytes>& values) const = 0;

  /// Ground-truth output of the whole job, computed without the engine.
  virtual Bytes reference(const Bytes& dataset) const = 0;
};

}  // namespace codedmr::engine
