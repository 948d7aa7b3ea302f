#pragma once

#include <cstdint>

#include "codedmr/common.hpp"
#include "codedmr/workload.hpp"

namespace codedmr::workloads {

/// Equal-size opaque values for protocol experiments: every intermediate
/// value is `value_bytes` of pseudo-random data derived from (seed,
/// function, subfile), so any server holding the subfile computes identical
/// bytes. The dataset is ignored; subfiles carry only their index. Reduce
/// concatenates the values in subfile order, which makes end-to-end
/// verification sensitive to any corruption in the shuffle.
class SyntheticWorkload : public engine::Workload {
 public:
  SyntheticWorkload(std::uint32_t functions, std::uint32_t subfiles, std::uint32_t value_bytes,
                    std::uint64_t seed);

  std::string name() const override { return "synthetic"; }
  std::uint32_t functions() const override { return functions_; }
  std::vector<Bytes> split(const Bytes& dataset, std::uint32_t subfile_count) const override;
  std::vector<Bytes> map(const Bytes& subfile) const override;
  Bytes reduce(std::uint32_t function, const std::vector<Bytes>& values) const override;
  Bytes reference(const Bytes& dataset) const override;

 private:
  Bytes value(std::uint32_t function, std::uint32_t subfile) const;

  std::uint32_t functions_;
  std::uint32_t subfiles_;
  std::uint32_t value_bytes_;
  std::uint64_t seed_;
};

}  // namespace codedmr::workloads
