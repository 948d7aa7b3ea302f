#include "codedmr/synthetic.hpp"

#include <random>

namespace codedmr::workloads {

SyntheticWorkload::SyntheticWorkload(std::uint32_t functions, std::uint32_t subfiles,
                                     std::uint32_t value_bytes, std::uint64_t seed)
    : functions_(functions), subfiles_(subfiles), value_bytes_(value_bytes), seed_(seed) {
  if (functions_ == 0) throw ParameterError("synthetic workload needs at least one function");
  if (subfiles_ == 0) throw ParameterError("synthetic workload needs at least one subfile");
}

Bytes SyntheticWorkload::value(std::uint32_t function, std::uint32_t subfile) const {
  std::mt19937_64 rng(seed_ ^ (static_cast<std::uint64_t>(function) << 32) ^ subfile);
  Bytes out(value_bytes_);
  for (std::uint32_t i = 0; i < value_bytes_; ++i) {
    out[i] = static_cast<std::uint8_t>(rng() & 0xff);
  }
  return out;
}

std::vector<Bytes> SyntheticWorkload::split(const Bytes&, std::uint32_t subfile_count) const {
  if (subfile_count != subfiles_) {
    throw ParameterError("synthetic workload was configured for a different subfile count");
  }
  std::vector<Bytes> out(subfile_count);
  for (std::uint32_t n = 0; n < subfile_count; ++n) {
    // A subfile is just its 1-based index, little-endian.
    for (int i = 0; i < 4; ++i) {
      out[n].push_back(static_cast<std::uint8_t>(((n + 1) >> (8 * i)) & 0xff));
    }
  }
  return out;
}

std::vector<Bytes> SyntheticWorkload::map(const Bytes& subfile) const {
  if (subfile.size() != 4) throw ProtocolError("synthetic subfile must be a 4-byte index");
  std::uint32_t n = 0;
  for (int i = 3; i >= 0; --i) n = (n << 8) | subfile[static_cast<std::size_t>(i)];
  if (n < 1 || n > subfiles_) throw ProtocolError("synthetic subfile index out of range");
  std::vector<Bytes> values(functions_);
  for (std::uint32_t j = 1; j <= functions_; ++j) values[j - 1] = value(j, n);
  return values;
}

Bytes SyntheticWorkload::reduce(std::uint32_t function, const std::vector<Bytes>& values) const {
  if (function < 1 || function > functions_) {
    throw ParameterError("reduce function index out of range");
  }
  Bytes out;
  out.reserve(static_cast<std::size_t>(values.size()) * value_bytes_);
  for (const Bytes& v : values) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Bytes SyntheticWorkload::reference(const Bytes&) const {
  Bytes out;
  out.reserve(static_cast<std::size_t>(functions_) * subfiles_ * value_bytes_);
  for (std::uint32_t j = 1; j <= functions_; ++j) {
    for (std::uint32_t n = 1; n <= subfiles_; ++n) {
      const Bytes v = value(j, n);
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  return out;
}

}  // namespace codedmr::workloads
