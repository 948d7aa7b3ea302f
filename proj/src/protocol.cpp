#include "codedmr/protocol.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace codedmr::protocol {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t binomial(std::uint32_t n, std::uint32_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::uint32_t i = 1; i <= r; ++i) {
    acc = acc * (n - r + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw ParameterError("binomial coefficient overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

/// Point (1-based column index) shared by the blocks of all classes except
/// `skip_pos` (1-based) at the group's levels: the unique message whose
/// codeword matches every retained constraint.
std::uint32_t group_target_point(const design::DesignParams& p,
                                 std::span<const std::uint32_t> levels,
                                 std::uint32_t skip_pos) {
  const std::uint32_t k = p.k;
  const std::uint32_t q = p.q;
  std::uint32_t sum = 0;
  for (std::uint32_t i = 0; i + 1 < k; ++i) sum += levels[i];
  std::uint64_t rank = 0;
  for (std::uint32_t i = 0; i + 1 < k; ++i) {
    std::uint32_t digit = levels[i];
    if (i + 1 == skip_pos) {
      // Parity constraint fixes the skipped message coordinate.
      const std::uint32_t others = (sum - levels[i]) % q;
      digit = (levels[k - 1] + q - others) % q;
    }
    rank = rank * q + digit;
  }
  return static_cast<std::uint32_t>(rank) + 1;
}

}  // namespace

std::uint32_t server_ordinal(const design::DesignParams& params, ServerId id) {
  if (id.class_index < 1 || id.class_index > params.k || id.level >= params.q) {
    throw ParameterError("server id out of range");
  }
  return (id.class_index - 1) * params.q + id.level;
}

ServerId server_from_ordinal(const design::DesignParams& params, std::uint32_t ordinal) {
  if (ordinal >= params.servers()) throw ParameterError("server ordinal out of range");
  return ServerId{ordinal / params.q + 1, ordinal % params.q};
}

Placement place_subfiles(const design::ResolvableDesign& d) {
  Placement pl;
  pl.servers = d.params.servers();
  pl.subfiles = d.params.subfiles();
  pl.held.reserve(pl.servers);
  for (const auto& cls : d.classes) {
    for (const design::Block& b : cls) pl.held.push_back(b.points);
  }
  return pl;
}

ReduceAssignment assign_reducers(std::uint32_t functions, std::uint32_t servers) {
  if (servers == 0) throw ParameterError("server count must be positive");
  if (functions == 0 || functions % servers != 0) {
    throw ParameterError("function count Q must be a positive multiple of the server count K");
  }
  ReduceAssignment a;
  a.functions = functions;
  a.per_server.resize(servers);
  for (std::uint32_t s = 0; s < servers; ++s) {
    for (std::uint32_t f = s + 1; f <= functions; f += servers) {
      a.per_server[s].push_back(f);
    }
  }
  return a;
}

std::vector<ShuffleGroup> enumerate_groups(const design::ResolvableDesign& d) {
  const design::DesignParams& p = d.params;
  const std::uint32_t q = p.q;
  const std::uint32_t k = p.k;
  std::vector<ShuffleGroup> out;
  out.reserve(static_cast<std::size_t>(p.subfiles()) * (q - 1));

  // The k blocks share a point exactly when the levels form a codeword, i.e.
  // when j_k equals the mod-q sum of j_1..j_{k-1}. Everything else is a group.
  std::vector<std::uint32_t> levels(k, 0);
  while (true) {
    std::uint32_t sum = 0;
    for (std::uint32_t i = 0; i + 1 < k; ++i) sum += levels[i];
    if (levels[k - 1] != sum % q) {
      ShuffleGroup g;
      g.levels = levels;
      g.target_subfile.resize(k);
      for (std::uint32_t pos = 1; pos <= k; ++pos) {
        g.target_subfile[pos - 1] = group_target_point(p, levels, pos);
      }
      out.push_back(std::move(g));
    }
    std::uint32_t pos = k;
    while (pos-- > 0) {
      if (++levels[pos] < q) break;
      levels[pos] = 0;
      if (pos == 0) return out;
    }
  }
}

std::uint32_t part_label(std::uint32_t target_pos, std::uint32_t sender_pos) {
  if (sender_pos == target_pos) return 0;
  return sender_pos < target_pos ? sender_pos : sender_pos - 1;
}

EdgeLabeling bipartite_step(const ShuffleGroup& g) {
  const std::uint32_t k = static_cast<std::uint32_t>(g.levels.size());
  EdgeLabeling labeling;
  labeling.labels.assign(k, std::vector<std::uint32_t>(k, 0));
  for (std::uint32_t target = 1; target <= k; ++target) {
    for (std::uint32_t sender = 1; sender <= k; ++sender) {
      labeling.labels[target - 1][sender - 1] = part_label(target, sender);
    }
  }
  return labeling;
}

std::span<const std::uint8_t> packet_part(std::span<const std::uint8_t> value,
                                          std::uint32_t part_index,
                                          std::uint32_t part_count) {
  if (part_count == 0 || part_index == 0 || part_index > part_count) {
    throw ParameterError("packet part index out of range");
  }
  if (value.empty()) return {};
  const std::size_t stride = (value.size() + part_count - 1) / part_count;
  const std::size_t begin = std::min(value.size(), static_cast<std::size_t>(part_index - 1) * stride);
  const std::size_t end = std::min(value.size(), static_cast<std::size_t>(part_index) * stride);
  return value.subspan(begin, end - begin);
}

Bytes CodedTransmission::serialize() const {
  Bytes out;
  out.reserve(wire_size());
  put_u16(out, group_index);
  out.push_back(sender_class);
  out.push_back(sender_level);
  out.push_back(static_cast<std::uint8_t>(components.size()));
  for (const TransmissionComponent& c : components) {
    out.push_back(c.target_pos);
    out.push_back(c.part_index);
    put_u32(out, c.true_length);
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

CodedTransmission CodedTransmission::deserialize(std::span<const std::uint8_t> wire) {
  if (wire.size() < 5) throw ProtocolError("transmission truncated: missing header");
  CodedTransmission tx;
  tx.group_index = static_cast<std::uint16_t>(wire[0] | (wire[1] << 8));
  tx.sender_class = wire[2];
  tx.sender_level = wire[3];
  const std::size_t count = wire[4];
  if (wire.size() < 5 + 6 * count) throw ProtocolError("transmission truncated: missing components");
  std::size_t off = 5;
  tx.components.resize(count);
  for (TransmissionComponent& c : tx.components) {
    c.target_pos = wire[off];
    c.part_index = wire[off + 1];
    c.true_length = static_cast<std::uint32_t>(wire[off + 2]) |
                    (static_cast<std::uint32_t>(wire[off + 3]) << 8) |
                    (static_cast<std::uint32_t>(wire[off + 4]) << 16) |
                    (static_cast<std::uint32_t>(wire[off + 5]) << 24);
    off += 6;
  }
  tx.payload.assign(wire.begin() + off, wire.end());
  return tx;
}

ShufflePlan::ShufflePlan(design::ResolvableDesign d, std::uint32_t functions)
    : design_(std::move(d)),
      placement_(place_subfiles(design_)),
      reducers_(assign_reducers(functions, design_.params.servers())),
      groups_(enumerate_groups(design_)) {
  if (groups_.size() > 0xffff) {
    throw ParameterError("group count exceeds the 16-bit wire format limit");
  }
}

ServerId ShufflePlan::member(std::uint32_t group_index, std::uint32_t member_pos) const {
  if (group_index >= groups_.size()) throw ParameterError("group index out of range");
  if (member_pos < 1 || member_pos > params().k) throw ParameterError("member position out of range");
  return ServerId{member_pos, groups_[group_index].levels[member_pos - 1]};
}

std::uint32_t ShufflePlan::member_ordinal(std::uint32_t group_index, std::uint32_t member_pos) const {
  return server_ordinal(params(), member(group_index, member_pos));
}

ShufflePlan::Target ShufflePlan::target(std::uint32_t group_index, std::uint32_t member_pos,
                                        std::uint32_t round) const {
  if (round >= rounds()) throw ParameterError("round index out of range");
  const std::uint32_t ordinal = member_ordinal(group_index, member_pos);
  return Target{reducers_.per_server[ordinal][round],
                groups_[group_index].target_subfile[member_pos - 1]};
}

CodedTransmission encode_transmission(const ShufflePlan& plan, std::uint32_t group_index,
                                      std::uint32_t sender_pos, std::uint32_t round,
                                      const ValueSource& source) {
  const std::uint32_t k = plan.params().k;
  const ServerId sender = plan.member(group_index, sender_pos);

  CodedTransmission tx;
  tx.group_index = static_cast<std::uint16_t>(group_index);
  tx.sender_class = static_cast<std::uint8_t>(sender.class_index);
  tx.sender_level = static_cast<std::uint8_t>(sender.level);

  struct Piece {
    std::span<const std::uint8_t> part;
  };
  std::vector<Piece> pieces;
  pieces.reserve(k - 1);
  std::size_t payload_len = 0;
  for (std::uint32_t m = 1; m <= k; ++m) {
    if (m == sender_pos) continue;
    const ShufflePlan::Target t = plan.target(group_index, m, round);
    const auto value = source(t.function, t.subfile);
    if (!value) {
      throw ProtocolError("missing packet part: group " + std::to_string(group_index) +
                          ", sender position " + std::to_string(sender_pos) +
                          ", target function " + std::to_string(t.function) + " subfile " +
                          std::to_string(t.subfile));
    }
    const std::uint32_t label = part_label(m, sender_pos);
    const auto part = packet_part(*value, label, k - 1);
    tx.components.push_back({static_cast<std::uint8_t>(m), static_cast<std::uint8_t>(label),
                             static_cast<std::uint32_t>(part.size())});
    pieces.push_back({part});
    payload_len = std::max(payload_len, part.size());
  }

  tx.payload.assign(payload_len, 0);
  for (const Piece& piece : pieces) {
    for (std::size_t i = 0; i < piece.part.size(); ++i) tx.payload[i] ^= piece.part[i];
  }
  return tx;
}

Bytes decode_transmissions(const ShufflePlan& plan, std::uint32_t group_index,
                           std::uint32_t receiver_pos, std::uint32_t round,
                           std::span<const CodedTransmission> received,
                           const ValueSource& source) {
  const std::uint32_t k = plan.params().k;
  if (receiver_pos < 1 || receiver_pos > k) throw ParameterError("receiver position out of range");
  const std::uint32_t parts = k - 1;

  // recovered[i] holds part i+1 once some sender has delivered it. Senders
  // whose parts were all empty may be absent; their slots stay empty.
  std::vector<std::optional<Bytes>> recovered(parts);
  std::vector<bool> seen_sender(k + 1, false);

  for (const CodedTransmission& tx : received) {
    if (tx.group_index != group_index) {
      throw ProtocolError("transmission belongs to group " + std::to_string(tx.group_index) +
                          ", expected " + std::to_string(group_index));
    }
    const std::uint32_t sender_pos = tx.sender_class;
    if (sender_pos == receiver_pos) continue;  // a server ignores its own broadcast
    if (sender_pos < 1 || sender_pos > k) throw ProtocolError("sender position out of range");
    const ServerId expected = plan.member(group_index, sender_pos);
    if (tx.sender_level != expected.level) {
      throw ProtocolError("sender level does not match the group's block");
    }
    if (seen_sender[sender_pos]) {
      throw ProtocolError("duplicate transmission from member " + std::to_string(sender_pos));
    }
    seen_sender[sender_pos] = true;

    Bytes buf = tx.payload;
    const TransmissionComponent* mine = nullptr;
    for (const TransmissionComponent& c : tx.components) {
      if (c.target_pos == receiver_pos) {
        if (mine) throw ProtocolError("transmission names the receiver twice");
        mine = &c;
        continue;
      }
      // Cancel a component the receiver can compute locally.
      const ShufflePlan::Target t = plan.target(group_index, c.target_pos, round);
      const auto value = source(t.function, t.subfile);
      if (!value) {
        throw ProtocolError("receiver cannot reconstruct component for member " +
                            std::to_string(c.target_pos) + " (function " +
                            std::to_string(t.function) + ", subfile " + std::to_string(t.subfile) +
                            ")");
      }
      const auto part = packet_part(*value, c.part_index, parts);
      if (part.size() != c.true_length) {
        throw ProtocolError("inconsistent header: component for member " +
                            std::to_string(c.target_pos) + " declares " +
                            std::to_string(c.true_length) + " bytes, local part has " +
                            std::to_string(part.size()));
      }
      for (std::size_t i = 0; i < part.size(); ++i) buf[i] ^= part[i];
    }
    if (!mine) {
      throw ProtocolError("transmission from member " + std::to_string(sender_pos) +
                          " carries no part for the receiver");
    }
    if (mine->true_length > buf.size()) {
      throw ProtocolError("inconsistent header: receiver part longer than the payload");
    }
    if (mine->part_index < 1 || mine->part_index > parts) {
      throw ProtocolError("receiver part index out of range");
    }
    auto& slot = recovered[mine->part_index - 1];
    if (slot) throw ProtocolError("part " + std::to_string(mine->part_index) + " delivered twice");
    slot.emplace(buf.begin(), buf.begin() + mine->true_length);
  }

  Bytes out;
  for (const auto& slot : recovered) {
    if (slot) out.insert(out.end(), slot->begin(), slot->end());
  }
  return out;
}

AnalyticLoads analytic_loads(const design::DesignParams& params, std::uint32_t r) {
  const design::DesignParams p = design::make_params(params.q, params.k);
  const std::int64_t servers = p.servers();
  if (r < 1 || r > servers) throw ParameterError("computation load r must lie in [1..K]");

  AnalyticLoads out;
  out.uncoded = Load(1) - Load(r, servers);
  out.proposed = Load(1, p.k - 1) * (Load(1) - Load(p.k, servers));
  out.prior = Load(1, r) * (Load(1) - Load(r, servers));
  out.prior_subfiles = binomial(static_cast<std::uint32_t>(servers), r);
  out.prior_groups = binomial(static_cast<std::uint32_t>(servers), r + 1);
  return out;
}

}  // namespace codedmr::protocol
