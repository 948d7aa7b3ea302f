#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "codedmr/protocol.hpp"

using namespace codedmr;
using namespace codedmr::protocol;

namespace {

design::ResolvableDesign make_design(std::uint32_t q, std::uint32_t k) {
  return design::build_design(design::make_params(q, k));
}

// Brute-force group enumeration straight from the block sets: every
// one-per-class level choice whose full intersection is empty, in
// lexicographic level order.
std::vector<std::vector<std::uint32_t>> groups_by_bruteforce(const design::ResolvableDesign& d) {
  const std::uint32_t q = d.params.q;
  const std::uint32_t k = d.params.k;
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> levels(k, 0);
  while (true) {
    std::vector<const design::Block*> chosen;
    for (std::uint32_t i = 0; i < k; ++i) chosen.push_back(&d.classes[i][levels[i]]);
    if (design::intersect_blocks(chosen).empty()) out.push_back(levels);
    std::uint32_t pos = k;
    bool done = true;
    while (pos-- > 0) {
      if (++levels[pos] < q) {
        done = false;
        break;
      }
      levels[pos] = 0;
    }
    if (done) return out;
  }
}

std::vector<std::uint32_t> group_ordinals(const design::DesignParams& p, const ShuffleGroup& g) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t pos = 1; pos <= p.k; ++pos) {
    out.push_back(server_ordinal(p, ServerId{pos, g.levels[pos - 1]}) + 1);
  }
  return out;
}

Bytes seeded_bytes(std::uint64_t seed, std::size_t len) {
  std::mt19937_64 rng(seed);
  Bytes out(len);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xff);
  return out;
}

// Value table addressed by (function, subfile), plus the matching source.
struct ValueTable {
  std::uint32_t functions = 0;
  std::uint32_t subfiles = 0;
  std::vector<Bytes> values;

  ValueTable(std::uint32_t fns, std::uint32_t sfs, std::uint64_t seed, std::size_t max_len)
      : functions(fns), subfiles(sfs), values(static_cast<std::size_t>(fns) * sfs) {
    std::mt19937_64 rng(seed);
    for (auto& v : values) v = seeded_bytes(rng(), rng() % (max_len + 1));
  }

  const Bytes& at(std::uint32_t fn, std::uint32_t sf) const {
    return values[static_cast<std::size_t>(fn - 1) * subfiles + (sf - 1)];
  }

  ValueSource source() const {
    return [this](std::uint32_t fn, std::uint32_t sf)
               -> std::optional<std::span<const std::uint8_t>> {
      return std::span<const std::uint8_t>(at(fn, sf));
    };
  }

  // Source restricted to the subfiles one server holds; everything else is
  // unavailable, as on a real server.
  ValueSource source_held_only(const std::vector<std::uint32_t>& held) const {
    std::set<std::uint32_t> own(held.begin(), held.end());
    return [this, own](std::uint32_t fn, std::uint32_t sf)
               -> std::optional<std::span<const std::uint8_t>> {
      if (!own.count(sf)) return std::nullopt;
      return std::span<const std::uint8_t>(at(fn, sf));
    };
  }
};

}  // namespace

TEST_CASE("placement: golden incidence for q=2,k=3") {
  const auto placement = place_subfiles(make_design(2, 3));
  const std::vector<std::vector<std::uint32_t>> expected = {{1, 2}, {3, 4}, {1, 3},
                                                            {2, 4}, {1, 4}, {2, 3}};
  CHECK(placement.held == expected);
}

TEST_CASE("placement: replication factor equals k") {
  for (auto [q, k] : {std::pair{2u, 2u}, {4u, 4u}}) {
    const auto d = make_design(q, k);
    const auto placement = place_subfiles(d);
    CHECK(placement.held.size() == q * k);
    std::vector<std::uint32_t> copies(d.params.subfiles() + 1, 0);
    for (const auto& held : placement.held) {
      if (q == 4) CHECK(held.size() == 16);
      for (std::uint32_t n : held) ++copies[n];
    }
    for (std::uint32_t n = 1; n <= d.params.subfiles(); ++n) CHECK(copies[n] == k);
  }
}

TEST_CASE("assign_reducers: strided partition of the functions") {
  const auto identity = assign_reducers(6, 6);
  for (std::uint32_t s = 0; s < 6; ++s) {
    CHECK(identity.per_server[s] == std::vector<std::uint32_t>{s + 1});
  }
  const auto strided = assign_reducers(32, 16);
  CHECK(strided.per_server[2] == std::vector<std::uint32_t>{3, 19});
  CHECK_THROWS_AS(assign_reducers(7, 3), ParameterError);
}

TEST_CASE("enumerate_groups: golden groups for q=2,k=3") {
  const auto d = make_design(2, 3);
  const auto groups = enumerate_groups(d);
  REQUIRE(groups.size() == 4);
  CHECK(group_ordinals(d.params, groups[0]) == std::vector<std::uint32_t>{1, 3, 6});
  CHECK(group_ordinals(d.params, groups[1]) == std::vector<std::uint32_t>{1, 4, 5});
  CHECK(group_ordinals(d.params, groups[2]) == std::vector<std::uint32_t>{2, 3, 5});
  CHECK(group_ordinals(d.params, groups[3]) == std::vector<std::uint32_t>{2, 4, 6});
  CHECK(groups[0].target_subfile == std::vector<std::uint32_t>{3, 2, 1});
  CHECK(groups[1].target_subfile == std::vector<std::uint32_t>{4, 1, 2});
  CHECK(groups[2].target_subfile == std::vector<std::uint32_t>{1, 4, 3});
  CHECK(groups[3].target_subfile == std::vector<std::uint32_t>{2, 3, 4});
}

TEST_CASE("enumerate_groups: counts and membership across small params") {
  for (std::uint32_t q = 2; q <= 4; ++q) {
    for (std::uint32_t k = 2; k <= 4; ++k) {
      CAPTURE(q);
      CAPTURE(k);
      const auto d = make_design(q, k);
      const auto groups = enumerate_groups(d);
      const std::uint64_t n = d.params.subfiles();
      CHECK(groups.size() == n * (q - 1));

      // Matches the brute-force route, including order.
      const auto brute = groups_by_bruteforce(d);
      REQUIRE(groups.size() == brute.size());
      for (std::size_t i = 0; i < groups.size(); ++i) CHECK(groups[i].levels == brute[i]);

      // Every block participates in q^(k-2)(q-1) groups, and the subfiles it
      // recovers are distinct and complete its block to [1..N].
      const std::uint64_t per_block = n / q * (q - 1);
      for (std::uint32_t cls = 1; cls <= k; ++cls) {
        for (std::uint32_t level = 0; level < q; ++level) {
          std::set<std::uint32_t> recovered;
          std::uint64_t member_count = 0;
          for (const auto& g : groups) {
            if (g.levels[cls - 1] != level) continue;
            ++member_count;
            recovered.insert(g.target_subfile[cls - 1]);
          }
          CHECK(member_count == per_block);
          CHECK(recovered.size() == per_block);
          const auto& own = d.block(cls, level).points;
          for (std::uint32_t p : own) CHECK_FALSE(recovered.count(p));
          CHECK(recovered.size() + own.size() == n);
        }
      }

      // Targets agree with explicit set intersections.
      for (const auto& g : groups) {
        for (std::uint32_t pos = 1; pos <= k; ++pos) {
          std::vector<const design::Block*> others;
          for (std::uint32_t m = 1; m <= k; ++m) {
            if (m != pos) others.push_back(&d.block(m, g.levels[m - 1]));
          }
          const auto inter = design::intersect_blocks(others);
          REQUIRE(inter.size() == 1);
          CHECK(inter[0] == g.target_subfile[pos - 1]);
        }
      }
    }
  }
}

TEST_CASE("enumerate_groups: 192 groups at q=4,k=4") {
  CHECK(enumerate_groups(make_design(4, 4)).size() == 192);
}

TEST_CASE("bipartite labeling: per-target bijection onto [1..k-1]") {
  const auto d = make_design(2, 4);
  const auto groups = enumerate_groups(d);
  REQUIRE(groups.size() == 8);
  for (const auto& g : groups) {
    const auto labeling = bipartite_step(g);
    for (std::uint32_t target = 1; target <= 4; ++target) {
      std::set<std::uint32_t> labels;
      for (std::uint32_t sender = 1; sender <= 4; ++sender) {
        const std::uint32_t label = labeling.labels[target - 1][sender - 1];
        CHECK(label == part_label(target, sender));
        if (sender == target) {
          CHECK(label == 0);
        } else {
          labels.insert(label);
        }
      }
      CHECK(labels == std::set<std::uint32_t>{1, 2, 3});
    }
  }
}

TEST_CASE("bipartite labeling: labeled servers hold the target subfile") {
  const auto d = make_design(2, 3);
  const auto groups = enumerate_groups(d);
  for (const auto& g : groups) {
    for (std::uint32_t target = 1; target <= 3; ++target) {
      const std::uint32_t subfile = g.target_subfile[target - 1];
      for (std::uint32_t sender = 1; sender <= 3; ++sender) {
        if (sender == target) continue;
        const auto& points = d.block(sender, g.levels[sender - 1]).points;
        CHECK(std::count(points.begin(), points.end(), subfile) == 1);
      }
    }
  }
}

TEST_CASE("packet_part: stride slicing with short tail") {
  const Bytes value = seeded_bytes(1, 5);
  CHECK(packet_part(value, 1, 4).size() == 2);
  CHECK(packet_part(value, 2, 4).size() == 2);
  CHECK(packet_part(value, 3, 4).size() == 1);
  CHECK(packet_part(value, 4, 4).size() == 0);
  CHECK_THROWS_AS(packet_part(value, 0, 4), ParameterError);
  CHECK_THROWS_AS(packet_part(value, 5, 4), ParameterError);

  // Parts always concatenate back to the value.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Bytes v = seeded_bytes(rng(), rng() % 64);
    const std::uint32_t parts = 1 + rng() % 7;
    Bytes joined;
    for (std::uint32_t i = 1; i <= parts; ++i) {
      const auto part = packet_part(v, i, parts);
      joined.insert(joined.end(), part.begin(), part.end());
    }
    CHECK(joined == v);
  }
}

TEST_CASE("encode: components, labels and payload for the first q=2,k=3 group") {
  ShufflePlan plan(make_design(2, 3), 6);
  ValueTable table(6, 4, 42, 32);

  // Group 0 = servers {1,3,6}; member 1 sends parts of the values wanted by
  // members 2 (function 3, subfile 2) and 3 (function 6, subfile 1).
  const auto tx = encode_transmission(plan, 0, 1, 0, table.source());
  CHECK(tx.group_index == 0);
  CHECK(tx.sender_class == 1);
  CHECK(tx.sender_level == 0);
  REQUIRE(tx.components.size() == 2);
  CHECK(tx.components[0].target_pos == 2);
  CHECK(tx.components[1].target_pos == 3);
  CHECK(plan.target(0, 2, 0).function == 3);
  CHECK(plan.target(0, 2, 0).subfile == 2);
  CHECK(plan.target(0, 3, 0).function == 6);
  CHECK(plan.target(0, 3, 0).subfile == 1);

  const auto part_a = packet_part(table.at(3, 2), tx.components[0].part_index, 2);
  const auto part_b = packet_part(table.at(6, 1), tx.components[1].part_index, 2);
  REQUIRE(tx.payload.size() == std::max(part_a.size(), part_b.size()));
  for (std::size_t i = 0; i < tx.payload.size(); ++i) {
    const std::uint8_t a = i < part_a.size() ? part_a[i] : 0;
    const std::uint8_t b = i < part_b.size() ? part_b[i] : 0;
    CHECK(tx.payload[i] == (a ^ b));
  }
}

TEST_CASE("encode: payload is padded to the longest part, headers keep true lengths") {
  // q=2,k=4: three components per transmission, labels of sender 1 are all 1,
  // so component part lengths are ceil(len/3) of each target value.
  ShufflePlan plan(make_design(2, 4), 8);
  std::vector<Bytes> fixed = {seeded_bytes(1, 13), seeded_bytes(2, 21), seeded_bytes(3, 19)};
  const auto t2 = plan.target(0, 2, 0);
  const auto t3 = plan.target(0, 3, 0);
  const auto t4 = plan.target(0, 4, 0);
  const ValueSource source = [&](std::uint32_t fn, std::uint32_t sf)
      -> std::optional<std::span<const std::uint8_t>> {
    if (fn == t2.function && sf == t2.subfile) return std::span<const std::uint8_t>(fixed[0]);
    if (fn == t3.function && sf == t3.subfile) return std::span<const std::uint8_t>(fixed[1]);
    if (fn == t4.function && sf == t4.subfile) return std::span<const std::uint8_t>(fixed[2]);
    return std::nullopt;
  };

  const auto tx = encode_transmission(plan, 0, 1, 0, source);
  REQUIRE(tx.components.size() == 3);
  CHECK(tx.components[0].true_length == 5);  // ceil(13/3)
  CHECK(tx.components[1].true_length == 7);  // ceil(21/3)
  CHECK(tx.components[2].true_length == 7);  // ceil(19/3)
  CHECK(tx.payload.size() == 7);
}

TEST_CASE("encode: a missing value is a protocol error naming the gap") {
  ShufflePlan plan(make_design(2, 3), 6);
  const ValueSource empty_source = [](std::uint32_t, std::uint32_t)
      -> std::optional<std::span<const std::uint8_t>> { return std::nullopt; };
  CHECK_THROWS_WITH_AS(encode_transmission(plan, 0, 1, 0, empty_source),
                       doctest::Contains("missing packet part"), ProtocolError);
}

TEST_CASE("decode: full round-trip with variable-length values") {
  for (auto [q, k] : {std::pair{2u, 3u}, {2u, 4u}, {3u, 3u}}) {
    CAPTURE(q);
    CAPTURE(k);
    const std::uint32_t servers = q * k;
    ShufflePlan plan(make_design(q, k), servers);
    ValueTable table(servers, plan.params().subfiles(), 1000 + q * 10 + k, 48);

    for (std::uint32_t g = 0; g < plan.groups().size(); ++g) {
      std::vector<CodedTransmission> txs;
      for (std::uint32_t pos = 1; pos <= k; ++pos) {
        txs.push_back(encode_transmission(plan, g, pos, 0, table.source()));
      }
      for (std::uint32_t pos = 1; pos <= k; ++pos) {
        const auto t = plan.target(g, pos, 0);
        // Receivers only use values of subfiles they hold.
        const auto held = plan.placement().held[plan.member_ordinal(g, pos)];
        const Bytes decoded = decode_transmissions(plan, g, pos, 0, txs,
                                                   table.source_held_only(held));
        CHECK(decoded == table.at(t.function, t.subfile));
      }
    }
  }
}

TEST_CASE("decode: encode only needs the sender's own subfiles") {
  ShufflePlan plan(make_design(3, 3), 9);
  ValueTable table(9, 9, 5, 24);
  for (std::uint32_t g = 0; g < plan.groups().size(); ++g) {
    for (std::uint32_t pos = 1; pos <= 3; ++pos) {
      const auto held = plan.placement().held[plan.member_ordinal(g, pos)];
      CHECK_NOTHROW(encode_transmission(plan, g, pos, 0, table.source_held_only(held)));
    }
  }
}

TEST_CASE("decode: zero-length values decode to an empty value") {
  ShufflePlan plan(make_design(2, 3), 6);
  const Bytes empty;
  const ValueSource source = [&empty](std::uint32_t, std::uint32_t)
      -> std::optional<std::span<const std::uint8_t>> {
    return std::span<const std::uint8_t>(empty);
  };
  std::vector<CodedTransmission> txs;
  for (std::uint32_t pos = 1; pos <= 3; ++pos) {
    txs.push_back(encode_transmission(plan, 0, pos, 0, source));
  }
  CHECK(decode_transmissions(plan, 0, 1, 0, txs, source).empty());
  // Elided senders behave the same: no transmissions, still an empty value.
  CHECK(decode_transmissions(plan, 0, 1, 0, {}, source).empty());
}

TEST_CASE("decode: rejects tampered and mismatched transmissions") {
  ShufflePlan plan(make_design(2, 3), 6);
  ValueTable table(6, 4, 7, 32);
  std::vector<CodedTransmission> txs;
  for (std::uint32_t pos = 1; pos <= 3; ++pos) {
    txs.push_back(encode_transmission(plan, 0, pos, 0, table.source()));
  }

  auto tampered = txs;
  for (auto& c : tampered[1].components) {
    if (c.target_pos != 1) c.true_length += 1;
  }
  CHECK_THROWS_WITH_AS(decode_transmissions(plan, 0, 1, 0, tampered, table.source()),
                       doctest::Contains("inconsistent header"), ProtocolError);

  auto duplicated = txs;
  duplicated.push_back(duplicated[1]);
  CHECK_THROWS_WITH_AS(decode_transmissions(plan, 0, 1, 0, duplicated, table.source()),
                       doctest::Contains("duplicate"), ProtocolError);

  auto foreign = txs;
  foreign[1].group_index = 3;
  CHECK_THROWS_AS(decode_transmissions(plan, 0, 1, 0, foreign, table.source()), ProtocolError);
}

TEST_CASE("wire format round-trips and rejects truncation") {
  ShufflePlan plan(make_design(2, 4), 8);
  ValueTable table(8, 8, 11, 40);
  for (std::uint32_t g = 0; g < 3; ++g) {
    for (std::uint32_t pos = 1; pos <= 4; ++pos) {
      const auto tx = encode_transmission(plan, g, pos, 0, table.source());
      const Bytes wire = tx.serialize();
      CHECK(wire.size() == tx.wire_size());
      const auto back = CodedTransmission::deserialize(wire);
      CHECK(back.group_index == tx.group_index);
      CHECK(back.sender_class == tx.sender_class);
      CHECK(back.sender_level == tx.sender_level);
      CHECK(back.payload == tx.payload);
      REQUIRE(back.components.size() == tx.components.size());
      for (std::size_t i = 0; i < tx.components.size(); ++i) {
        CHECK(back.components[i].target_pos == tx.components[i].target_pos);
        CHECK(back.components[i].part_index == tx.components[i].part_index);
        CHECK(back.components[i].true_length == tx.components[i].true_length);
      }
    }
  }
  CHECK_THROWS_AS(CodedTransmission::deserialize(Bytes{1, 2, 3}), ProtocolError);
}

TEST_CASE("analytic loads: exact rationals") {
  const auto six = analytic_loads(design::make_params(2, 3), 3);
  CHECK(six.proposed == Load(1, 4));
  CHECK(six.uncoded == Load(1, 2));
  CHECK(six.prior == Load(1, 6));
  CHECK(six.prior_subfiles == 20);
  CHECK(six.prior_groups == 15);

  const auto sixteen = analytic_loads(design::make_params(2, 8), 1);
  CHECK(sixteen.proposed == Load(1, 14));
  CHECK(sixteen.uncoded == Load(15, 16));

  CHECK_THROWS_AS(analytic_loads(design::make_params(2, 3), 0), ParameterError);
  CHECK_THROWS_AS(analytic_loads(design::make_params(2, 3), 7), ParameterError);
}

TEST_CASE("shuffle plan: rounds and wire-format guard") {
  ShufflePlan plan(make_design(2, 3), 12);
  CHECK(plan.rounds() == 2);
  CHECK(plan.target(0, 1, 1).function == 7);  // server 1 reduces {1, 7}
  CHECK_THROWS_AS(ShufflePlan(make_design(2, 3), 7), ParameterError);
}
