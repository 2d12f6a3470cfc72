#include <gtest/gtest.h>

#include "swarmlink/adversary.hpp"
#include "swarmlink/codec.hpp"

using namespace swarmlink;
using namespace swarmlink::adversary;
using namespace std::chrono_literals;

namespace {

codec::Frame frame_of(std::uint8_t tag) {
  return codec::Frame{{codec::TelemetryMessage{tag, node_id(1), Bytes(12, tag)}}};
}

}  // namespace

TEST(Eavesdrop, OnlyLeakedEpochsAreRecovered) {
  Rng rng(1);
  std::map<std::uint32_t, crypto::SymmetricKey> keys;
  for (std::uint32_t e = 1; e <= 5; ++e) keys[e] = crypto::SymmetricKey{rng.array<32>()};
  std::vector<Bytes> air;
  std::map<FrameKey, Bytes> truth;
  codec::CounterState counters;
  std::uint32_t seq = 0;
  for (std::uint32_t e = 1; e <= 5; ++e) {
    for (int i = 0; i < 4; ++i, ++seq) {
      const auto f = frame_of(static_cast<std::uint8_t>(seq));
      auto p = codec::seal_with_key(keys[e], e, node_id(1), seq, 3, f, counters);
      air.push_back(p->encode());
      air.push_back(p->encode());  // a forwarded copy
      truth[{node_id(1), seq}] = f.serialize();
    }
  }
  const auto none = eavesdrop_collect(air, {}, truth);
  EXPECT_EQ(none.frames_observed, 20u);
  EXPECT_EQ(none.frames_recovered, 0u);

  const auto one = eavesdrop_collect(air, {{3, keys[3]}}, truth);
  EXPECT_EQ(one.frames_recovered, 4u);
  EXPECT_EQ(one.recovered_unleaked, 0u);
  EXPECT_EQ(one.recovered_by_epoch.size(), 1u);
  EXPECT_EQ(one.recovered_by_epoch.at(3), 4u);
  EXPECT_EQ(one.observed_by_epoch.at(5), 4u);

  // A key filed under the wrong epoch opens nothing.
  const auto misfiled = eavesdrop_collect(air, {{4, keys[3]}}, truth);
  EXPECT_EQ(misfiled.frames_recovered, 0u);
}

TEST(Eavesdrop, CleartextBaselineIsFullyRecovered) {
  std::vector<Bytes> air;
  std::map<FrameKey, Bytes> truth;
  codec::CounterState counters;
  for (std::uint32_t s = 0; s < 10; ++s) {
    const auto f = frame_of(static_cast<std::uint8_t>(s));
    air.push_back(codec::seal_cleartext(1, node_id(2), s, 0, f, counters)->encode());
    truth[{node_id(2), s}] = f.serialize();
  }
  const auto r = eavesdrop_collect(air, {}, truth);
  EXPECT_EQ(r.frames_observed, 10u);
  EXPECT_EQ(r.frames_recovered, 10u);
}

TEST(ReplayInjector, RecordsUpToLimitWithDelay) {
  ReplayInjector inj(2s, 3, 1.0);
  Rng rng(2);
  const Bytes wire{0x01, 0x02};
  for (int i = 0; i < 5; ++i) {
    auto r = inj.observe(wire, node_id(1), std::nullopt, 0, SimTime(i * 1s), rng);
    if (i < 3) {
      ASSERT_TRUE(r);
      EXPECT_EQ(r->at, SimTime(i * 1s) + 2s);
      EXPECT_EQ(r->wire, wire);
    } else {
      EXPECT_FALSE(r);
    }
  }
  EXPECT_EQ(inj.recorded(), 3u);
  EXPECT_EQ(replay_inject(Injection{1s, wire, node_id(1), node_id(2), 0}, 9s).at, 9s);

  ReplayInjector none(1s, 10, 0.0);
  EXPECT_FALSE(none.observe(wire, node_id(1), std::nullopt, 0, 0s, rng));
}

TEST(Mitm, CandidateKeyMatchesVictimDerivation) {
  Rng rng(3);
  const auto id = MitmIdentity::generate(rng);
  const auto victim = crypto::agreement_keypair_from_seed(rng.array<32>());
  handshake::HandshakeNonce nonce{};
  nonce[0] = 7;
  const auto shared = crypto::ecdh_shared_secret(victim.private_scalar, id.ephemeral.public_point);
  const auto expected =
      crypto::derive_key(*shared, handshake::session_context(node_id(0), node_id(4), nonce));
  const auto candidate = mitm_candidate_key(id, node_id(0), node_id(4), nonce, victim.public_point);
  ASSERT_TRUE(candidate);
  EXPECT_EQ(candidate->bytes, expected->bytes);
}
