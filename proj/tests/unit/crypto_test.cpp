#include <gtest/gtest.h>

#include <algorithm>

#include "../support/oracles.hpp"
#include "swarmlink/bytes.hpp"
#include "swarmlink/crypto.hpp"
#include "swarmlink/rng.hpp"

using namespace swarmlink;
using namespace swarmlink::crypto;
using oracle::hex;

namespace {

template <std::size_t N>
ByteArray<N> arr(const std::string& h) {
  const Bytes b = hex(h);
  ByteArray<N> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

SymmetricKey key_of(const std::string& h) { return SymmetricKey{arr<32>(h), KeyPurpose::Session}; }

// AES-256-GCM vectors from the original GCM submission (test cases 13-16).
struct GcmCase {
  const char* name;
  const char* key;
  const char* iv;
  const char* plaintext;
  const char* aad;
  const char* ciphertext;
  const char* tag;
};

const GcmCase kGcmCases[] = {
    {"tc13", "0000000000000000000000000000000000000000000000000000000000000000", "000000000000000000000000", "", "",
     "", "530f8afbc74536b9a963b4f1c4cb738b"},
    {"tc14", "0000000000000000000000000000000000000000000000000000000000000000", "000000000000000000000000",
     "00000000000000000000000000000000", "", "cea7403d4d606b6e074ec5d3baf39d18",
     "d0d1c8a799996bf0265b98b5d48ab919"},
    {"tc15", "feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de657"
     "ba637b391aafd255",
     "",
     "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b1056828838c5f61e6393ba7a0a"
     "bcc9f662898015ad",
     "b094dac5d93471bdec1a502270e3cc6c"},
    {"tc16", "feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de657"
     "ba637b39",
     "feedfacedeadbeeffeedfacedeadbeefabaddad2",
     "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b1056828838c5f61e6393ba7a0a"
     "bcc9f662",
     "76fc6ece0f4e1768cddf8853bb2d551b"},
};

}  // namespace

TEST(AesGcm, KnownAnswerVectors) {
  for (const auto& c : kGcmCases) {
    SCOPED_TRACE(c.name);
    const auto key = key_of(c.key);
    const auto iv = arr<12>(c.iv);
    const auto box = aead_seal(key, iv, hex(c.plaintext), hex(c.aad));
    EXPECT_EQ(to_hex(box.ciphertext), c.ciphertext);
    EXPECT_EQ(to_hex(box.tag), c.tag);
    auto opened = aead_open(key, iv, box, hex(c.aad));
    ASSERT_TRUE(opened);
    EXPECT_EQ(to_hex(*opened), c.plaintext);
  }
}

TEST(AesGcm, RejectsAnyTamperedInput) {
  Rng rng(7);
  const SymmetricKey key{rng.array<32>()};
  const Nonce nonce = rng.array<12>();
  const Bytes aad = to_bytes("header");
  const Bytes plain = to_bytes("telemetry frame");
  const auto box = aead_seal(key, nonce, plain, aad);

  auto bad_tag = box;
  bad_tag.tag[0] ^= 1;
  EXPECT_EQ(aead_open(key, nonce, bad_tag, aad).error(), Errc::AuthError);

  auto bad_ct = box;
  bad_ct.ciphertext[3] ^= 0x80;
  EXPECT_EQ(aead_open(key, nonce, bad_ct, aad).error(), Errc::AuthError);

  EXPECT_EQ(aead_open(key, nonce, box, to_bytes("headeR")).error(), Errc::AuthError);
  auto other_nonce = nonce;
  other_nonce[11] ^= 1;
  EXPECT_EQ(aead_open(key, other_nonce, box, aad).error(), Errc::AuthError);
  auto other_key = key;
  other_key.bytes[0] ^= 1;
  EXPECT_EQ(aead_open(other_key, nonce, box, aad).error(), Errc::AuthError);
}

TEST(AesGcm, BoxSerializationRoundTrip) {
  AeadBox box{to_bytes("abc"), arr<16>("000102030405060708090a0b0c0d0e0f")};
  const Bytes s = box.serialize();
  EXPECT_EQ(s.size(), 3u + kTagSize);
  auto parsed = AeadBox::parse(s);
  ASSERT_TRUE(parsed);
  EXPECT_EQ(*parsed, box);
  EXPECT_EQ(AeadBox::parse(Bytes(15, 0)).error(), Errc::Malformed);
}

TEST(X25519, Rfc7748Vectors) {
  const auto alice = arr<32>("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a");
  const auto bob = arr<32>("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb");
  const auto alice_kp = agreement_keypair_from_seed(alice);
  const auto bob_kp = agreement_keypair_from_seed(bob);
  EXPECT_EQ(to_hex(alice_kp.public_point), "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a");
  EXPECT_EQ(to_hex(bob_kp.public_point), "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f");
  auto s1 = ecdh_shared_secret(alice_kp.private_scalar, bob_kp.public_point);
  auto s2 = ecdh_shared_secret(bob_kp.private_scalar, alice_kp.public_point);
  ASSERT_TRUE(s1);
  ASSERT_TRUE(s2);
  EXPECT_EQ(to_hex(*s1), "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742");
  EXPECT_EQ(*s1, *s2);
}

TEST(X25519, SmallOrderPointIsRejected) {
  const auto kp = agreement_keypair_from_seed(Rng(1).array<32>());
  EXPECT_EQ(ecdh_shared_secret(kp.private_scalar, PublicPoint{}).error(), Errc::InvalidPoint);
  PublicPoint one{};
  one[0] = 1;
  EXPECT_EQ(ecdh_shared_secret(kp.private_scalar, one).error(), Errc::InvalidPoint);
}

TEST(Ed25519, Rfc8032TestOne) {
  const auto kp = signature_keypair_from_seed(
      arr<32>("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60"));
  EXPECT_EQ(to_hex(kp.public_key), "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const auto sig = sign(kp, ByteView{});
  EXPECT_EQ(to_hex(sig),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0"
            "595bbe24655141438e7a100b");
  EXPECT_TRUE(verify(kp.public_key, ByteView{}, sig));
  auto bad = sig;
  bad[10] ^= 4;
  EXPECT_FALSE(verify(kp.public_key, ByteView{}, bad));
  const Bytes msg{0x72};
  EXPECT_FALSE(verify(kp.public_key, msg, sig));
  EXPECT_FALSE(verify(VerifyKey{}, ByteView{}, sig));
}

TEST(Hkdf, Rfc5869Cases) {
  const Bytes ikm(22, 0x0b);
  EXPECT_EQ(to_hex(hkdf_sha256(ikm, hex("000102030405060708090a0b0c"), hex("f0f1f2f3f4f5f6f7f8f9"), 42)),
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
  EXPECT_EQ(to_hex(hkdf_sha256(ikm, {}, {}, 42)),
            "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d9d201395faa4b61a96c8");
}

TEST(DeriveKey, ContextSeparatesKeys) {
  const ByteArray<32> secret = Rng(3).array<32>();
  auto a = derive_key(secret, to_bytes("ctx-a"));
  auto b = derive_key(secret, to_bytes("ctx-b"));
  ASSERT_TRUE(a);
  ASSERT_TRUE(b);
  EXPECT_NE(a->bytes, b->bytes);
  EXPECT_EQ(derive_key(secret, {}).error(), Errc::EmptyContext);
  auto again = derive_key(secret, to_bytes("ctx-a"));
  EXPECT_EQ(again->bytes, a->bytes);
  EXPECT_EQ(Bytes(a->bytes.begin(), a->bytes.end()), hkdf_sha256(secret, {}, to_bytes("ctx-a"), 32));
}

TEST(Hex, RoundTripAndRejects) {
  EXPECT_EQ(to_hex(Bytes{0x00, 0xab, 0xff}), "00abff");
  EXPECT_EQ(*from_hex("00ABff"), (Bytes{0x00, 0xab, 0xff}));
  EXPECT_FALSE(from_hex("abc"));
  EXPECT_FALSE(from_hex("zz"));
}

TEST(Rng, SubstreamsAreStableAndIndependent) {
  Rng a(99);
  Rng b(99);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  const Rng base(5);
  Rng f1 = base.fork("loss", 1);
  Rng f2 = base.fork("loss", 1);
  Rng f3 = base.fork("loss", 2);
  const auto v1 = f1.next_u64();
  EXPECT_EQ(v1, f2.next_u64());
  EXPECT_NE(v1, f3.next_u64());
  EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
  Rng r(11);
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_int(3, 9);
    EXPECT_GE(v, 3u);
    EXPECT_LE(v, 9u);
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
