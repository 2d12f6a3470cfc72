#pragma once

// Cryptographic primitives: X25519 agreement, Ed25519 signatures,
// HKDF-SHA-256 and AES-256-GCM. All functions are pure; randomness enters
// only through explicit seeds.

#include <cstdint>

#include "swarmlink/result.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::crypto {

inline constexpr std::size_t kPointSize = 32;
inline constexpr std::size_t kScalarSize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

using Seed = ByteArray<32>;
using PublicPoint = ByteArray<kPointSize>;
using VerifyKey = ByteArray<kPointSize>;
using Signature = ByteArray<kSignatureSize>;
using Nonce = ByteArray<kNonceSize>;
using Tag = ByteArray<kTagSize>;

enum class KeyPurpose : std::uint8_t { Session, Broadcast };

/// 32-byte symmetric secret. Deliberately has no stream operator.
struct SymmetricKey {
  ByteArray<kKeySize> bytes{};
  KeyPurpose purpose = KeyPurpose::Session;

  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

struct AgreementKeyPair {
  ByteArray<kScalarSize> private_scalar{};
  PublicPoint public_point{};
};

struct SignatureKeyPair {
  ByteArray<32> private_key{};  // Ed25519 seed form
  VerifyKey public_key{};
};

struct AeadBox {
  Bytes ciphertext;
  Tag tag{};

  /// ciphertext ‖ tag
  Bytes serialize() const;
  /// Splits the trailing 16 bytes off as the tag.
  static Result<AeadBox> parse(ByteView data);

  friend bool operator==(const AeadBox&, const AeadBox&) = default;
};

AgreementKeyPair agreement_keypair_from_seed(const Seed& seed);
SignatureKeyPair signature_keypair_from_seed(const Seed& seed);

/// X25519. Fails with InvalidPoint when the peer value yields the all-zero
/// shared secret (small-order input); every other 32-byte string maps to a
/// curve point per RFC 7748.
Result<ByteArray<32>> ecdh_shared_secret(const ByteArray<kScalarSize>& my_private,
                                         const PublicPoint& peer_public);

Signature sign(const SignatureKeyPair& key, ByteView message);
/// Never throws; malformed keys or signatures verify as false.
bool verify(const VerifyKey& key, ByteView message, const Signature& sig);

/// HKDF-SHA-256 (RFC 5869). Exposed for known-answer testing.
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

/// Session/broadcast key derivation: HKDF-SHA-256 with empty salt and the
/// context as info.
Result<SymmetricKey> derive_key(const ByteArray<32>& shared_secret, ByteView context,
                                KeyPurpose purpose = KeyPurpose::Session);

AeadBox aead_seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext, ByteView aad);
Result<Bytes> aead_open(const SymmetricKey& key, const Nonce& nonce, const AeadBox& box,
                        ByteView aad);

}  // namespace swarmlink::crypto
