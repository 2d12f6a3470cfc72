#include "swarmlink/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/core_names.h>
#include <openssl/params.h>

#include <memory>
#include <stdexcept>

namespace swarmlink::crypto {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
struct KdfDeleter {
  void operator()(EVP_KDF* p) const { EVP_KDF_free(p); }
};
struct KdfCtxDeleter {
  void operator()(EVP_KDF_CTX* p) const { EVP_KDF_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

[[noreturn]] void fail(const char* what) { throw std::runtime_error(std::string("openssl: ") + what); }

PkeyPtr private_key(int type, const std::uint8_t* raw_key, std::size_t len) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(type, nullptr, raw_key, len));
  if (!key) fail("load private key");
  return key;
}

template <std::size_t N>
ByteArray<N> raw_public(EVP_PKEY* key) {
  ByteArray<N> out{};
  std::size_t len = N;
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != N) fail("export public key");
  return out;
}

}  // namespace

Bytes AeadBox::serialize() const {
  Bytes out;
  out.reserve(ciphertext.size() + kTagSize);
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

Result<AeadBox> AeadBox::parse(ByteView data) {
  if (data.size() < kTagSize) return Errc::Malformed;
  AeadBox box;
  const auto split = data.size() - kTagSize;
  box.ciphertext.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(split));
  for (std::size_t i = 0; i < kTagSize; ++i) box.tag[i] = data[split + i];
  return box;
}

AgreementKeyPair agreement_keypair_from_seed(const Seed& seed) {
  AgreementKeyPair pair;
  pair.private_scalar = seed;
  auto key = private_key(EVP_PKEY_X25519, seed.data(), seed.size());
  pair.public_point = raw_public<kPointSize>(key.get());
  return pair;
}

SignatureKeyPair signature_keypair_from_seed(const Seed& seed) {
  SignatureKeyPair pair;
  pair.private_key = seed;
  auto key = private_key(EVP_PKEY_ED25519, seed.data(), seed.size());
  pair.public_key = raw_public<kPointSize>(key.get());
  return pair;
}

Result<ByteArray<32>> ecdh_shared_secret(const ByteArray<kScalarSize>& my_private,
                                         const PublicPoint& peer_public) {
  auto mine = private_key(EVP_PKEY_X25519, my_private.data(), my_private.size());
  PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(),
                                           peer_public.size()));
  if (!peer) return Errc::InvalidPoint;
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(mine.get(), nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1) fail("derive init");
  if (EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) return Errc::InvalidPoint;
  ByteArray<32> secret{};
  std::size_t len = secret.size();
  // OpenSSL refuses all-zero outputs from small-order points.
  if (EVP_PKEY_derive(ctx.get(), secret.data(), &len) != 1 || len != secret.size()) {
    return Errc::InvalidPoint;
  }
  std::uint8_t acc = 0;
  for (auto b : secret) acc |= b;
  if (acc == 0) return Errc::InvalidPoint;
  return secret;
}

Signature sign(const SignatureKeyPair& key, ByteView message) {
  auto pkey = private_key(EVP_PKEY_ED25519, key.private_key.data(), key.private_key.size());
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
    fail("sign init");
  }
  Signature sig{};
  std::size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != sig.size()) {
    fail("sign");
  }
  return sig;
}

bool verify(const VerifyKey& key, ByteView message, const Signature& sig) {
  PkeyPtr pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, key.data(), key.size()));
  if (!pkey) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  std::unique_ptr<EVP_KDF, KdfDeleter> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr));
  if (!kdf) fail("fetch HKDF");
  std::unique_ptr<EVP_KDF_CTX, KdfCtxDeleter> ctx(EVP_KDF_CTX_new(kdf.get()));
  if (!ctx) fail("HKDF ctx");

  char digest[] = "SHA256";
  // OpenSSL takes non-const pointers but does not modify the buffers.
  auto* ikm_p = const_cast<std::uint8_t*>(ikm.data());
  auto* salt_p = const_cast<std::uint8_t*>(salt.data());
  auto* info_p = const_cast<std::uint8_t*>(info.data());
  OSSL_PARAM params[5];
  int n = 0;
  params[n++] = OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0);
  params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, ikm_p, ikm.size());
  if (!salt.empty()) {
    params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SALT, salt_p, salt.size());
  }
  if (!info.empty()) {
    params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO, info_p, info.size());
  }
  params[n] = OSSL_PARAM_construct_end();

  Bytes out(length);
  if (EVP_KDF_derive(ctx.get(), out.data(), out.size(), params) != 1) fail("HKDF derive");
  return out;
}

Result<SymmetricKey> derive_key(const ByteArray<32>& shared_secret, ByteView context,
                                KeyPurpose purpose) {
  if (context.empty()) return Errc::EmptyContext;
  auto okm = hkdf_sha256(shared_secret, {}, context, kKeySize);
  SymmetricKey key;
  key.purpose = purpose;
  std::copy(okm.begin(), okm.end(), key.bytes.begin());
  return key;
}

AeadBox aead_seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext, ByteView aad) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail("cipher ctx");
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                          nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail("gcm aad");
  }
  AeadBox box;
  box.ciphertext.resize(plaintext.size());
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), box.ciphertext.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    fail("gcm encrypt");
  }
  if (EVP_EncryptFinal_ex(ctx.get(), box.ciphertext.data() + box.ciphertext.size(), &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagSize),
                          box.tag.data()) != 1) {
    fail("gcm final");
  }
  return box;
}

Result<Bytes> aead_open(const SymmetricKey& key, const Nonce& nonce, const AeadBox& box,
                        ByteView aad) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail("cipher ctx");
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                          nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    return Errc::AuthError;
  }
  Bytes plain(box.ciphertext.size());
  if (!box.ciphertext.empty() &&
      EVP_DecryptUpdate(ctx.get(), plain.data(), &len, box.ciphertext.data(),
                        static_cast<int>(box.ciphertext.size())) != 1) {
    return Errc::AuthError;
  }
  Tag tag = box.tag;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagSize),
                          tag.data()) != 1) {
    fail("gcm set tag");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + plain.size(), &len) != 1) {
    return Errc::AuthError;
  }
  return plain;
}

}  // namespace swarmlink::crypto
