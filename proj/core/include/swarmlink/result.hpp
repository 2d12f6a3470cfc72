#pragma once

#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

namespace swarmlink {

/// Every recoverable failure the stack can report. Security failures
/// (AuthError, SignatureError, ReplayError, ...) are ordinary values here:
/// callers route them into metrics, not into exception handlers.
enum class Errc {
  InvalidPoint,
  EmptyContext,
  AuthError,
  UnknownNode,
  SignatureError,
  UnknownHandshake,
  Expired,
  NoSession,
  StaleEpoch,
  UnknownEpoch,
  MessageTooLarge,
  NoBroadcastKey,
  CounterExhausted,
  ReplayError,
  MtuExceeded,
  NoViableLink,
  Malformed,
};

std::string_view to_string(Errc e) noexcept;

class BadResultAccess : public std::logic_error {
 public:
  explicit BadResultAccess(Errc e);
  Errc error() const noexcept { return error_; }

 private:
  Errc error_;
};

/// Minimal value-or-error holder (std::expected is C++23).
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : state_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  Result(Errc error) : state_(std::in_place_index<1>, error) {}          // NOLINT

  bool has_value() const noexcept { return state_.index() == 0; }
  explicit operator bool() const noexcept { return has_value(); }

  T& value() & {
    check();
    return std::get<0>(state_);
  }
  const T& value() const& {
    check();
    return std::get<0>(state_);
  }
  T&& value() && {
    check();
    return std::get<0>(std::move(state_));
  }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  Errc error() const {
    if (has_value()) throw std::logic_error("Result holds a value");
    return std::get<1>(state_);
  }

 private:
  void check() const {
    if (!has_value()) throw BadResultAccess(std::get<1>(state_));
  }

  std::variant<T, Errc> state_;
};

struct Ok {};
using Status = Result<Ok>;

inline Status ok() { return Status(Ok{}); }

}  // namespace swarmlink
