#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace selnoise {

// 64-bit FNV-1a. Used for fingerprint identifiers and seed derivation, so the
// byte encoding fed to it must stay fixed across platforms.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 14695981039346656037ULL;
  static constexpr std::uint64_t kPrime = 1099511628211ULL;

  constexpr Fnv1a& bytes(std::span<const std::uint8_t> data) noexcept {
    for (auto b : data) {
      state_ ^= b;
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr Fnv1a& text(std::string_view s) noexcept {
    for (char c : s) {
      state_ ^= static_cast<std::uint8_t>(c);
      state_ *= kPrime;
    }
    return *this;
  }

  // Little-endian encoding regardless of host order.
  constexpr Fnv1a& u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<std::uint8_t>(v >> (8 * i));
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr Fnv1a& i64(std::int64_t v) noexcept { return u64(static_cast<std::uint64_t>(v)); }

  constexpr std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept { return Fnv1a{}.text(s).digest(); }

}  // namespace selnoise
