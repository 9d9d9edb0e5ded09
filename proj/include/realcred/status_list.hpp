#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace realcred {

inline constexpr std::size_t kDefaultStatusListCapacity = 131072;
/// Upper bound accepted when decoding untrusted lists.
inline constexpr std::size_t kMaxStatusListCapacity = std::size_t{1} << 24;
inline constexpr int kStatusSize = 2;

/// Two-bit entry values. 0b11 is forbidden.
enum class CredentialState : std::uint8_t { Valid = 0, Revoked = 1, Suspended = 2 };

std::string_view to_string(CredentialState s) noexcept;
std::optional<CredentialState> parse_state(std::string_view s) noexcept;

/// Bitstring of 2-bit entries. Entry i occupies bits [2i, 2i+1], bit 0 being
/// the most significant bit of byte 0. Revoked is absorbing.
class StatusList {
 public:
  explicit StatusList(std::string id, std::size_t capacity = kDefaultStatusListCapacity);

  const std::string& id() const noexcept { return id_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t version() const noexcept { return version_; }
  /// Number of slots handed out by `allocate`.
  std::size_t allocated() const noexcept { return allocated_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  /// Throws Error(OutOfRange).
  CredentialState get(std::size_t index) const;
  /// Bumps the version even when the entry already holds `state`. Throws
  /// Error(OutOfRange) or Error(IllegalTransition) when leaving Revoked.
  void set(std::size_t index, CredentialState state);
  /// Next unused slot; Error(ListFull) when exhausted.
  std::size_t allocate();

  /// Rebuilds a list from raw bytes. Throws Error(Malformed) on a length
  /// mismatch or non-zero padding, Error(CorruptList) on a forbidden entry.
  static StatusList from_bytes(std::string id, std::size_t capacity, std::vector<std::uint8_t> bytes,
                               std::uint64_t version, std::size_t allocated = 0);

  friend bool operator==(const StatusList&, const StatusList&) = default;

 private:
  std::string id_;
  std::size_t capacity_;
  std::vector<std::uint8_t> bytes_;
  std::uint64_t version_ = 0;
  std::size_t allocated_ = 0;
};

inline std::size_t status_list_byte_length(std::size_t capacity) { return (capacity * kStatusSize + 7) / 8; }

/// zlib-wrapped DEFLATE of the raw bytes, then base64url without padding.
std::string encode_bitstring(const std::vector<std::uint8_t>& raw);
/// Inverse of `encode_bitstring`; Error(Malformed) on bad base64, bad
/// compression or a length other than `expected_bytes`.
std::vector<std::uint8_t> decode_bitstring(std::string_view encoded, std::size_t expected_bytes);

}  // namespace realcred
