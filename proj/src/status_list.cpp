#include "realcred/status_list.hpp"

#include <zlib.h>

#include "realcred/crypto.hpp"
#include "realcred/error.hpp"

namespace realcred {

std::string_view to_string(CredentialState s) noexcept {
  switch (s) {
    case CredentialState::Valid: return "Valid";
    case CredentialState::Revoked: return "Revoked";
    case CredentialState::Suspended: return "Suspended";
  }
  return "Valid";
}

std::optional<CredentialState> parse_state(std::string_view s) noexcept {
  if (s == "Valid" || s == "valid") return CredentialState::Valid;
  if (s == "Revoked" || s == "revoked") return CredentialState::Revoked;
  if (s == "Suspended" || s == "suspended") return CredentialState::Suspended;
  return std::nullopt;
}

StatusList::StatusList(std::string id, std::size_t capacity)
    : id_(std::move(id)), capacity_(capacity), bytes_(status_list_byte_length(capacity), 0) {
  if (capacity == 0 || capacity > kMaxStatusListCapacity) {
    throw Error(Errc::InvalidArgument, "status list capacity out of range");
  }
}

CredentialState StatusList::get(std::size_t index) const {
  if (index >= capacity_) throw Error(Errc::OutOfRange, "status index " + std::to_string(index));
  const unsigned shift = 6 - 2 * (index % 4);
  return static_cast<CredentialState>((bytes_[index / 4] >> shift) & 0x3);
}

void StatusList::set(std::size_t index, CredentialState state) {
  const CredentialState current = get(index);
  if (current == CredentialState::Revoked && state != CredentialState::Revoked) {
    throw Error(Errc::IllegalTransition, "entry " + std::to_string(index) + " is revoked");
  }
  const unsigned shift = 6 - 2 * (index % 4);
  auto& byte = bytes_[index / 4];
  byte = static_cast<std::uint8_t>((byte & ~(0x3u << shift)) | (static_cast<unsigned>(state) << shift));
  ++version_;
}

std::size_t StatusList::allocate() {
  if (allocated_ >= capacity_) throw Error(Errc::ListFull, id_);
  return allocated_++;
}

StatusList StatusList::from_bytes(std::string id, std::size_t capacity, std::vector<std::uint8_t> bytes,
                                  std::uint64_t version, std::size_t allocated) {
  StatusList list(std::move(id), capacity);
  if (bytes.size() != list.bytes_.size()) throw Error(Errc::Malformed, "status list length mismatch");
  if (allocated > capacity) throw Error(Errc::Malformed, "allocated slots exceed capacity");
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    for (unsigned e = 0; e < 4; ++e) {
      const unsigned v = (bytes[i] >> (6 - 2 * e)) & 0x3;
      if (i * 4 + e >= capacity) {
        if (v != 0) throw Error(Errc::Malformed, "non-zero padding bits");
      } else if (v == 0x3) {
        throw Error(Errc::CorruptList, "entry " + std::to_string(i * 4 + e) + " holds forbidden value 11");
      }
    }
  }
  list.bytes_ = std::move(bytes);
  list.version_ = version;
  list.allocated_ = allocated;
  return list;
}

std::string encode_bitstring(const std::vector<std::uint8_t>& raw) {
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> out(len);
  if (compress2(out.data(), &len, raw.data(), static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION) != Z_OK) {
    throw Error(Errc::InvalidArgument, "compression failed");
  }
  out.resize(len);
  return base64url_encode(out);
}

std::vector<std::uint8_t> decode_bitstring(std::string_view encoded, std::size_t expected_bytes) {
  const auto packed = base64url_decode(encoded);
  if (!packed) throw Error(Errc::Malformed, "encodedList is not base64url");
  // one spare byte detects streams that inflate beyond the expected size
  std::vector<std::uint8_t> out(expected_bytes + 1);
  uLongf len = static_cast<uLongf>(out.size());
  const int rc = uncompress(out.data(), &len, packed->data(), static_cast<uLong>(packed->size()));
  if (rc != Z_OK && rc != Z_BUF_ERROR) throw Error(Errc::Malformed, "encodedList does not inflate");
  if (rc == Z_BUF_ERROR || len != expected_bytes) throw Error(Errc::Malformed, "encodedList has the wrong length");
  out.resize(len);
  return out;
}

}  // namespace realcred
