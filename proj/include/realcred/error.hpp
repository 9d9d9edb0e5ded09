#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace realcred {

/// Error codes surfaced across module boundaries and over the HTTP API.
/// The string form (see `to_string`) is the wire representation.
enum class Errc {
  InvalidArgument,
  NotEncodable,
  OutOfRange,
  EmptyInput,
  IoFailure,
  DuplicateDocId,
  ParseError,
  UnknownDid,
  DuplicateDid,
  UnregisteredIssuer,
  InvalidValidity,
  ListFull,
  BadSignature,
  Malformed,
  CorruptList,
  IllegalTransition,
  UnknownCredential,
  UnknownProcess,
  UnknownDocument,
  UnknownLabel,
  UnknownOffer,
  UnknownStatusList,
  InvalidState,
  VcInvalid,
  DuplicateKind,
  OfferConsumed,
  OfferExpired,
  KindMismatch,
  MissingKind,
  StorageFailure,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace realcred
