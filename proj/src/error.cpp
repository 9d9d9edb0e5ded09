#include "realcred/error.hpp"

namespace realcred {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "INVALID_ARGUMENT";
    case Errc::NotEncodable: return "NOT_ENCODABLE";
    case Errc::OutOfRange: return "OUT_OF_RANGE";
    case Errc::EmptyInput: return "EMPTY_INPUT";
    case Errc::IoFailure: return "IO_FAILURE";
    case Errc::DuplicateDocId: return "DUPLICATE_DOC_ID";
    case Errc::ParseError: return "PARSE_ERROR";
    case Errc::UnknownDid: return "UNKNOWN_DID";
    case Errc::DuplicateDid: return "DUPLICATE_DID";
    case Errc::UnregisteredIssuer: return "UNREGISTERED_ISSUER";
    case Errc::InvalidValidity: return "INVALID_VALIDITY";
    case Errc::ListFull: return "LIST_FULL";
    case Errc::BadSignature: return "BAD_SIGNATURE";
    case Errc::Malformed: return "MALFORMED";
    case Errc::CorruptList: return "CORRUPT_LIST";
    case Errc::IllegalTransition: return "ILLEGAL_TRANSITION";
    case Errc::UnknownCredential: return "UNKNOWN_CREDENTIAL";
    case Errc::UnknownProcess: return "UNKNOWN_PROCESS";
    case Errc::UnknownDocument: return "UNKNOWN_DOCUMENT";
    case Errc::UnknownLabel: return "UNKNOWN_LABEL";
    case Errc::UnknownOffer: return "UNKNOWN_OFFER";
    case Errc::UnknownStatusList: return "UNKNOWN_STATUS_LIST";
    case Errc::InvalidState: return "INVALID_STATE";
    case Errc::VcInvalid: return "VC_INVALID";
    case Errc::DuplicateKind: return "DUPLICATE_KIND";
    case Errc::OfferConsumed: return "OFFER_CONSUMED";
    case Errc::OfferExpired: return "OFFER_EXPIRED";
    case Errc::KindMismatch: return "KIND_MISMATCH";
    case Errc::MissingKind: return "MISSING_KIND";
    case Errc::StorageFailure: return "STORAGE_FAILURE";
  }
  return "UNKNOWN";
}

}  // namespace realcred
