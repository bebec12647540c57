#include "dkpabe/error.hpp"

namespace dkpabe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kBackendMismatch: return "BackendMismatch";
    case ErrorCode::kUnsupportedParameters: return "UnsupportedParameters";
    case ErrorCode::kDuplicatePoints: return "DuplicatePoints";
    case ErrorCode::kUnsatisfied: return "Unsatisfied";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kPolicySyntax: return "PolicySyntax";
    case ErrorCode::kForeignLeaf: return "ForeignLeaf";
    case ErrorCode::kDegenerateUid: return "DegenerateUid";
    case ErrorCode::kUnknownAttribute: return "UnknownAttribute";
    case ErrorCode::kEmptyAuthoritySet: return "EmptyAuthoritySet";
    case ErrorCode::kMissingLeafKey: return "MissingLeafKey";
    case ErrorCode::kMissingShare: return "MissingShare";
    case ErrorCode::kPolicyUnsatisfied: return "PolicyUnsatisfied";
    case ErrorCode::kDecryptionMismatch: return "DecryptionMismatch";
    case ErrorCode::kMalformedProof: return "MalformedProof";
    case ErrorCode::kWitnessStatementMismatch: return "WitnessStatementMismatch";
    case ErrorCode::kProtocolAbort: return "ProtocolAbort";
    case ErrorCode::kPokRejected: return "PokRejected";
    case ErrorCode::kConsistencyCheckFailed: return "ConsistencyCheckFailed";
    case ErrorCode::kSigma2Rejected: return "Sigma2Rejected";
    case ErrorCode::kUnblindSanityFailed: return "UnblindSanityFailed";
    case ErrorCode::kPhaseViolation: return "PhaseViolation";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kBadChecksum: return "BadChecksum";
    case ErrorCode::kTruncatedInput: return "TruncatedInput";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kAuthenticationFailed: return "AuthenticationFailed";
    case ErrorCode::kFrameTooLarge: return "FrameTooLarge";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail.empty()
                             ? std::string(to_string(code))
                             : std::string(to_string(code)) + ": " + detail),
      code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace dkpabe
