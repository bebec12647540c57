#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dkpabe {

enum class ErrorCode {
  kInvalidArgument,
  kBackendMismatch,
  kUnsupportedParameters,
  kDuplicatePoints,
  kUnsatisfied,
  kInvalidTree,
  kPolicySyntax,
  kForeignLeaf,
  kDegenerateUid,
  kUnknownAttribute,
  kEmptyAuthoritySet,
  kMissingLeafKey,
  kMissingShare,
  kPolicyUnsatisfied,
  kDecryptionMismatch,
  kMalformedProof,
  kWitnessStatementMismatch,
  kProtocolAbort,
  kPokRejected,
  kConsistencyCheckFailed,
  kSigma2Rejected,
  kUnblindSanityFailed,
  kPhaseViolation,
  kBadMagic,
  kBadVersion,
  kBadChecksum,
  kTruncatedInput,
  kMalformedInput,
  kAuthenticationFailed,
  kFrameTooLarge,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as Error; the code is the stable,
// programmatically inspectable part, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail = {});

}  // namespace dkpabe
