#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hanjakit {

enum class Errc {
  kLengthMismatch,
  kUnknownLabel,
  kUnrecognizedGlyphRun,
  kLeadingPunctuation,
  kInvalidRegistry,
  kUnknownTag,
  kSpanOutOfRange,
  kOverlappingSpans,
  kNotSingleCharacter,
  kInvalidConfig,
  kUnsupportedDirection,
  kEmptyText,
  kInputTooLarge,
  kInvalidRequest,
  kStreamTruncated,
  kDeltaAfterDone,
  kInvalidWindowPlan,
  kInvalidState,
  kUnknownBackend,
  kBackendUnavailable,
  kInvalidBackendResponse,
  kCancelled,
  kShapeMismatch,
  kStorageFailure,
  kNotFound,
  kUnauthenticated,
  kForbidden,
  kEmailTaken,
  kInvalidCredentials,
  kInvalidUtf8,
};

// Stable machine-readable name, e.g. "LengthMismatch".
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hanjakit
