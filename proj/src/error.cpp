#include "hanjakit/error.hpp"

namespace hanjakit {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kUnrecognizedGlyphRun: return "UnrecognizedGlyphRun";
    case Errc::kLeadingPunctuation: return "LeadingPunctuation";
    case Errc::kInvalidRegistry: return "InvalidRegistry";
    case Errc::kUnknownTag: return "UnknownTag";
    case Errc::kSpanOutOfRange: return "SpanOutOfRange";
    case Errc::kOverlappingSpans: return "OverlappingSpans";
    case Errc::kNotSingleCharacter: return "NotSingleCharacter";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kUnsupportedDirection: return "UnsupportedDirection";
    case Errc::kEmptyText: return "EmptyText";
    case Errc::kInputTooLarge: return "InputTooLarge";
    case Errc::kInvalidRequest: return "InvalidRequest";
    case Errc::kStreamTruncated: return "StreamTruncated";
    case Errc::kDeltaAfterDone: return "DeltaAfterDone";
    case Errc::kInvalidWindowPlan: return "InvalidWindowPlan";
    case Errc::kInvalidState: return "InvalidState";
    case Errc::kUnknownBackend: return "UnknownBackend";
    case Errc::kBackendUnavailable: return "BackendUnavailable";
    case Errc::kInvalidBackendResponse: return "InvalidBackendResponse";
    case Errc::kCancelled: return "Cancelled";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kStorageFailure: return "StorageFailure";
    case Errc::kNotFound: return "NotFound";
    case Errc::kUnauthenticated: return "Unauthenticated";
    case Errc::kForbidden: return "Forbidden";
    case Errc::kEmailTaken: return "EmailTaken";
    case Errc::kInvalidCredentials: return "InvalidCredentials";
    case Errc::kInvalidUtf8: return "InvalidUtf8";
  }
  return "Unknown";
}

}  // namespace hanjakit
