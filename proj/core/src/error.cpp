#include "zadr/error.hpp"

namespace zadr {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::RowSumViolation: return "RowSumViolation";
    case Errc::DegenerateRow: return "DegenerateRow";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ZeroInTransform: return "ZeroInTransform";
    case Errc::DomainError: return "DomainError";
    case Errc::NonFiniteObjective: return "NonFiniteObjective";
    case Errc::SingularDesign: return "SingularDesign";
    case Errc::InsufficientRows: return "InsufficientRows";
    case Errc::NoZeroFreeRows: return "NoZeroFreeRows";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::TooFewSuccessfulReplicates: return "TooFewSuccessfulReplicates";
    case Errc::NegativeStat: return "NegativeStat";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::TernaryRequiresThree: return "TernaryRequiresThree";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace zadr
