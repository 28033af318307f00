#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zadr {

enum class Errc {
  NegativeEntry,
  RowSumViolation,
  DegenerateRow,
  EmptyInput,
  ZeroInTransform,
  DomainError,
  NonFiniteObjective,
  SingularDesign,
  InsufficientRows,
  NoZeroFreeRows,
  KindMismatch,
  TooFewSuccessfulReplicates,
  NegativeStat,
  ShapeMismatch,
  SchemaMismatch,
  TernaryRequiresThree,
  InvalidArgument,
  Io,
  Parse,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes so that
/// callers (the CLI in particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace zadr
