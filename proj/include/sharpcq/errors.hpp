#pragma once

#include <stdexcept>
#include <string>

namespace sharpcq {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map categories onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

#define SHARPCQ_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

SHARPCQ_DEFINE_ERROR(ArityMismatch);
SHARPCQ_DEFINE_ERROR(FreeVarNotInBody);
SHARPCQ_DEFINE_ERROR(UnknownVariable);
SHARPCQ_DEFINE_ERROR(MissingRelation);
SHARPCQ_DEFINE_ERROR(InvalidQuery);
SHARPCQ_DEFINE_ERROR(InvalidWidth);
SHARPCQ_DEFINE_ERROR(InvalidSelection);
SHARPCQ_DEFINE_ERROR(WidthAssumptionViolated);
SHARPCQ_DEFINE_ERROR(IncompatibleDecomposition);
SHARPCQ_DEFINE_ERROR(IncompleteDecomposition);
SHARPCQ_DEFINE_ERROR(InvalidHybridDecomposition);
SHARPCQ_DEFINE_ERROR(UncoveredEdge);
SHARPCQ_DEFINE_ERROR(FrontierNotCovered);
SHARPCQ_DEFINE_ERROR(NoDecompositionWithinBudget);
SHARPCQ_DEFINE_ERROR(StateCapExceeded);
SHARPCQ_DEFINE_ERROR(SearchBudgetExceeded);

#undef SHARPCQ_DEFINE_ERROR

}  // namespace sharpcq
