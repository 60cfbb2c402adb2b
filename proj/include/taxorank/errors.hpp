#pragma once

#include <stdexcept>
#include <string>

namespace taxorank {

// Every data-level failure raised by the library derives from Error so the
// CLI can map it to a single exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TAXORANK_ERROR(Name)          \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

TAXORANK_ERROR(ParseError);
TAXORANK_ERROR(CycleError);
TAXORANK_ERROR(DanglingEdgeError);
TAXORANK_ERROR(UnknownSynsetError);
TAXORANK_ERROR(PosMismatchError);
TAXORANK_ERROR(EmptyDatasetError);
TAXORANK_ERROR(DimensionMismatchError);
TAXORANK_ERROR(ZeroQueryError);
TAXORANK_ERROR(ConfigError);
TAXORANK_ERROR(SingularSolveError);
TAXORANK_ERROR(NonFiniteLossError);
TAXORANK_ERROR(OutOfBallError);
TAXORANK_ERROR(RankError);
TAXORANK_ERROR(MissError);
TAXORANK_ERROR(InsufficientDataError);
TAXORANK_ERROR(DegenerateDataError);
TAXORANK_ERROR(SchemaMismatchError);
TAXORANK_ERROR(DuplicatePredictionError);
TAXORANK_ERROR(EmptyGoldError);

#undef TAXORANK_ERROR

}  // namespace taxorank
