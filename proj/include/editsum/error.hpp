#pragma once

#include <stdexcept>
#include <string>

namespace editsum {

// Base of every error thrown by the library. `DataError` covers malformed or
// inconsistent inputs (exit code 2 at the CLI); `UsageError` covers bad
// invocations (exit code 1).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
  public:
    using Error::Error;
};

class UsageError : public Error {
  public:
    using Error::Error;
};

#define EDITSUM_DECLARE_ERROR(Name, Base)                                     \
    class Name : public Base {                                                \
      public:                                                                 \
        using Base::Base;                                                     \
    }

EDITSUM_DECLARE_ERROR(ShapeMismatch, Error);
EDITSUM_DECLARE_ERROR(NotScalar, Error);
EDITSUM_DECLARE_ERROR(IndexOutOfVocab, DataError);
EDITSUM_DECLARE_ERROR(EmptyCorpus, DataError);
EDITSUM_DECLARE_ERROR(EmptyIndex, DataError);
EDITSUM_DECLARE_ERROR(UnknownDoc, DataError);
EDITSUM_DECLARE_ERROR(EmptyPrototype, DataError);
EDITSUM_DECLARE_ERROR(EmptyDataset, DataError);
EDITSUM_DECLARE_ERROR(NonFiniteLoss, Error);
EDITSUM_DECLARE_ERROR(VersionMismatch, DataError);
EDITSUM_DECLARE_ERROR(CorruptFile, DataError);
EDITSUM_DECLARE_ERROR(LengthMismatch, DataError);

#undef EDITSUM_DECLARE_ERROR

} // namespace editsum
