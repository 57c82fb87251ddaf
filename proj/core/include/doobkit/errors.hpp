#pragma once

#include <stdexcept>
#include <string>

namespace doobkit {

// Every failure raised by the library derives from Error and carries a
// kind so that callers (the CLI in particular) can map it to an exit code
// without string matching.
enum class ErrorKind {
  dimension,
  validation,
  domain,
  monotonicity,
  not_submartingale,
  not_martingale,
  consistency,
  malformed_decomposition,
  model,
  resource,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using DimensionError = KindedError<ErrorKind::dimension>;
using ValidationError = KindedError<ErrorKind::validation>;
using DomainError = KindedError<ErrorKind::domain>;
using MonotonicityError = KindedError<ErrorKind::monotonicity>;
using NotSubmartingaleError = KindedError<ErrorKind::not_submartingale>;
using NotMartingaleError = KindedError<ErrorKind::not_martingale>;
using ConsistencyError = KindedError<ErrorKind::consistency>;
using MalformedDecompositionError = KindedError<ErrorKind::malformed_decomposition>;
using ModelError = KindedError<ErrorKind::model>;
using ResourceError = KindedError<ErrorKind::resource>;

}  // namespace doobkit
