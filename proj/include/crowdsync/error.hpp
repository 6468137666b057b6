#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crowdsync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the loop gain A*B sits on the singular point 1.
class SingularityError : public Error {
 public:
  explicit SingularityError(double ab);
  double ab() const noexcept { return ab_; }

 private:
  double ab_;
};

/// Input is well-formed but the quantity is undefined for it
/// (no state distinction, zero denominator, all-constant panel).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// One or more invariant violations, all collected before throwing.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace crowdsync
