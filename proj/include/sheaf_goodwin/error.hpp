#ifndef SHEAF_GOODWIN_ERROR_HPP
#define SHEAF_GOODWIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sheaf_goodwin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unknown element id, missing restriction map, or ill-formed order.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Parameter or state outside the domain a model is defined on.
class DomainError : public Error {
public:
  using Error::Error;
};

/// An equation system without an injective choice of solved variable.
class ExplicitnessError : public Error {
public:
  using Error::Error;
};

/// Requested operation needs finite stalks.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// A user-supplied function broke its documented contract.
class ContractError : public Error {
public:
  using Error::Error;
};

/// Integration had to stop: blow-up or a state leaving its domain.
class IntegrationError : public Error {
public:
  IntegrationError(const std::string& what, std::size_t last_valid_index)
      : Error(what), last_valid_index_(last_valid_index) {}

  std::size_t last_valid_index() const noexcept { return last_valid_index_; }

private:
  std::size_t last_valid_index_;
};

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_ERROR_HPP
