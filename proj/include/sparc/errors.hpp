#ifndef SPARC_ERRORS_HPP
#define SPARC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sparc {

// Raised when an exhaustive enumeration would exceed the configured
// codeword budget. Mapped to a distinct CLI exit code.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sparc

#endif  // SPARC_ERRORS_HPP
