#ifndef OCAP_ERROR_HPP
#define OCAP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ocap {

// Invalid parameters, malformed configuration, violated preconditions.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure could not reach its tolerance (bracketing failed,
// iteration cap hit where no feasible fallback exists).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ocap

#endif  // OCAP_ERROR_HPP
