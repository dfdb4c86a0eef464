#ifndef PHASESIM_ERRORS_HPP
#define PHASESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace phasesim {

// Bad user input: malformed config, invariant-violating data, out-of-range
// arguments. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Corrupt or malformed on-disk artifact (trace file, checkpoint blob, CSV).
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failure. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace phasesim

#endif
