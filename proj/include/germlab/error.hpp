#pragma once

#include <stdexcept>
#include <string>

namespace germlab {

/// Error category, mapped to process exit codes by the CLI.
enum class ErrorKind {
  Domain,          // invalid argument for an operation (bad scale, point outside domain, ...)
  Config,          // malformed or inconsistent configuration
  Construction,    // an object failed its construction-time invariants
  NonConvergence,  // an iteration did not reach its tolerance
  Verification,    // a mathematical check that must hold came out false
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_domain(const std::string& msg) { throw Error(ErrorKind::Domain, msg); }
[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void fail_construction(const std::string& msg) {
  throw Error(ErrorKind::Construction, msg);
}

}  // namespace germlab
