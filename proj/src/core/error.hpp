#pragma once

#include <stdexcept>
#include <string>

namespace flores {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Format = 3,
  Diverged = 4,
  Runtime = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}
[[noreturn]] inline void throw_io(const std::string& what) { throw Error(ErrorCode::Io, what); }
[[noreturn]] inline void throw_format(const std::string& what) {
  throw Error(ErrorCode::Format, what);
}

}  // namespace flores
