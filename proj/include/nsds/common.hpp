#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the CLI on exit code 1.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define NSDS_DEFINE_ERROR(Type, Name)                                  \
  class Type : public Error {                                          \
   public:                                                             \
    explicit Type(const std::string& what) : Error(Name, what) {}      \
  };

NSDS_DEFINE_ERROR(EmptySetError, "EmptySet")
NSDS_DEFINE_ERROR(ModelError, "ModelError")
NSDS_DEFINE_ERROR(DegenerateSurfaceError, "DegenerateSurface")
NSDS_DEFINE_ERROR(NotSlidingError, "NotSliding")
NSDS_DEFINE_ERROR(SingularityError, "Singularity")
NSDS_DEFINE_ERROR(UnsupportedError, "Unsupported")
NSDS_DEFINE_ERROR(DimensionMismatchError, "DimensionMismatch")
NSDS_DEFINE_ERROR(NotLipschitzError, "NotLipschitz")

#undef NSDS_DEFINE_ERROR

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatchError(std::string(what) + ": expected dimension " +
                                 std::to_string(want) + ", got " + std::to_string(got));
  }
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

/// Verbosity from the NSDS_LOG environment variable (off|info|debug or 0-2).
LogLevel log_level();
void log(LogLevel level, const std::string& message);

}  // namespace nsds
