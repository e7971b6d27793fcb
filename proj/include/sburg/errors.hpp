#pragma once

#include <stdexcept>
#include <string>

namespace sburg {

// Magnitude limit beyond which a trajectory is declared blown up.
inline constexpr double kBlowupLimit = 1e9;

/// Thrown when a trajectory produces a non-finite state or exceeds
/// kBlowupLimit in magnitude; carries the trajectory time reached.
class BlowupError : public std::runtime_error {
 public:
  explicit BlowupError(double time)
      : std::runtime_error("trajectory blew up at t=" + std::to_string(time)),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace sburg
