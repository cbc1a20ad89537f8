#include <qmc/queue/clock.hpp>

#include <stdexcept>

namespace qmc::queue {

WallClock::WallClock() : origin_(std::chrono::steady_clock::now()) {}

double WallClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

double VirtualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void VirtualClock::advance_to(double t) {
  std::lock_guard lock(mutex_);
  if (t < now_)
    throw std::logic_error("virtual clock cannot move backwards");
  now_ = t;
}

} // namespace qmc::queue
