#pragma once

#include <chrono>
#include <mutex>

namespace qmc::queue {

/// Time source shared by queues and backends. Values are seconds relative to
/// the clock's own origin.
class Clock {
public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual bool is_virtual() const { return false; }
};

class WallClock final : public Clock {
public:
  WallClock();
  double now() const override;

private:
  std::chrono::steady_clock::time_point origin_;
};

/// Discrete-event time. Only moves forward, and only when told to.
class VirtualClock final : public Clock {
public:
  explicit VirtualClock(double start = 0.0) : now_(start) {}

  double now() const override;
  bool is_virtual() const override { return true; }

  // Throws std::logic_error when t < now().
  void advance_to(double t);

private:
  mutable std::mutex mutex_;
  double now_;
};

} // namespace qmc::queue
