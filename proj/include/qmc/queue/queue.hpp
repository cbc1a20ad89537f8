#pragma once

#include <qmc/queue/clock.hpp>
#include <qmc/queue/message.hpp>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::queue {

class QueueError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DuplicateQueueError : public QueueError {
public:
  using QueueError::QueueError;
};

class QueueClosedError : public QueueError {
public:
  using QueueError::QueueError;
};

using TriggerAction = std::function<void(const Message&)>;
using TriggerId = std::uint64_t;

/// Called by pop() on an empty queue before giving up. Returns false when it
/// cannot produce anything up to `deadline`; otherwise it is expected to have
/// pushed at least one message or advanced time.
using Pump = std::function<bool(double deadline)>;

/// FIFO queue. With a trigger registered, pushed messages bypass the pending
/// list and go to the trigger (round-robin across triggers). Triggers are
/// invoked on the pushing thread, serialized per queue so they observe
/// enqueue order.
class Queue {
public:
  Queue(std::string name, std::shared_ptr<Clock> clock);

  Queue(const Queue&) = delete;
  Queue& operator=(const Queue&) = delete;

  const std::string& name() const { return name_; }

  // Returns the stamped enqueue_ts.
  double push(Message m);

  // std::nullopt is the timeout signal.
  std::optional<Message> pop(double timeout_s);

  TriggerId register_trigger(TriggerAction action);

  void set_pump(Pump pump);

  void close();
  bool closed() const;

  std::uint64_t pushed_count() const;
  std::uint64_t delivered_count() const;
  std::uint64_t triggered_count() const;
  std::uint64_t pending_count() const;

private:
  std::string name_;
  std::shared_ptr<Clock> clock_;

  std::mutex push_mutex_; // orders stamping and trigger delivery
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Message> pending_;
  std::vector<std::pair<TriggerId, TriggerAction>> triggers_;
  std::size_t next_trigger_ = 0;
  TriggerId trigger_seq_ = 0;
  Pump pump_;
  bool closed_ = false;
  std::uint64_t pushed_ = 0;
  std::uint64_t popped_ = 0;
  std::uint64_t triggered_ = 0;
};

using QueueHandle = std::shared_ptr<Queue>;

/// Named queues sharing one clock.
class QueueFabric {
public:
  explicit QueueFabric(std::shared_ptr<Clock> clock);

  QueueHandle create_queue(const std::string& name);
  QueueHandle find(const std::string& name) const;

  const std::shared_ptr<Clock>& clock() const { return clock_; }

  void close_all();

private:
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mutex_;
  std::map<std::string, QueueHandle> queues_;
};

} // namespace qmc::queue
