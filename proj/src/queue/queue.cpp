#include <qmc/queue/queue.hpp>

#include <chrono>

namespace qmc::queue {

Queue::Queue(std::string name, std::shared_ptr<Clock> clock)
    : name_(std::move(name)), clock_(std::move(clock)) {}

double Queue::push(Message m) {
  std::lock_guard order(push_mutex_);
  TriggerAction action;
  double ts = 0.0;
  {
    std::lock_guard lock(mutex_);
    if (closed_)
      throw QueueClosedError("push to closed queue '" + name_ + "'");
    ts = clock_->now();
    m.enqueue_ts = ts;
    ++pushed_;
    if (triggers_.empty()) {
      pending_.push_back(std::move(m));
      cv_.notify_one();
      return ts;
    }
    action = triggers_[next_trigger_].second;
    next_trigger_ = (next_trigger_ + 1) % triggers_.size();
    ++triggered_;
  }
  action(m);
  return ts;
}

std::optional<Message> Queue::pop(double timeout_s) {
  const double deadline = clock_->now() + timeout_s;
  const auto wall_deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  std::unique_lock lock(mutex_);
  for (;;) {
    if (!pending_.empty()) {
      Message m = std::move(pending_.front());
      pending_.pop_front();
      ++popped_;
      return m;
    }
    if (closed_)
      throw QueueClosedError("pop from closed queue '" + name_ + "'");
    if (pump_) {
      Pump pump = pump_;
      lock.unlock();
      bool progressed = pump(deadline);
      lock.lock();
      if (!progressed && pending_.empty())
        return std::nullopt;
      continue;
    }
    if (timeout_s <= 0.0)
      return std::nullopt;
    if (cv_.wait_until(lock, wall_deadline) == std::cv_status::timeout && pending_.empty()) {
      if (closed_)
        throw QueueClosedError("pop from closed queue '" + name_ + "'");
      return std::nullopt;
    }
  }
}

TriggerId Queue::register_trigger(TriggerAction action) {
  std::lock_guard order(push_mutex_);
  std::deque<Message> backlog;
  TriggerId id = 0;
  {
    std::lock_guard lock(mutex_);
    if (closed_)
      throw QueueClosedError("register trigger on closed queue '" + name_ + "'");
    id = ++trigger_seq_;
    triggers_.emplace_back(id, action);
    // Messages that arrived before any trigger go to the first one.
    backlog.swap(pending_);
    triggered_ += backlog.size();
  }
  for (const auto& m : backlog)
    action(m);
  return id;
}

void Queue::set_pump(Pump pump) {
  std::lock_guard lock(mutex_);
  pump_ = std::move(pump);
}

void Queue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Queue::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::uint64_t Queue::pushed_count() const {
  std::lock_guard lock(mutex_);
  return pushed_;
}

std::uint64_t Queue::delivered_count() const {
  std::lock_guard lock(mutex_);
  return popped_ + triggered_;
}

std::uint64_t Queue::triggered_count() const {
  std::lock_guard lock(mutex_);
  return triggered_;
}

std::uint64_t Queue::pending_count() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

QueueFabric::QueueFabric(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}

QueueHandle QueueFabric::create_queue(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (queues_.contains(name))
    throw DuplicateQueueError("queue '" + name + "' already exists");
  auto q = std::make_shared<Queue>(name, clock_);
  queues_.emplace(name, q);
  return q;
}

QueueHandle QueueFabric::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = queues_.find(name);
  return it == queues_.end() ? nullptr : it->second;
}

void QueueFabric::close_all() {
  std::lock_guard lock(mutex_);
  for (auto& [name, q] : queues_)
    q->close();
}

} // namespace qmc::queue
