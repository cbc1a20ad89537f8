#pragma once

// Remote worker protocol: a byte stream of frames, each a 4-byte big-endian
// length followed by one serialized queue message. Requests carry a
// likelihood_request payload; every request frame is answered by either a
// likelihood_response or a control frame "ERR:<code>:<detail>". A malformed
// or truncated frame is answered with an error frame and the connection is
// closed.

#include <qmc/compute/evaluator.hpp>
#include <qmc/queue/clock.hpp>
#include <qmc/queue/message.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace qmc::compute {

class RemoteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  /// "host:port"; throws ConfigError.
  static Endpoint parse(const std::string& addr);
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// RAII socket descriptor.
class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void shutdown_both();

private:
  int fd_ = -1;
};

Socket connect_to(const Endpoint& ep);

void write_all(int fd, const std::uint8_t* data, std::size_t size);
void write_frame(int fd, const queue::Message& m);

enum class FrameStatus { ok, closed, truncated, oversized, malformed };

struct FrameResult {
  FrameStatus status = FrameStatus::closed;
  std::optional<queue::Message> message;
  std::string detail;
};

/// Reads one frame. `closed` means a clean end of stream at a frame boundary.
FrameResult read_frame(int fd);

struct WorkerServerOptions {
  int n_quad = kernel::default_n_quad;
  double stub_duration_s = 0.0;
};

class RemoteWorkerServer {
public:
  RemoteWorkerServer(std::string listen_addr, std::filesystem::path data_root,
                     WorkerServerOptions options = {});
  ~RemoteWorkerServer();

  RemoteWorkerServer(const RemoteWorkerServer&) = delete;
  RemoteWorkerServer& operator=(const RemoteWorkerServer&) = delete;

  /// Binds and listens; returns the bound port (useful with port 0).
  std::uint16_t start();

  /// Accept loop; returns after stop().
  void serve();

  void stop();

  std::uint16_t port() const { return port_; }

private:
  void handle(std::shared_ptr<Socket> conn);
  queue::Message answer(Evaluator& evaluator, const queue::Message& request, bool& warm);

  std::string listen_addr_;
  std::shared_ptr<const store::ObjectStore> store_;
  WorkerServerOptions options_;
  queue::WallClock clock_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::list<std::shared_ptr<Socket>> connections_;
  std::list<std::thread> handlers_;
  std::shared_ptr<Evaluator> evaluator_;
};

/// Blocking request/response client over one connection.
class RemoteClient {
public:
  explicit RemoteClient(const Endpoint& ep);

  /// Throws RemoteError when the connection fails or closes.
  queue::Message call(const queue::Message& request);

private:
  Socket socket_;
};

} // namespace qmc::compute
