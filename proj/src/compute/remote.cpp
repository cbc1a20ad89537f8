#include <qmc/compute/remote.hpp>
#include <qmc/queue/wire.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <thread>

namespace qmc::compute {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Returns bytes read; fewer than `size` means end of stream.
std::size_t read_exact(int fd, std::uint8_t* data, std::size_t size) {
  std::size_t got = 0;
  while (got < size) {
    ssize_t n = ::recv(fd, data + got, size - got, 0);
    if (n == 0)
      break;
    if (n < 0) {
      if (errno == EINTR)
        continue;
      break;
    }
    got += static_cast<std::size_t>(n);
  }
  return got;
}

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive)
    hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  int rc = ::getaddrinfo(host, port.c_str(), &hints, &res);
  if (rc != 0)
    throw RemoteError("cannot resolve " + ep.str() + ": " + ::gai_strerror(rc));
  return res;
}

} // namespace

Endpoint Endpoint::parse(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0)
    throw ConfigError("address '" + addr + "' is not host:port");
  Endpoint ep;
  ep.host = addr.substr(0, colon);
  const std::string port = addr.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || port.empty() || value > 65535)
    throw ConfigError("address '" + addr + "' has an invalid port");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket::~Socket() {
  if (fd_ >= 0)
    ::close(fd_);
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = o.release();
  }
  return *this;
}

void Socket::shutdown_both() {
  if (fd_ >= 0)
    ::shutdown(fd_, SHUT_RDWR);
}

Socket connect_to(const Endpoint& ep) {
  addrinfo* res = resolve(ep, false);
  Socket sock;
  for (addrinfo* it = res; it; it = it->ai_next) {
    Socket s(::socket(it->ai_family, it->ai_socktype, it->ai_protocol));
    if (!s.valid())
      continue;
    if (::connect(s.fd(), it->ai_addr, it->ai_addrlen) == 0) {
      sock = std::move(s);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!sock.valid())
    throw RemoteError("cannot connect to " + ep.str());
  int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return sock;
}

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
  std::size_t sent = 0;
  while (sent < size) {
    ssize_t n = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      throw RemoteError(errno_text("send failed"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void write_frame(int fd, const queue::Message& m) {
  const queue::Bytes frame = queue::encode_frame(m);
  write_all(fd, frame.data(), frame.size());
}

FrameResult read_frame(int fd) {
  FrameResult r;
  std::uint8_t header[4];
  const std::size_t got = read_exact(fd, header, 4);
  if (got == 0) {
    r.status = FrameStatus::closed;
    return r;
  }
  if (got < 4) {
    r.status = FrameStatus::truncated;
    r.detail = "stream ended inside a frame header";
    return r;
  }
  const std::uint32_t length = queue::parse_frame_header(header);
  if (length > queue::max_frame_bytes) {
    r.status = FrameStatus::oversized;
    r.detail = "frame of " + std::to_string(length) + " bytes exceeds the limit";
    return r;
  }
  std::string body(length, '\0');
  if (read_exact(fd, reinterpret_cast<std::uint8_t*>(body.data()), length) < length) {
    r.status = FrameStatus::truncated;
    r.detail = "stream ended inside a frame body";
    return r;
  }
  try {
    r.message = queue::deserialize(body);
    r.status = FrameStatus::ok;
  } catch (const queue::WireFormatError& e) {
    r.status = FrameStatus::malformed;
    r.detail = e.what();
  }
  return r;
}

RemoteWorkerServer::RemoteWorkerServer(std::string listen_addr, std::filesystem::path data_root,
                                       WorkerServerOptions options)
    : listen_addr_(std::move(listen_addr)),
      store_(std::make_shared<store::DiskObjectStore>(std::move(data_root))),
      options_(options),
      evaluator_(std::make_shared<Evaluator>(store_, options.n_quad)) {}

RemoteWorkerServer::~RemoteWorkerServer() { stop(); }

std::uint16_t RemoteWorkerServer::start() {
  const Endpoint ep = Endpoint::parse(listen_addr_);
  addrinfo* res = resolve(ep, true);
  Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  if (!s.valid()) {
    ::freeaddrinfo(res);
    throw RemoteError(errno_text("socket failed"));
  }
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), res->ai_addr, res->ai_addrlen) != 0) {
    ::freeaddrinfo(res);
    throw RemoteError(errno_text(("bind " + listen_addr_ + " failed").c_str()));
  }
  ::freeaddrinfo(res);
  if (::listen(s.fd(), 64) != 0)
    throw RemoteError(errno_text("listen failed"));
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  listener_ = std::move(s);
  return port_;
}

void RemoteWorkerServer::serve() {
  if (!listener_.valid())
    start();
  while (!stopping_) {
    int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR)
        continue;
      if (stopping_)
        break;
      if (errno == EMFILE || errno == ENFILE || errno == ECONNABORTED) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Socket>(fd);
    std::lock_guard lock(mutex_);
    if (stopping_)
      break;
    connections_.push_back(conn);
    handlers_.emplace_back([this, conn] { handle(conn); });
  }

  std::list<std::thread> handlers;
  {
    std::lock_guard lock(mutex_);
    for (auto& c : connections_)
      c->shutdown_both();
    handlers.swap(handlers_);
  }
  for (auto& t : handlers)
    t.join();
}

void RemoteWorkerServer::stop() {
  stopping_ = true;
  listener_.shutdown_both();
  std::lock_guard lock(mutex_);
  for (auto& c : connections_)
    c->shutdown_both();
}

queue::Message RemoteWorkerServer::answer(Evaluator& evaluator, const queue::Message& request,
                                          bool& warm) {
  if (request.kind != queue::MessageKind::likelihood_request)
    return queue::make_error(request.msg_id, "bad_request", "expected a likelihood_request");
  LikelihoodRequest req;
  try {
    req = decode_request(request.payload);
  } catch (const PayloadError& e) {
    return queue::make_error(request.msg_id, "bad_payload", e.what());
  }
  WorkerTask task = make_task(std::move(req), options_.stub_duration_s);

  LikelihoodResponse resp;
  resp.walker_id = task.request.walker_id;
  resp.iteration = task.request.iteration;
  resp.cold = !warm;
  warm = true;
  resp.compute_start_ts = clock_.now();
  try {
    if (task.task_kind == TaskKind::stub && task.stub_duration_s > 0.0)
      std::this_thread::sleep_for(std::chrono::duration<double>(task.stub_duration_s));
    resp.log_likelihood = evaluator.evaluate(task);
  } catch (const DatasetNotFoundError& e) {
    return queue::make_error(request.msg_id, "dataset_not_found", e.what());
  } catch (const std::exception& e) {
    return queue::make_error(request.msg_id, "worker_crash", e.what());
  }
  resp.compute_end_ts = clock_.now();

  queue::Message out;
  out.msg_id = request.msg_id;
  out.kind = queue::MessageKind::likelihood_response;
  out.walker_id = request.walker_id;
  out.iteration = request.iteration;
  out.payload = encode(resp);
  out.enqueue_ts = resp.compute_end_ts;
  out.reply_to = request.reply_to;
  return out;
}

void RemoteWorkerServer::handle(std::shared_ptr<Socket> conn) {
  bool warm = false;
  try {
    for (;;) {
      FrameResult frame = read_frame(conn->fd());
      if (frame.status == FrameStatus::closed)
        break;
      if (frame.status != FrameStatus::ok) {
        write_frame(conn->fd(), queue::make_error("", "malformed_frame", frame.detail));
        break;
      }
      write_frame(conn->fd(), answer(*evaluator_, *frame.message, warm));
    }
  } catch (const std::exception&) {
    // peer went away mid-write
  }
  conn->shutdown_both();
  std::lock_guard lock(mutex_);
  connections_.remove(conn);
}

RemoteClient::RemoteClient(const Endpoint& ep) : socket_(connect_to(ep)) {}

queue::Message RemoteClient::call(const queue::Message& request) {
  write_frame(socket_.fd(), request);
  FrameResult r = read_frame(socket_.fd());
  if (r.status != FrameStatus::ok)
    throw RemoteError(r.status == FrameStatus::closed ? "remote worker closed the connection"
                                                      : "bad frame from remote worker: " + r.detail);
  return std::move(*r.message);
}

} // namespace qmc::compute
