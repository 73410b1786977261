#include "rmpst/runtime/connection.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "rmpst/core/print.hpp"

namespace rmpst::rt {

std::string_view to_string(RuntimeErrorKind k) {
  switch (k) {
    case RuntimeErrorKind::RefinementFailed: return "RefinementFailed";
    case RuntimeErrorKind::UnknownLabel: return "UnknownLabel";
    case RuntimeErrorKind::PeerClosed: return "PeerClosed";
    case RuntimeErrorKind::Deserialization: return "Deserialization";
  }
  return "?";
}

RuntimeViolation::RuntimeViolation(RuntimeErrorKind kind, const std::string& message, int state,
                                   std::string predicate, std::string snapshot)
    : Error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      state_(state),
      predicate_(std::move(predicate)),
      snapshot_(std::move(snapshot)) {}

std::string to_string(const Event& e) {
  return e.observer.name + (e.dir == Dir::Send ? " sent " : " received ") + e.from.name + "->" +
         e.to.name + ":" + e.label + "(" + rmpst::to_string(e.value) + ")";
}

void TransportLog::record(Event e) {
  std::lock_guard lock(mu_);
  e.seq = next_++;
  events_.push_back(std::move(e));
}

std::vector<Event> TransportLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<Event> TransportLog::of(const Role& r) const {
  std::lock_guard lock(mu_);
  std::vector<Event> out;
  for (const auto& e : events_)
    if (e.observer == r) out.push_back(e);
  return out;
}

std::size_t TransportLog::sends() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& e : events_) n += e.dir == Dir::Send;
  return n;
}

// ------------------------------------------------------------- primitives

void Connection::send_int(const Role& peer, std::int64_t v) {
  Bytes b;
  put_int(b, v);
  write(peer, b);
}

void Connection::send_bool(const Role& peer, bool v) { write(peer, Bytes{static_cast<std::uint8_t>(v)}); }

void Connection::send_string(const Role& peer, const std::string& v) {
  Bytes b;
  put_string(b, v);
  write(peer, b);
}

void Connection::send_unit(const Role&) {}

std::int64_t Connection::recv_int(const Role& peer) {
  std::uint8_t b[8];
  read(peer, b, 8);
  return get_int(b);
}

bool Connection::recv_bool(const Role& peer) {
  std::uint8_t b[1];
  read(peer, b, 1);
  try {
    return get_bool(b);
  } catch (const DeserializationError& e) {
    throw RuntimeViolation(RuntimeErrorKind::Deserialization, e.what());
  }
}

std::string Connection::recv_string(const Role& peer) {
  std::uint8_t len[4];
  read(peer, len, 4);
  auto n = get_length(len);
  if (n > (1u << 26)) throw RuntimeViolation(RuntimeErrorKind::Deserialization, "string of " + std::to_string(n) + " bytes");
  std::string s(n, '\0');
  if (n) read(peer, reinterpret_cast<std::uint8_t*>(s.data()), n);
  return s;
}

void Connection::recv_unit(const Role&) {}

void Connection::send_value(const Role& peer, const Value& v) { write(peer, encode(v)); }

Value Connection::recv_value(const Role& peer, BaseType sort) {
  switch (sort) {
    case BaseType::Unit: return Unit{};
    case BaseType::Int: return recv_int(peer);
    case BaseType::Bool: return recv_bool(peer);
    case BaseType::String: return recv_string(peer);
  }
  return Unit{};
}

void Connection::send_message(const Role& peer, const std::string& label, const Value& v) {
  Bytes b = encode_label(label);
  auto payload = encode(v);
  b.insert(b.end(), payload.begin(), payload.end());
  if (log_) log_->record(Event{0, self_, Dir::Send, self_, peer, label, v});
  write(peer, b);
}

std::string Connection::recv_label(const Role& peer) { return recv_string(peer); }

Value Connection::recv_payload(const Role& peer, const std::string& label, BaseType sort) {
  auto v = recv_value(peer, sort);
  if (log_) log_->record(Event{0, self_, Dir::Recv, peer, self_, label, v});
  return v;
}

// ---------------------------------------------------------------- memory

std::shared_ptr<MemoryNetwork> MemoryNetwork::create(std::size_t capacity, std::chrono::milliseconds timeout) {
  return std::shared_ptr<MemoryNetwork>(new MemoryNetwork(capacity, timeout));
}

MemoryNetwork::Channel& MemoryNetwork::channel(const Role& from, const Role& to) {
  return channels_[{from.name, to.name}];
}

void MemoryNetwork::close(const Role& r) {
  std::lock_guard lock(mu_);
  for (auto& [key, ch] : channels_)
    if (key.first == r.name || key.second == r.name) ch.closed = true;
  cv_.notify_all();
}

class MemoryConnection : public Connection {
 public:
  MemoryConnection(std::shared_ptr<MemoryNetwork> net, Role self) : net_(std::move(net)), self_(std::move(self)) {}

  void close() override { net_->close(self_); }

 protected:
  void write(const Role& peer, const Bytes& b) override {
    std::unique_lock lock(net_->mu_);
    auto& ch = net_->channel(self_, peer);
    for (auto c : b) {
      bool ok = net_->cv_.wait_for(lock, net_->timeout_,
                                   [&] { return ch.closed || ch.buf.size() < net_->capacity_; });
      if (ch.closed) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "channel to " + peer.name + " closed");
      if (!ok) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "timed out writing to " + peer.name);
      ch.buf.push_back(c);
      net_->cv_.notify_all();
    }
  }

  void read(const Role& peer, std::uint8_t* dst, std::size_t n) override {
    std::unique_lock lock(net_->mu_);
    auto& ch = net_->channel(peer, self_);
    for (std::size_t i = 0; i < n; ++i) {
      bool ok = net_->cv_.wait_for(lock, net_->timeout_, [&] { return ch.closed || !ch.buf.empty(); });
      if (ch.buf.empty()) {
        if (ch.closed) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, peer.name + " closed the channel");
        if (!ok) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "timed out reading from " + peer.name);
      }
      dst[i] = ch.buf.front();
      ch.buf.pop_front();
      net_->cv_.notify_all();
    }
  }

 private:
  std::shared_ptr<MemoryNetwork> net_;
  Role self_;
};

std::unique_ptr<Connection> MemoryNetwork::connect(const Role& self) {
  return std::make_unique<MemoryConnection>(shared_from_this(), self);
}

// ------------------------------------------------------------------- tcp

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n) {
    auto w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw RuntimeViolation(RuntimeErrorKind::PeerClosed, std::string("send failed: ") + std::strerror(errno));
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

void read_all(int fd, std::uint8_t* p, std::size_t n, std::chrono::milliseconds timeout) {
  while (n) {
    pollfd pfd{fd, POLLIN, 0};
    int r = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw RuntimeViolation(RuntimeErrorKind::PeerClosed, std::string("poll failed: ") + std::strerror(errno));
    }
    if (r == 0) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "read timed out");
    auto got = ::recv(fd, p, n, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw RuntimeViolation(RuntimeErrorKind::PeerClosed, std::string("recv failed: ") + std::strerror(errno));
    }
    if (got == 0) throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "peer closed the connection");
    p += got;
    n -= static_cast<std::size_t>(got);
  }
}

void tune(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res); rc != 0)
    throw TransportError("cannot resolve " + host + ": " + gai_strerror(rc));
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(port);
  return addr;
}

}  // namespace

std::unique_ptr<TcpConnection> TcpConnection::establish(const Role& self, const std::vector<Role>& roles,
                                                        const std::string& host, std::uint16_t base_port,
                                                        std::chrono::milliseconds timeout) {
  std::size_t me = roles.size();
  for (std::size_t i = 0; i < roles.size(); ++i)
    if (roles[i] == self) me = i;
  if (me == roles.size()) throw TransportError("role " + self.name + " not among the session roles");

  std::unique_ptr<TcpConnection> conn(new TcpConnection(timeout));
  auto deadline = std::chrono::steady_clock::now() + timeout;

  int listener = -1;
  if (me + 1 < roles.size()) {
    listener = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listener < 0) sys_fail("socket");
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    auto addr = resolve(host, static_cast<std::uint16_t>(base_port + me));
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
      ::close(listener);
      sys_fail("bind port " + std::to_string(base_port + me));
    }
    if (::listen(listener, static_cast<int>(roles.size())) < 0) {
      ::close(listener);
      sys_fail("listen");
    }
  }

  try {
    for (std::size_t j = 0; j < me; ++j) {
      auto addr = resolve(host, static_cast<std::uint16_t>(base_port + j));
      for (;;) {
        int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd < 0) sys_fail("socket");
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
          tune(fd);
          conn->fds_[roles[j].name] = fd;
          Bytes hello;
          put_string(hello, self.name);
          write_all(fd, hello.data(), hello.size());
          break;
        }
        int err = errno;
        ::close(fd);
        if ((err != ECONNREFUSED && err != EINTR) || std::chrono::steady_clock::now() > deadline) {
          errno = err;
          sys_fail("connect to " + roles[j].name);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
    for (std::size_t k = me + 1; k < roles.size(); ++k) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      pollfd pfd{listener, POLLIN, 0};
      if (left.count() <= 0 || ::poll(&pfd, 1, static_cast<int>(left.count())) <= 0)
        throw TransportError("timed out waiting for peers of " + self.name);
      int fd = ::accept4(listener, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) sys_fail("accept");
      tune(fd);
      std::uint8_t len[4];
      read_all(fd, len, 4, timeout);
      std::string name(get_length(len), '\0');
      read_all(fd, reinterpret_cast<std::uint8_t*>(name.data()), name.size(), timeout);
      bool known = false;
      for (std::size_t i = me + 1; i < roles.size(); ++i) known |= roles[i].name == name;
      if (!known || conn->fds_.count(name)) {
        ::close(fd);
        throw TransportError("unexpected peer '" + name + "'");
      }
      conn->fds_[name] = fd;
    }
  } catch (...) {
    if (listener >= 0) ::close(listener);
    throw;
  }
  if (listener >= 0) ::close(listener);
  return conn;
}

TcpConnection::~TcpConnection() { close(); }

void TcpConnection::close() {
  for (auto& [name, fd] : fds_)
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
      fd = -1;
    }
}

int TcpConnection::fd(const Role& peer) const {
  auto it = fds_.find(peer.name);
  if (it == fds_.end() || it->second < 0)
    throw RuntimeViolation(RuntimeErrorKind::PeerClosed, "no connection to " + peer.name);
  return it->second;
}

void TcpConnection::write(const Role& peer, const Bytes& b) { write_all(fd(peer), b.data(), b.size()); }

void TcpConnection::read(const Role& peer, std::uint8_t* dst, std::size_t n) { read_all(fd(peer), dst, n, timeout_); }

}  // namespace rmpst::rt
