#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rmpst/core/types.hpp"
#include "rmpst/runtime/wire.hpp"

namespace rmpst::rt {

enum class RuntimeErrorKind { RefinementFailed, UnknownLabel, PeerClosed, Deserialization };

std::string_view to_string(RuntimeErrorKind k);

class RuntimeViolation : public Error {
 public:
  RuntimeViolation(RuntimeErrorKind kind, const std::string& message, int state = -1,
                   std::string predicate = {}, std::string snapshot = {});

  RuntimeErrorKind kind() const { return kind_; }
  int state() const { return state_; }
  const std::string& predicate() const { return predicate_; }
  const std::string& snapshot() const { return snapshot_; }

 private:
  RuntimeErrorKind kind_;
  int state_;
  std::string predicate_;
  std::string snapshot_;
};

struct Event {
  std::uint64_t seq = 0;
  Role observer;
  Dir dir = Dir::Send;
  Role from;
  Role to;
  std::string label;
  Value value;
};

std::string to_string(const Event& e);

/// Shared by every endpoint of a session; thread-safe.
class TransportLog {
 public:
  void record(Event e);
  std::vector<Event> events() const;
  /// Events seen by one role, in its own order.
  std::vector<Event> of(const Role& r) const;
  std::size_t sends() const;

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  std::uint64_t next_ = 0;
};

/// Per-sort send/recv primitives over a byte transport. Labels travel as strings.
class Connection {
 public:
  virtual ~Connection() = default;

  void send_int(const Role& peer, std::int64_t v);
  void send_bool(const Role& peer, bool v);
  void send_string(const Role& peer, const std::string& v);
  void send_unit(const Role& peer);
  std::int64_t recv_int(const Role& peer);
  bool recv_bool(const Role& peer);
  std::string recv_string(const Role& peer);
  void recv_unit(const Role& peer);

  void send_value(const Role& peer, const Value& v);
  Value recv_value(const Role& peer, BaseType sort);

  // label followed by payload, logged as one message
  void send_message(const Role& peer, const std::string& label, const Value& v);
  std::string recv_label(const Role& peer);
  Value recv_payload(const Role& peer, const std::string& label, BaseType sort);

  void observe(TransportLog* log, Role self) {
    log_ = log;
    self_ = std::move(self);
  }

  virtual void close() {}

 protected:
  virtual void write(const Role& peer, const Bytes& b) = 0;
  virtual void read(const Role& peer, std::uint8_t* dst, std::size_t n) = 0;

 private:
  TransportLog* log_ = nullptr;
  Role self_;
};

/// Bounded in-process FIFOs, one per ordered pair of roles.
class MemoryNetwork : public std::enable_shared_from_this<MemoryNetwork> {
 public:
  static std::shared_ptr<MemoryNetwork> create(std::size_t capacity = 1 << 16,
                                               std::chrono::milliseconds timeout = std::chrono::seconds(10));

  std::unique_ptr<Connection> connect(const Role& self);
  /// Wakes readers and writers blocked on any channel touching r.
  void close(const Role& r);

 private:
  friend class MemoryConnection;
  struct Channel {
    std::deque<std::uint8_t> buf;
    bool closed = false;
  };
  MemoryNetwork(std::size_t capacity, std::chrono::milliseconds timeout)
      : capacity_(capacity), timeout_(timeout) {}
  Channel& channel(const Role& from, const Role& to);

  std::size_t capacity_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::pair<std::string, std::string>, Channel> channels_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TcpConnection : public Connection {
 public:
  /// Role i listens on base_port + i and accepts the higher-indexed roles;
  /// it connects to every lower-indexed one. Each connection starts with the
  /// connecting role's name.
  static std::unique_ptr<TcpConnection> establish(const Role& self, const std::vector<Role>& roles,
                                                  const std::string& host, std::uint16_t base_port,
                                                  std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~TcpConnection() override;
  void close() override;

 protected:
  void write(const Role& peer, const Bytes& b) override;
  void read(const Role& peer, std::uint8_t* dst, std::size_t n) override;

 private:
  explicit TcpConnection(std::chrono::milliseconds timeout) : timeout_(timeout) {}
  int fd(const Role& peer) const;

  std::chrono::milliseconds timeout_;
  std::map<std::string, int> fds_;
};

}  // namespace rmpst::rt
