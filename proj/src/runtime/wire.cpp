#include "rmpst/runtime/wire.hpp"

#include <cstdio>

namespace rmpst::rt {

void put_int(Bytes& out, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void put_bool(Bytes& out, bool v) { out.push_back(v ? 1 : 0); }

void put_string(Bytes& out, const std::string& s) {
  auto n = static_cast<std::uint32_t>(s.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), s.begin(), s.end());
}

Bytes encode(const Value& v) {
  Bytes out;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) put_int(out, x);
        else if constexpr (std::is_same_v<T, bool>) put_bool(out, x);
        else if constexpr (std::is_same_v<T, std::string>) put_string(out, x);
      },
      v);
  return out;
}

Bytes encode_label(const std::string& label) {
  Bytes out;
  put_string(out, label);
  return out;
}

std::int64_t get_int(std::span<const std::uint8_t> b) {
  if (b.size() != 8) throw DeserializationError("int needs 8 bytes, got " + std::to_string(b.size()));
  std::uint64_t u = 0;
  for (auto c : b) u = (u << 8) | c;
  return static_cast<std::int64_t>(u);
}

bool get_bool(std::span<const std::uint8_t> b) {
  if (b.size() != 1) throw DeserializationError("bool needs 1 byte");
  if (b[0] > 1) throw DeserializationError("bool byte " + std::to_string(b[0]) + " is not 0 or 1");
  return b[0] == 1;
}

std::uint32_t get_length(std::span<const std::uint8_t> b) {
  if (b.size() != 4) throw DeserializationError("length prefix needs 4 bytes");
  std::uint32_t n = 0;
  for (auto c : b) n = (n << 8) | c;
  return n;
}

Value decode(BaseType sort, std::span<const std::uint8_t> b) {
  switch (sort) {
    case BaseType::Unit:
      if (!b.empty()) throw DeserializationError("unit carries no bytes");
      return Unit{};
    case BaseType::Int: return get_int(b);
    case BaseType::Bool: return get_bool(b);
    case BaseType::String: {
      if (b.size() < 4) throw DeserializationError("truncated string");
      auto n = get_length(b.first(4));
      if (b.size() - 4 != n) throw DeserializationError("string length mismatch");
      return std::string(b.begin() + 4, b.end());
    }
  }
  throw DeserializationError("unknown sort");
}

std::string hex(const Bytes& b) {
  std::string out;
  char buf[3];
  for (auto c : b) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    out += buf;
  }
  return out;
}

}  // namespace rmpst::rt
