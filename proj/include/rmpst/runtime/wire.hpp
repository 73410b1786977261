#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmpst/core/value.hpp"

namespace rmpst::rt {

using Bytes = std::vector<std::uint8_t>;

class DeserializationError : public Error {
 public:
  using Error::Error;
};

// big-endian; strings and labels carry a 4-byte length
void put_int(Bytes& out, std::int64_t v);
void put_bool(Bytes& out, bool v);
void put_string(Bytes& out, const std::string& s);

Bytes encode(const Value& v);
Bytes encode_label(const std::string& label);

std::int64_t get_int(std::span<const std::uint8_t> b);
bool get_bool(std::span<const std::uint8_t> b);
std::uint32_t get_length(std::span<const std::uint8_t> b);

/// Decodes exactly one value of the given sort; trailing bytes are an error.
Value decode(BaseType sort, std::span<const std::uint8_t> b);

std::string hex(const Bytes& b);

}  // namespace rmpst::rt
