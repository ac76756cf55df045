#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace gerk {

/// Incremental 64-bit FNV-1a.
class Fnv1a {
 public:
  void add(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h_ ^= bytes[i];
      h_ *= 1099511628211ULL;
    }
  }
  template <typename T>
  void add(std::span<const T> values) {
    add(values.data(), values.size_bytes());
  }
  template <typename T>
  void add_value(const T& value) {
    add(&value, sizeof(T));
  }
  void add(std::string_view s) { add(s.data(), s.size()); }

  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace gerk
