#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace mirroropt::detail {

class Fnv1a {
 public:
  void add(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ull;
    }
  }
  void add_double(double v) { add(&v, sizeof v); }
  void add_u64(std::uint64_t v) { add(&v, sizeof v); }
  void add_str(const std::string& s) { add(s.data(), s.size()); }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return std::string(buf);
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

}  // namespace mirroropt::detail
