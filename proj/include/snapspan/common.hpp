#pragma once
// Shared plumbing: the error taxonomy that maps onto process exit codes,
// compensated summation for long log-space products, FNV-1a content hashes,
// and shortest round-trip double formatting for reproducible text output.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace snapspan {

// Exit-code contract: 2 = bad configuration, 3 = numerical failure, 4 = I/O.
class error : public std::runtime_error {
public:
  error(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
  int exit_code() const noexcept { return code_; }

private:
  int code_;
};

class config_error : public error {
public:
  explicit config_error(std::string msg) : error(std::move(msg), 2) {}
};

class numeric_error : public error {
public:
  explicit numeric_error(std::string msg) : error(std::move(msg), 3) {}
};

class io_error : public error {
public:
  explicit io_error(std::string msg) : error(std::move(msg), 4) {}
};

// Neumaier variant of Kahan summation. Sums of thousands of log factors
// otherwise drift by enough to disturb the 1e-6 cross-checks.
class CompensatedSum {
public:
  void add(double x) noexcept {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

// Shortest representation that round-trips exactly; keeps CSV/JSON output
// byte-stable across runs and loads back to the identical double.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace snapspan
