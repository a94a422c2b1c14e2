#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace fogcache::io {

/// Formats a double with 9 significant digits; NaN becomes "nan".
std::string format_double(double v);

std::string hex64(std::uint64_t v);

/// Comma-separated writer; reals are printed with format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((put(values, first)), ...);
    out_ << '\n';
  }

 private:
  template <typename T>
  void put(const T& v, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      out_ << format_double(static_cast<double>(v));
    } else {
      out_ << v;
    }
  }

  std::ostream& out_;
};

}  // namespace fogcache::io
