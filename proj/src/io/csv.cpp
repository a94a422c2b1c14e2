#include "fogcache/io/csv.hpp"

#include <cmath>
#include <cstdio>

namespace fogcache::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  bool first = true;
  for (const auto n : names) {
    if (!first) out_ << ',';
    first = false;
    out_ << n;
  }
  out_ << '\n';
}

}  // namespace fogcache::io
