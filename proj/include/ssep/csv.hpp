#pragma once

#include <concepts>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ssep {

/// Round-trip float formatting: 17 significant digits, '.' decimal separator.
std::string format_double(double v);

/// Minimal CSV emitter: header row first, then one call per row.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((emit(cells, first), first = false), ...);
    os_ << '\n';
  }

 private:
  template <class T>
  void emit(const T& v, bool first) {
    if (!first) os_ << ',';
    if constexpr (std::floating_point<T>) {
      os_ << format_double(v);
    } else {
      os_ << v;
    }
  }

  std::ostream& os_;
};

/// Splits one CSV line on commas (no quoting; the emitted files never need it).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace ssep
