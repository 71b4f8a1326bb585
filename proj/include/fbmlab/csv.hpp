#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fbmlab::csv {

/// Serialize a double with 17 significant digits so the decimal form
/// round-trips exactly.
inline std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Cell = std::variant<std::string, double, long long, unsigned long long>;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void row(std::initializer_list<Cell> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << ',';
      first = false;
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::string>)
              out_ << v;
            else if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
              out_ << format(v);
            else
              out_ << v;
          },
          c);
    }
    out_ << "\n";
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

}  // namespace fbmlab::csv
