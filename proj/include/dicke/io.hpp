#pragma once

// Deterministic text output: shortest round-trip number formatting and CSV
// files that open with a `# dicke <command> config_hash=<hex>` comment line.

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dicke::io {

/// Shortest decimal string that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_double(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// A CSV cell: number, integer or raw text.
class Cell {
 public:
  Cell(double v) : text_(format_double(v)) {}
  Cell(int v) : text_(std::to_string(v)) {}
  Cell(std::size_t v) : text_(std::to_string(v)) {}
  Cell(bool v) : text_(v ? "1" : "0") {}
  Cell(std::string_view v) : text_(v) {}
  Cell(const char* v) : text_(v) {}
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class CsvWriter {
 public:
  /// Rows are buffered and written by close(), to `path` or to `fallback` when
  /// path is "-" or empty, so a failed run leaves no partial file.
  CsvWriter(const std::string& path, std::ostream& fallback, std::string_view command,
            std::string_view config_hash, const std::vector<std::string>& columns);

  void row(std::initializer_list<Cell> cells);
  void row(const std::vector<Cell>& cells);
  void close();

 private:
  std::ostream* fallback_ = nullptr;
  std::string buffer_;
  std::size_t columns_ = 0;
  std::string path_;
};

}  // namespace dicke::io
