#include "dicke/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "dicke/core.hpp"

namespace dicke::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // drops the sign of -0
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

CsvWriter::CsvWriter(const std::string& path, std::ostream& fallback, std::string_view command,
                     std::string_view config_hash, const std::vector<std::string>& columns)
    : fallback_(&fallback), columns_(columns.size()), path_(path) {
  buffer_ += "# dicke ";
  buffer_ += command;
  buffer_ += " config_hash=";
  buffer_ += config_hash;
  buffer_ += '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("csv row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i].text();
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (path_.empty() || path_ == "-") {
    *fallback_ << buffer_;
    fallback_->flush();
    return;
  }
  std::ofstream file(path_, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidArgument("cannot open output file '" + path_ + "'");
  file << buffer_;
  file.close();
  if (file.fail()) throw InvalidArgument("failed writing '" + path_ + "'");
}

}  // namespace dicke::io
