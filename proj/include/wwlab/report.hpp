#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace wwlab {

// One CSV cell. Strings are written verbatim (quoted only when they contain
// a comma, quote, or newline); doubles use 17 significant digits so a
// parse-back reproduces the exact value.
using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void validate() const;
};

// Shortest exact decimal form with up to 17 significant digits, '.' decimal
// separator, locale-independent.
std::string format_double(double value);

// Renders header + rows, LF line endings, trailing newline.
std::string render_csv(const Table& table);

// Writes content to path atomically: temp file in the same directory, then
// rename. Throws std::runtime_error when the path is unwritable.
void write_text_atomic(const std::string& content, const std::filesystem::path& path);

// render_csv + write_text_atomic.
void emit_report(const Table& table, const std::filesystem::path& path);

}  // namespace wwlab
