#include "wwlab/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace wwlab {

void Table::validate() const {
  if (columns.empty()) throw std::invalid_argument("Table: no columns");
  for (const auto& c : columns) {
    if (c.empty()) throw std::invalid_argument("Table: empty column name");
  }
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw std::invalid_argument("Table: row width does not match header");
    }
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), *i);
    return std::string(buf, res.ptr);
  }
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string render_csv(const Table& table) {
  table.validate();
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::string& content, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw std::runtime_error("cannot open for writing: " + tmp.string());
    stream.write(content.data(), static_cast<std::streamsize>(content.size()));
    stream.flush();
    if (!stream) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot replace " + path.string() + ": " + ec.message());
  }
}

void emit_report(const Table& table, const std::filesystem::path& path) {
  write_text_atomic(render_csv(table), path);
}

}  // namespace wwlab
