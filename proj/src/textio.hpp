#pragma once

// Line-oriented TSV helpers shared by the file readers.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rida/errors.hpp"

namespace rida::detail {

inline std::ifstream open_input(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw NotFoundError("file not found: " + file.string());
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = '\t') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view text, const std::string& file, std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError(file, line_no, "cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

/// Calls fn(fields, line_no) for each line; strips a trailing '\r'.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn, std::size_t first_line_no = 1) {
  std::string line;
  std::size_t line_no = first_line_no - 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split_fields(line), line_no);
  }
}

}  // namespace rida::detail
