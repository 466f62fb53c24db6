#ifndef RELSIFTER_UTIL_HPP
#define RELSIFTER_UTIL_HPP

#include <string>
#include <string_view>
#include <vector>

namespace relsifter {

// Splits on '\t'. Empty fields are preserved.
std::vector<std::string_view> split_tabs(std::string_view line);

// Strips a trailing '\r' (CRLF input).
std::string_view strip_cr(std::string_view line);

// Shortest-ish decimal forms. fmt_g is for human-facing tables (12
// significant digits); fmt_exact round-trips any finite double.
std::string fmt_g(double x);
std::string fmt_exact(double x);

// Whole file as lines (without terminators). Throws io_error.
std::vector<std::string> read_lines(const std::string& path);

// Whole file as one string. Throws io_error.
std::string read_file(const std::string& path);

// Atomic-ish write: writes then renames would need same-fs temp handling;
// plain truncate+write is enough here. Throws io_error.
void write_file(const std::string& path, const std::string& content);

// TSV field escaping for free text: \t, \n, \r, \\.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

}  // namespace relsifter

#endif
