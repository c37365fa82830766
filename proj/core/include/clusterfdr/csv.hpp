#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clusterfdr::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
std::vector<Record> parse(std::istream& in);
std::vector<Record> read_file(const std::filesystem::path& path);

// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// 17 significant digits; round-trips every finite double.
std::string format_double(double value);

// Column lookup over a header record. Throws Schema naming the column.
class Header {
 public:
  explicit Header(const Record& header);

  std::size_t require(std::string_view column) const;
  std::optional<std::size_t> find(std::string_view column) const;

 private:
  std::map<std::string, std::size_t, std::less<>> columns_;
};

// Field conversions; failures throw Schema with the line number.
double parse_double(const Record& rec, std::size_t col, std::string_view name);
long long parse_int(const Record& rec, std::size_t col, std::string_view name);
bool parse_bool(const Record& rec, std::size_t col, std::string_view name);

}  // namespace clusterfdr::csv
