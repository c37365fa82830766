#include "clusterfdr/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clusterfdr/error.hpp"

namespace clusterfdr::csv {

std::vector<Record> parse(std::istream& in) {
  std::vector<Record> records;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool end_of_record = false;
    while (i < n && !end_of_record) {
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          ++line;
          ++i;
          end_of_record = true;
          break;
        default:
          field.push_back(c);
          ++i;
      }
    }
    if (in_quotes) {
      throw Error(ErrorKind::Schema,
                  "line " + std::to_string(rec.line) + ": unterminated quoted field");
    }
    rec.fields.push_back(std::move(field));
    // blank lines carry no record
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Record> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse(in);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Header::Header(const Record& header) {
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    columns_.emplace(header.fields[i], i);
  }
}

std::size_t Header::require(std::string_view column) const {
  auto it = columns_.find(column);
  if (it == columns_.end()) {
    throw Error(ErrorKind::Schema, "line 1: missing required column '" + std::string(column) + "'");
  }
  return it->second;
}

std::optional<std::size_t> Header::find(std::string_view column) const {
  auto it = columns_.find(column);
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

namespace {

const std::string& field_at(const Record& rec, std::size_t col, std::string_view name) {
  if (col >= rec.fields.size()) {
    throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": missing value for '" +
                                       std::string(name) + "'");
  }
  return rec.fields[col];
}

[[noreturn]] void bad_value(const Record& rec, std::string_view name, const std::string& text) {
  throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": invalid value '" + text +
                                     "' for '" + std::string(name) + "'");
}

}  // namespace

double parse_double(const Record& rec, std::size_t col, std::string_view name) {
  const std::string& text = field_at(rec, col, name);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad_value(rec, name, text);
  }
  return value;
}

long long parse_int(const Record& rec, std::size_t col, std::string_view name) {
  const std::string& text = field_at(rec, col, name);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad_value(rec, name, text);
  }
  return value;
}

bool parse_bool(const Record& rec, std::size_t col, std::string_view name) {
  const std::string& text = field_at(rec, col, name);
  if (text == "true") return true;
  if (text == "false") return false;
  bad_value(rec, name, text);
}

}  // namespace clusterfdr::csv
