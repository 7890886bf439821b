#include "osdg/csv.hpp"

#include <istream>
#include <ostream>

#include "osdg/error.hpp"

namespace osdg::csv {

bool Reader::next(Row& row) {
  row.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool after_quote = false;
  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted)
        throw Error(ErrorCode::ParseError,
                    "unterminated quoted field starting on line " + std::to_string(record_line_));
      row.push_back(std::move(field));
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == delimiter_) {
      row.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (ch == '\n') {
      ++line_;
      row.push_back(std::move(field));
      return true;
    } else if (ch == '\r') {
      if (in_.peek() == '\n') continue;
      field.push_back(ch);
    } else if (ch == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      // Lenient about stray quotes inside unquoted fields.
      field.push_back(ch);
    }
  }
}

char sniff_delimiter(std::string_view header_line) {
  bool quoted = false;
  for (char ch : header_line) {
    if (ch == '"') quoted = !quoted;
    if (quoted) continue;
    if (ch == ',' || ch == '\t') return ch;
  }
  return ',';
}

std::string escape_field(std::string_view field, char delimiter) {
  bool needs_quotes = field.find_first_of("\"\r\n") != std::string_view::npos ||
                      field.find(delimiter) != std::string_view::npos ||
                      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row, char delimiter) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.put(delimiter);
    out << escape_field(row[i], delimiter);
  }
  out << "\r\n";
}

}  // namespace osdg::csv
