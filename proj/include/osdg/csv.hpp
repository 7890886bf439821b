#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace osdg::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields may contain the delimiter, CR/LF and
// doubled quotes. Records end at LF or CRLF outside quotes.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}

  // Returns false at end of input. Throws Error{ParseError} on an
  // unterminated quoted field.
  bool next(Row& row);
  // 1-based line number at which the last returned record started.
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// Picks ',' or '\t' from a header line, whichever occurs outside quotes first.
char sniff_delimiter(std::string_view header_line);

std::string escape_field(std::string_view field, char delimiter = ',');
void write_row(std::ostream& out, const Row& row, char delimiter = ',');

}  // namespace osdg::csv
