#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace how::csv {

// RFC-4180 record reader. Quoted fields may contain commas, doubled quotes,
// and line breaks. Tracks the physical line each record starts on so parse
// errors can name it.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next record into `fields`. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  // 1-based line number of the record returned by the last next() call.
  long record_line() const { return record_line_; }

 private:
  std::istream& in_;
  long line_ = 1;
  long record_line_ = 0;
};

// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

// Appends one CSV record (with trailing '\n') to `out`.
void append_row(std::string& out, const std::vector<std::string>& fields);

}  // namespace how::csv
