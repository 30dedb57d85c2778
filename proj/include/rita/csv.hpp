#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace rita::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Comma-separated records; double-quoted fields may contain commas, line
/// breaks and doubled quotes. Blank lines are skipped. Throws ParseError on
/// an unterminated quote or stray characters after a closing quote.
std::vector<Row> read(std::istream& in);

/// Writes one record, quoting fields only where needed.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace rita::csv
