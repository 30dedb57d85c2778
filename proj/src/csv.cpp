#include "rita/csv.hpp"

#include <iterator>

#include "rita/error.hpp"

namespace rita::csv {

std::vector<Row> read(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<Row> rows;

  std::size_t line = 1;
  std::size_t i = 0;
  // Skip a UTF-8 byte order mark.
  if (data.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

  while (i < data.size()) {
    if (data[i] == '\n' || data[i] == '\r') {
      if (data[i] == '\n') ++line;
      ++i;
      continue;
    }
    Row row;
    row.line = line;
    std::string field;
    bool record_done = false;
    while (!record_done) {
      field.clear();
      if (i < data.size() && data[i] == '"') {
        const std::size_t quote_line = line;
        ++i;
        for (;;) {
          if (i >= data.size()) throw ParseError(quote_line, "unterminated quoted field");
          if (data[i] == '"') {
            if (i + 1 < data.size() && data[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (data[i] == '\n') ++line;
          field.push_back(data[i++]);
        }
        if (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r')
          throw ParseError(line, "unexpected character after closing quote");
      } else {
        while (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r')
          field.push_back(data[i++]);
      }
      row.fields.push_back(field);
      if (i < data.size() && data[i] == ',') {
        ++i;
        continue;
      }
      // End of record: consume \r\n, \n or end of data.
      if (i < data.size() && data[i] == '\r') ++i;
      if (i < data.size() && data[i] == '\n') {
        ++i;
        ++line;
      }
      record_done = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    const std::string& f = fields[k];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char ch : f) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace rita::csv
