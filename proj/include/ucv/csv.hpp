#pragma once

#include <string>
#include <vector>

namespace ucv {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// RFC 4180-style reader: quoted fields, doubled-quote escapes, LF or
// CRLF. Ragged rows raise ParseError.
CsvTable read_csv_file(const std::string& path);
CsvTable read_csv_string(const std::string& text);

// Strict numeric cell: decimal point, optional scientific notation, no
// thousands separators. `context` names the cell in the ParseError.
double parse_number(const std::string& cell, const std::string& context);

std::string format_double(double v);  // %.17g, round-trip exact

std::string csv_quote(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ucv
