#include "ucv/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ucv/errors.hpp"

namespace ucv {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  const auto end_field = [&]() {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  const auto end_record = [&]() {
    end_field();
    records.push_back(record);
    record.clear();
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty())
          fail(ErrorCode::ParseError,
               "stray quote in record " + std::to_string(records.size() + 1));
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;  // next field exists even if empty
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += ch;
    }
  }
  if (quoted)
    fail(ErrorCode::ParseError, "unterminated quoted field at end of input");
  if (!field.empty() || field_started || !record.empty()) end_record();
  return records;
}

}  // namespace

CsvTable read_csv_string(const std::string& text) {
  auto records = parse_records(text);
  if (records.empty()) fail(ErrorCode::ParseError, "empty CSV input");
  CsvTable table;
  table.header = std::move(records.front());
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      fail(ErrorCode::ParseError,
           "row " + std::to_string(r) + " has " +
               std::to_string(records[r].size()) + " fields, expected " +
               std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_csv_string(buf.str());
}

double parse_number(const std::string& cell, const std::string& context) {
  if (cell.empty())
    fail(ErrorCode::ParseError, context + ": empty numeric cell");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size())
    fail(ErrorCode::ParseError,
         context + ": '" + cell + "' is not a number");
  return v;
}

std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(fields[i]);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::ParseError, "write failed for '" + path + "'");
}

}  // namespace ucv
