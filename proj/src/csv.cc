// Copyright 2026 The pivot-adapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "pivot/csv.h"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "pivot/checkpoint.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

int CsvTable::Column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw InvalidInput("CSV has no column '" + name + "'");
}

double CsvTable::Number(std::size_t row, int col) const {
  const std::string& cell = rows.at(row).at(static_cast<std::size_t>(col));
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw ParseError("column '" + header[static_cast<std::size_t>(col)] +
                         "': not a number: '" + cell + "'",
                     static_cast<int>(row) + 2);
  }
  return v;
}

std::vector<double> CsvTable::Numbers(const std::string& column) const {
  const int c = Column(column);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(Number(r, c));
  return out;
}

void CsvTable::AddRow(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw InvalidInput("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                       std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string FormatCsv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\n\r") != std::string::npos) {
        throw InvalidInput("CSV cell contains a separator: '" + fields[i] + "'");
      }
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void WriteCsv(const CsvTable& table, const std::filesystem::path& path) {
  WriteFileBytes(path, FormatCsv(table));
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line.empty()) throw ParseError("CSV header is empty", 1);
      t.header = SplitFields(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = SplitFields(line);
    if (fields.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    t.rows.push_back(std::move(fields));
  }
  if (lineno == 0) throw ParseError("CSV is empty", 1);
  return t;
}

CsvTable ReadCsv(const std::filesystem::path& path) { return ParseCsv(ReadFileBytes(path)); }

}  // namespace pivot
