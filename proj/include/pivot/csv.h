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


// Minimal CSV tables: comma separated, LF line endings, no quoting. Numbers
// are written with a fixed "%.9g" format so identical runs give identical
// bytes.

#ifndef PIVOT_CSV_H_
#define PIVOT_CSV_H_

#include <filesystem>
#include <string>
#include <vector>

namespace pivot {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InvalidInput when the column is absent.
  int Column(const std::string& name) const;
  // Throws ParseError (with the file line) when the cell is not a number.
  double Number(std::size_t row, int col) const;
  std::vector<double> Numbers(const std::string& column) const;
  void AddRow(std::vector<std::string> row);
};

std::string CsvNumber(double v);

// Throws InvalidInput when a cell contains a comma or newline.
std::string FormatCsv(const CsvTable& table);
void WriteCsv(const CsvTable& table, const std::filesystem::path& path);

// Throws ParseError with the 1-based line number on an empty header or a
// row with the wrong field count.
CsvTable ParseCsv(const std::string& text);
// Throws MissingArtifact when absent.
CsvTable ReadCsv(const std::filesystem::path& path);

}  // namespace pivot

#endif  // PIVOT_CSV_H_
