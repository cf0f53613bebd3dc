#pragma once

#include <string>
#include <vector>

namespace exacb {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each sized like header
};

// Comma separator, double-quote quoting with "" escapes, mandatory header
// row, UTF-8 passthrough. Quoted cells may contain commas and newlines.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string to_csv(const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

}  // namespace exacb
