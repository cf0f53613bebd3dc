#include "exacb/csv.hpp"

#include <fstream>
#include <sstream>

#include "exacb/errors.hpp"

namespace exacb {

namespace {

// One record; advances pos past the trailing newline.
std::vector<std::string> parse_record(const std::string& text, size_t& pos) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur.push_back('"');
          pos += 2;
        } else {
          quoted = false;
          ++pos;
        }
      } else {
        cur.push_back(c);
        ++pos;
      }
      continue;
    }
    if (c == '"' && cur.empty()) {
      quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur.push_back(c);
      ++pos;
    }
  }
  if (quoted) throw Error("csv: unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void emit_field(std::string& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  if (text.empty()) throw Error("csv: empty input, header row required");
  CsvTable table;
  size_t pos = 0;
  table.header = parse_record(text, pos);
  while (pos < text.size()) {
    // Tolerate a trailing newline after the last record.
    if (text[pos] == '\n' || text[pos] == '\r') {
      ++pos;
      continue;
    }
    auto row = parse_record(text, pos);
    if (row.size() != table.header.size()) {
      throw Error("csv: row " + std::to_string(table.rows.size() + 1) +
                  " has " + std::to_string(row.size()) + " cells, header has " +
                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("csv: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto emit_row = [&out](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      emit_field(out, row[i]);
    }
    out.push_back('\n');
  };
  emit_row(table.header);
  for (const auto& row : table.rows) emit_row(row);
  return out;
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot write " + path);
  out << to_csv(table);
  if (!out) throw Error("csv: write failed for " + path);
}

}  // namespace exacb
