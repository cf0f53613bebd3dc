#include "exacb/csv.hpp"

#include "doctest.h"
#include "exacb/errors.hpp"
#include "support/test_util.hpp"

using namespace exacb;

TEST_CASE("csv quoting round-trips awkward cells") {
  CsvTable table;
  table.header = {"a", "b"};
  table.rows = {{"plain", "with,comma"},
                {"with \"quotes\"", "multi\nline"},
                {"", "trailing space "}};
  const CsvTable back = parse_csv(to_csv(table));
  CHECK(back.header == table.header);
  CHECK(back.rows == table.rows);
}

TEST_CASE("csv structural errors") {
  CHECK_THROWS_AS(parse_csv(""), Error);
  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1\n"), doctest::Contains("cells"),
                       Error);
  CHECK_THROWS_AS(parse_csv("a,b\n\"unterminated"), Error);
}

TEST_CASE("csv accepts crlf and a missing trailing newline") {
  const CsvTable t = parse_csv("a,b\r\n1,2\r\n3,4");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1] == std::vector<std::string>{"3", "4"});
}

TEST_CASE("csv random row round-trip") {
  test::ReportGen gen(31337);
  auto& rng = gen.rng();
  for (int round = 0; round < 25; ++round) {
    CsvTable table;
    const size_t cols = 1 + rng() % 6;
    for (size_t c = 0; c < cols; ++c) table.header.push_back(gen.word());
    const size_t rows = rng() % 8;
    for (size_t r = 0; r < rows; ++r) {
      std::vector<std::string> row;
      for (size_t c = 0; c < cols; ++c) {
        std::string cell = gen.word(0, 10);
        if (rng() % 4 == 0) cell += ",\"\n";  // force quoting paths
        row.push_back(cell);
      }
      table.rows.push_back(row);
    }
    const CsvTable back = parse_csv(to_csv(table));
    CHECK(back.header == table.header);
    CHECK(back.rows == table.rows);
  }
}
