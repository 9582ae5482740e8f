#include <atomic>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/common/text.hpp"

using namespace intimacy;

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(text::tokenize("What MIGHT be, your memory?") ==
        std::vector<std::string>{"what", "might", "be", "your", "memory"});
  CHECK(text::tokenize("").empty());
  CHECK(text::tokenize("caf\xC3\xA9 ok") == std::vector<std::string>{"caf\xC3\xA9", "ok"});
}

TEST_CASE("csv quoting round trip") {
  const std::vector<std::string> row{"a,b", "say \"hi\"", "line\nbreak", "plain"};
  std::istringstream in(csv::format_row(row) + "\n" + csv::format_row({"x", "", "y", "z"}) + "\n");
  csv::Reader r(in);
  CHECK(*r.next() == row);
  CHECK(r.next()->at(1).empty());
  CHECK_FALSE(r.next().has_value());
}

TEST_CASE("csv table columns") {
  std::istringstream in("id,score\n\nq1,0.5\nq2,1\n");
  const auto t = csv::read_stream(in, "mem");
  CHECK(t.rows.size() == 2);
  CHECK(t.column("score") == 1);
  CHECK(t.lines[1] == 4);
  try {
    t.column("text");
    FAIL("expected missing_column");
  } catch (const Error& e) {
    CHECK(e.code() == "missing_column");
  }
}

TEST_CASE("atomic_write replaces content and leaves no temp file") {
  const auto dir = std::filesystem::temp_directory_path() / "intimacy_common_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  io::atomic_write(path, "first");
  io::atomic_write(path, "second");
  CHECK(io::read_file(path) == "second");
  CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw Error("boom", "x");
                  }, 3),
                  Error);
}

TEST_CASE("derived seeds differ per stream and are stable") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
