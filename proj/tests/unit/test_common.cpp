#include <doctest.h>

#include <atomic>
#include <vector>

#include "common/kv.hpp"
#include "common/parallel.hpp"
#include "support.hpp"

using namespace pcsod;

TEST_CASE("key=value parsing") {
  const auto kv = parse_key_values("# comment\na = 1\n\nb=two words\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two words");

  ErrorKind kind{};
  CHECK(test::error_message([] { parse_key_values("a=1\na=2\n"); }, &kind).find("a") != std::string::npos);
  CHECK(kind == ErrorKind::Usage);
  CHECK_THROWS_AS(parse_key_values("just text\n"), Error);
}

TEST_CASE("exact key sets name the offending key") {
  const std::vector<std::string> keys = {"alpha", "beta"};
  CHECK_NOTHROW(require_exact_keys({{"alpha", "1"}, {"beta", "2"}}, keys, "test"));
  CHECK(test::error_message([&] { require_exact_keys({{"alpha", "1"}}, keys, "test"); }).find("beta") !=
        std::string::npos);
  CHECK(test::error_message([&] {
          require_exact_keys({{"alpha", "1"}, {"beta", "2"}, {"gamma", "3"}}, keys, "test");
        }).find("gamma") != std::string::npos);
}

TEST_CASE("scalar parsers") {
  CHECK(parse_size("k", "42") == 42);
  CHECK_THROWS_AS(parse_size("k", "-1"), Error);
  CHECK_THROWS_AS(parse_size("k", "4x"), Error);
  CHECK(parse_size_list("k", "1, 4,9,16") == std::vector<std::size_t>{1, 4, 9, 16});
  CHECK(parse_real("lr", "5e-4") == doctest::Approx(5e-4));
  CHECK_THROWS_AS(parse_real("lr", "fast"), Error);
  CHECK(parse_bool("b", "true"));
  CHECK_FALSE(parse_bool("b", "false"));
  CHECK_THROWS_AS(parse_bool("b", "maybe"), Error);
  CHECK(join_sizes({1, 2, 3}) == "1,2,3");
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(200, [](std::size_t i) {
                    if (i == 117) throw_data("boom");
                  }),
                  Error);
}
