#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include "logxlate/metrics.hpp"
#include "logxlate/rng.hpp"

using namespace logxlate;

namespace {
// Textbook three-way recursion, the slow-but-obviously-correct reference.
std::size_t lev_reference(std::string_view a, std::string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  std::size_t skip_a = lev_reference(a.substr(1), b) + 1;
  std::size_t skip_b = lev_reference(a, b.substr(1)) + 1;
  std::size_t sub = lev_reference(a.substr(1), b.substr(1)) +
                    (a.front() == b.front() ? 0 : 1);
  return std::min({skip_a, skip_b, sub});
}

std::string random_string(Rng& rng, std::size_t max_len, std::string_view sigma) {
  std::string s;
  std::size_t len = rng.index(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s.push_back(rng.pick(sigma));
  return s;
}
}  // namespace

TEST_CASE("edit distance matches known worked examples", "[metrics]") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("flaw", "lawn") == 2);
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("same", "same") == 0);
}

TEST_CASE("edit distance agrees with the recursive reference", "[metrics]") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    std::string a = random_string(rng, 7, "abc");
    std::string b = random_string(rng, 7, "abc");
    REQUIRE(levenshtein(a, b) == lev_reference(a, b));
  }
}

TEST_CASE("edit distance satisfies metric axioms", "[metrics]") {
  Rng rng(32);
  for (int i = 0; i < 500; ++i) {
    std::string a = random_string(rng, 12, "abcde");
    std::string b = random_string(rng, 12, "abcde");
    std::string c = random_string(rng, 12, "abcde");
    std::size_t dab = levenshtein(a, b);
    REQUIRE(dab == levenshtein(b, a));
    REQUIRE((dab == 0) == (a == b));
    REQUIRE(dab <= levenshtein(a, c) + levenshtein(c, b));
    REQUIRE(dab <= std::max(a.size(), b.size()));
    std::size_t size_gap = a.size() > b.size() ? a.size() - b.size()
                                               : b.size() - a.size();
    REQUIRE(dab >= size_gap);
  }
}

TEST_CASE("relative distance divides by the reference length", "[metrics]") {
  CHECK(relative_distance(3, 12) == Catch::Approx(0.25));
  CHECK(relative_distance(0, 7) == 0.0);
  CHECK_THROWS_AS(relative_distance(1, 0), std::invalid_argument);
}

TEST_CASE("quantiles interpolate linearly between order statistics", "[metrics]") {
  // Hand-computed: rank = p * (n - 1), linear interpolation between floors.
  std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_type7(v, 0.75) == Catch::Approx(3.25).margin(1e-12));
  CHECK(quantile_type7(v, 0.5) == Catch::Approx(2.5).margin(1e-12));
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 1.0) == 4.0);

  std::vector<double> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(quantile_type7(w, 0.5) == Catch::Approx(5.0).margin(1e-12));
  CHECK(quantile_type7(w, 0.9) == Catch::Approx(9.0).margin(1e-12));
  CHECK(quantile_type7(w, 0.95) == Catch::Approx(9.5).margin(1e-12));

  std::vector<double> single{42};
  CHECK(quantile_type7(single, 0.0) == 42.0);
  CHECK(quantile_type7(single, 0.37) == 42.0);
  CHECK(quantile_type7(single, 1.0) == 42.0);
}

TEST_CASE("summaries report order statistics of the sample", "[metrics]") {
  StatSummary s = summarize({4, 1, 3, 2});
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.avg == Catch::Approx(2.5));
  CHECK(s.q50 == Catch::Approx(2.5));
  CHECK(s.q75 == Catch::Approx(3.25));
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("histograms cover the range with equal-width bins", "[metrics]") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i / 99.0);
  auto bins = histogram(v, 50);
  REQUIRE(bins.size() == 50);
  CHECK(bins.front().low == Catch::Approx(0.0));
  CHECK(bins.back().high == Catch::Approx(1.0));
  std::size_t total = 0;
  for (const auto& b : bins) {
    CHECK(b.high >= b.low);
    total += b.count;
  }
  CHECK(total == v.size());
  // Top edge is inclusive: the maximum lands in the last bin, not beyond.
  CHECK(bins.back().count >= 1);
}

TEST_CASE("histogram of a constant sample puts everything in one bin", "[metrics]") {
  auto bins = histogram({2.5, 2.5, 2.5}, 50);
  REQUIRE(bins.size() == 50);
  CHECK(bins[0].count == 3);
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == 3);
}
