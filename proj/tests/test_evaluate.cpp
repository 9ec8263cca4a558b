#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "logxlate/dataset.hpp"
#include "logxlate/evaluate.hpp"

using namespace logxlate;
namespace fs = std::filesystem;

namespace {
std::vector<std::string> read_all_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}
}  // namespace

TEST_CASE("a perfect predictor scores zero everywhere", "[evaluate]") {
  auto corpus = generate_dataset(te_profile(40, 51));
  std::map<std::string, std::string> truth;
  for (const auto& r : corpus) truth[r.raw] = r.ann;
  DatasetEval ev = evaluate_with("perfect", corpus, [&](const std::string& raw) {
    return truth.at(raw);
  });
  REQUIRE(ev.records.size() == corpus.size());
  for (const auto& r : ev.records) {
    REQUIRE(r.d_a == 0);
    REQUIRE(r.d_r == 0.0);
  }
  CHECK(ev.summary.d_a.max == 0.0);
  CHECK(ev.summary.d_r.avg == 0.0);
  CHECK(ev.summary.d_r.q99 == 0.0);
}

TEST_CASE("an empty predictor scores the full reference length", "[evaluate]") {
  auto corpus = generate_dataset(tt_profile(20, 52));
  DatasetEval ev =
      evaluate_with("empty", corpus, [](const std::string&) { return ""; });
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    REQUIRE(ev.records[i].d_a == corpus[i].ann.size());
    REQUIRE(ev.records[i].d_r == 1.0);
    REQUIRE(ev.records[i].ref_len == corpus[i].ann.size());
  }
  CHECK(ev.summary.d_r.min == 1.0);
  CHECK(ev.summary.d_r.max == 1.0);
}

TEST_CASE("a one-edit predictor scores exactly one", "[evaluate]") {
  std::vector<AnnotatedRecord> corpus{{"abcd", "hhhh"}, {"ef", "ll"}};
  DatasetEval ev = evaluate_with("one-off", corpus, [](const std::string& raw) {
    std::string ann(raw.size(), raw.size() == 4 ? 'h' : 'l');
    ann.back() = '_';  // one substitution
    return ann;
  });
  REQUIRE(ev.records[0].d_a == 1);
  REQUIRE(ev.records[0].d_r == 0.25);
  REQUIRE(ev.records[1].d_a == 1);
  REQUIRE(ev.records[1].d_r == 0.5);
  CHECK(ev.summary.d_a.avg == 1.0);
  CHECK(ev.summary.d_r.q50 == Catch::Approx(0.375));
}

TEST_CASE("evaluation refuses an empty corpus", "[evaluate]") {
  REQUIRE_THROWS_AS(
      evaluate_with("x", {}, [](const std::string&) { return ""; }),
      std::invalid_argument);
}

TEST_CASE("unknown-character fraction counts out-of-vocabulary bytes",
          "[evaluate]") {
  std::vector<AnnotatedRecord> train{{"aab", "hhh"}};
  VocabPair v = build_vocab(train);
  std::vector<AnnotatedRecord> eval{{"abXY", "hhhh"}};  // 2 of 4 unknown
  CHECK(unk_fraction(v.source, eval) == 0.5);
  CHECK(unk_fraction(v.source, train) == 0.0);
  CHECK(unk_fraction(v.source, {}) == 0.0);
}

TEST_CASE("reports land on disk as stable CSV tables", "[evaluate]") {
  auto corpus = generate_dataset(te_profile(30, 53));
  DatasetEval perfect = evaluate_with("VA", corpus, [&](const std::string& raw) {
    for (const auto& r : corpus) {
      if (r.raw == raw) return r.ann;
    }
    return std::string();
  });
  DatasetEval empty = evaluate_with("VB", corpus,
                                    [](const std::string&) { return ""; });

  fs::path dir = fs::temp_directory_path() / "logxlate_eval_test";
  fs::remove_all(dir);
  emit_report(dir, {perfect, empty});

  auto summary = read_all_lines(dir / "summary.csv");
  REQUIRE(summary.size() == 1 + 2 * 2);  // header + 2 metrics x 2 datasets
  REQUIRE(summary[0] == "metric,dataset,min,avg,q50,q75,q90,q95,q99,max");
  // row order: per dataset, D_A then D_R
  CHECK(split_csv(summary[1])[0] == "da");
  CHECK(split_csv(summary[1])[1] == "VA");
  CHECK(split_csv(summary[2])[0] == "dr");
  CHECK(split_csv(summary[4])[1] == "VB");
  // the empty predictor's D_R row is identically 1
  auto vb_dr = split_csv(summary[4]);
  for (std::size_t i = 2; i < vb_dr.size(); ++i) {
    CHECK(std::stod(vb_dr[i]) == 1.0);
  }

  auto rec_lines = read_all_lines(dir / "records_VA.csv");
  REQUIRE(rec_lines.size() == 1 + corpus.size());
  REQUIRE(rec_lines[0] == "index,ref_len,da,dr");
  auto first = split_csv(rec_lines[1]);
  CHECK(first[0] == "0");
  CHECK(std::stoul(first[1]) == corpus[0].ann.size());

  for (const char* name :
       {"hist_VA_da.csv", "hist_VA_dr.csv", "hist_VB_da.csv", "hist_VB_dr.csv"}) {
    auto hist = read_all_lines(dir / name);
    REQUIRE(hist.size() == 51);  // header + 50 bins
    REQUIRE(hist[0] == "bin_low,bin_high,count");
    std::size_t total = 0;
    for (std::size_t i = 1; i < hist.size(); ++i) {
      total += std::stoul(split_csv(hist[i])[2]);
    }
    REQUIRE(total == corpus.size());
  }
  fs::remove_all(dir);
}

TEST_CASE("report numbers round-trip through text exactly", "[evaluate]") {
  using report_detail::format_double;
  for (double v : {0.1, 1.0 / 3.0, 123456.789, 1e-12, 0.0}) {
    REQUIRE(std::stod(format_double(v)) == v);
  }
}
