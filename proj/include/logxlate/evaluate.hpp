#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "logxlate/error.hpp"
#include "logxlate/metrics.hpp"
#include "logxlate/nn/translate.hpp"
#include "logxlate/record.hpp"
#include "logxlate/vocab.hpp"

namespace logxlate {

struct EvalRecordResult {
  std::size_t index = 0;    // 0-based position in the corpus
  std::size_t ref_len = 0;  // reference annotation length
  std::size_t d_a = 0;
  double d_r = 0.0;
};

struct EvalSummary {
  StatSummary d_a;
  StatSummary d_r;
};

struct DatasetEval {
  std::string dataset;
  std::vector<EvalRecordResult> records;
  EvalSummary summary;
};

// Scores an arbitrary predictor (annotation string per raw line) against the
// reference annotations.
template <class PredictFn>
DatasetEval evaluate_with(std::string dataset_name,
                          const std::vector<AnnotatedRecord>& corpus,
                          PredictFn&& predict) {
  if (corpus.empty()) {
    throw std::invalid_argument("evaluate: empty corpus");
  }
  DatasetEval out;
  out.dataset = std::move(dataset_name);
  std::vector<double> das, drs;
  das.reserve(corpus.size());
  drs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string pred = predict(corpus[i].raw);
    EvalRecordResult r;
    r.index = i;
    r.ref_len = corpus[i].ann.size();
    r.d_a = levenshtein(pred, corpus[i].ann);
    r.d_r = relative_distance(r.d_a, r.ref_len);
    das.push_back(static_cast<double>(r.d_a));
    drs.push_back(r.d_r);
    out.records.push_back(r);
  }
  out.summary.d_a = summarize(das);
  out.summary.d_r = summarize(drs);
  return out;
}

inline DatasetEval evaluate_corpus(std::string dataset_name,
                                   const Translator& translator,
                                   const std::vector<AnnotatedRecord>& corpus,
                                   int beam_width = 1) {
  return evaluate_with(std::move(dataset_name), corpus,
                       [&](const std::string& raw) {
                         return beam_width > 1 ? translator.beam(raw, beam_width)
                                               : translator.greedy(raw);
                       });
}

// Fraction of raw characters the source vocabulary cannot represent
// (reported as a coverage warning, not an error).
inline double unk_fraction(const CharVocab& source,
                           const std::vector<AnnotatedRecord>& corpus) {
  std::size_t unk = 0, total = 0;
  for (const AnnotatedRecord& rec : corpus) {
    total += rec.raw.size();
    for (char c : rec.raw) {
      if (source.char_id(c) < 0) ++unk;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unk) / static_cast<double>(total);
}

namespace report_detail {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_summary_row(std::ofstream& out, const std::string& metric,
                              const std::string& dataset, const StatSummary& s) {
  out << metric << ',' << dataset << ',' << format_double(s.min) << ','
      << format_double(s.avg) << ',' << format_double(s.q50) << ','
      << format_double(s.q75) << ',' << format_double(s.q90) << ','
      << format_double(s.q95) << ',' << format_double(s.q99) << ','
      << format_double(s.max) << '\n';
}

inline void write_histogram(const std::filesystem::path& path,
                            const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "bin_low,bin_high,count\n";
  for (const HistogramBin& bin : histogram(values, 50)) {
    out << format_double(bin.low) << ',' << format_double(bin.high) << ','
        << bin.count << '\n';
  }
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace report_detail

// Writes summary.csv (one da and one dr row per dataset), a per-record CSV
// and two 50-bin histogram CSVs per dataset, all under `dir`.
inline void emit_report(const std::filesystem::path& dir,
                        const std::vector<DatasetEval>& evals) {
  if (evals.empty()) {
    throw std::invalid_argument("emit_report: nothing to report");
  }
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "summary.csv", std::ios::binary | std::ios::trunc);
  if (!summary) {
    throw IoError("cannot open " + (dir / "summary.csv").string() +
                  " for writing");
  }
  summary << "metric,dataset,min,avg,q50,q75,q90,q95,q99,max\n";
  for (const DatasetEval& ev : evals) {
    report_detail::write_summary_row(summary, "da", ev.dataset, ev.summary.d_a);
    report_detail::write_summary_row(summary, "dr", ev.dataset, ev.summary.d_r);

    std::ofstream records(dir / ("records_" + ev.dataset + ".csv"),
                          std::ios::binary | std::ios::trunc);
    if (!records) throw IoError("cannot write per-record CSV");
    records << "index,ref_len,da,dr\n";
    std::vector<double> das, drs;
    for (const EvalRecordResult& r : ev.records) {
      records << r.index << ',' << r.ref_len << ',' << r.d_a << ','
              << report_detail::format_double(r.d_r) << '\n';
      das.push_back(static_cast<double>(r.d_a));
      drs.push_back(r.d_r);
    }
    report_detail::write_histogram(dir / ("hist_" + ev.dataset + "_da.csv"), das);
    report_detail::write_histogram(dir / ("hist_" + ev.dataset + "_dr.csv"), drs);
  }
  summary.flush();
  if (!summary) throw IoError("write error on summary.csv");
}

}  // namespace logxlate
