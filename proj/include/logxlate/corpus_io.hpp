#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "logxlate/error.hpp"
#include "logxlate/record.hpp"

namespace logxlate {

inline std::filesystem::path raw_path(const std::filesystem::path& stem) {
  std::filesystem::path p = stem;
  p += ".raw";
  return p;
}

inline std::filesystem::path ann_path(const std::filesystem::path& stem) {
  std::filesystem::path p = stem;
  p += ".ann";
  return p;
}

namespace corpus_detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return lines;
}

inline void write_lines(const std::filesystem::path& path,
                        const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const std::string& line : lines) {
    out << line << '\n';
  }
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace corpus_detail

// Writes <stem>.raw and <stem>.ann, one record per line, LF endings,
// trailing newline on the last line.
inline void write_corpus(const std::filesystem::path& stem,
                         const std::vector<AnnotatedRecord>& records) {
  std::vector<std::string> raw_lines, ann_lines;
  raw_lines.reserve(records.size());
  ann_lines.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!record_lengths_match(records[i])) {
      throw IoError("record " + std::to_string(i + 1) +
                    ": raw and annotation lengths differ");
    }
    raw_lines.push_back(records[i].raw);
    ann_lines.push_back(records[i].ann);
  }
  corpus_detail::write_lines(raw_path(stem), raw_lines);
  corpus_detail::write_lines(ann_path(stem), ann_lines);
}

// Reads an aligned pair back. Mismatched line counts or per-line length
// differences are corpus corruption and raise IoError naming the line.
inline std::vector<AnnotatedRecord> read_corpus(
    const std::filesystem::path& stem) {
  const std::vector<std::string> raw_lines =
      corpus_detail::read_lines(raw_path(stem));
  const std::vector<std::string> ann_lines =
      corpus_detail::read_lines(ann_path(stem));
  if (raw_lines.size() != ann_lines.size()) {
    throw IoError(raw_path(stem).string() + " has " +
                  std::to_string(raw_lines.size()) + " lines but " +
                  ann_path(stem).string() + " has " +
                  std::to_string(ann_lines.size()));
  }
  std::vector<AnnotatedRecord> records;
  records.reserve(raw_lines.size());
  for (std::size_t i = 0; i < raw_lines.size(); ++i) {
    if (raw_lines[i].size() != ann_lines[i].size()) {
      throw IoError("line " + std::to_string(i + 1) +
                    ": raw length " + std::to_string(raw_lines[i].size()) +
                    " != annotation length " +
                    std::to_string(ann_lines[i].size()));
    }
    records.push_back({raw_lines[i], ann_lines[i]});
  }
  return records;
}

// Raw-only input (for annotate / translate paths).
inline std::vector<std::string> read_raw_lines(
    const std::filesystem::path& path) {
  return corpus_detail::read_lines(path);
}

}  // namespace logxlate
