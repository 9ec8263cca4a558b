#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "logxlate/corpus_io.hpp"
#include "logxlate/error.hpp"
#include "logxlate/fields.hpp"
#include "logxlate/record.hpp"

namespace logxlate {

enum class KnownFormat { Clf, Elf, QuotedElf };

inline const char* known_format_name(KnownFormat f) {
  switch (f) {
    case KnownFormat::Clf: return "clf";
    case KnownFormat::Elf: return "elf";
    case KnownFormat::QuotedElf: return "quoted-elf";
  }
  return "?";
}

struct AnnotateResult {
  bool ok = false;
  AnnotatedRecord record;     // set when ok
  std::size_t error_index = 0;  // set when !ok: first offending character
  std::string reason;           // set when !ok

  static AnnotateResult success(AnnotatedRecord rec) {
    AnnotateResult r;
    r.ok = true;
    r.record = std::move(rec);
    return r;
  }
  static AnnotateResult failure(std::size_t index, std::string reason) {
    AnnotateResult r;
    r.error_index = index;
    r.reason = std::move(reason);
    return r;
  }
};

namespace annotate_detail {

// Left-to-right scanner: consumes `line`, appends to `ann`, records the first
// structural failure. All cursor math is in bytes.
class LineScanner {
 public:
  LineScanner(std::string_view line, std::string& ann)
      : line_(line), ann_(ann) {}

  bool failed() const { return failed_; }
  std::size_t error_index() const { return error_index_; }
  const std::string& reason() const { return reason_; }
  std::size_t pos() const { return pos_; }

  void expect_space() {
    if (failed_) return;
    if (pos_ >= line_.size() || line_[pos_] != ' ') {
      fail(pos_, "expected a space between fields");
      return;
    }
    ann_.push_back('_');
    ++pos_;
  }

  // Maximal non-space run, annotated with `symbol`.
  std::string_view plain_token(char symbol, const char* what) {
    if (failed_) return {};
    const std::size_t start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ') ++pos_;
    if (pos_ == start) {
      fail(start, std::string("empty ") + what + " token");
      return {};
    }
    ann_.append(pos_ - start, symbol);
    return line_.substr(start, pos_ - start);
  }

  void bracketed_span(char symbol, const char* what) {
    if (failed_) return;
    if (pos_ >= line_.size() || line_[pos_] != '[') {
      fail(pos_, std::string("expected '[' opening the ") + what);
      return;
    }
    const std::size_t close = line_.find(']', pos_ + 1);
    if (close == std::string_view::npos) {
      fail(pos_, std::string("unterminated '[' in the ") + what);
      return;
    }
    if (close == pos_ + 1) {
      fail(pos_ + 1, std::string("empty ") + what + " span");
      return;
    }
    ann_.push_back('[');
    ann_.append(close - pos_ - 1, symbol);
    ann_.push_back(']');
    pos_ = close + 1;
  }

  // Span ending at the first following quote.
  void quoted_span(char symbol, const char* what) {
    if (failed_) return;
    if (pos_ >= line_.size() || line_[pos_] != '"') {
      fail(pos_, std::string("expected '\"' opening the ") + what);
      return;
    }
    const std::size_t close = line_.find('"', pos_ + 1);
    if (close == std::string_view::npos) {
      fail(pos_, std::string("unterminated '\"' in the ") + what);
      return;
    }
    if (close == pos_ + 1) {
      fail(pos_ + 1, std::string("empty ") + what + " span");
      return;
    }
    ann_.push_back('"');
    ann_.append(close - pos_ - 1, symbol);
    ann_.push_back('"');
    pos_ = close + 1;
  }

  // Span ending at the last quote of the line (the user-agent may itself
  // contain quotes only if nothing follows them).
  void final_quoted_span(char symbol, const char* what) {
    if (failed_) return;
    if (pos_ >= line_.size() || line_[pos_] != '"') {
      fail(pos_, std::string("expected '\"' opening the ") + what);
      return;
    }
    const std::size_t close = line_.rfind('"');
    if (close <= pos_) {
      fail(pos_, std::string("unterminated '\"' in the ") + what);
      return;
    }
    if (close == pos_ + 1) {
      fail(pos_ + 1, std::string("empty ") + what + " span");
      return;
    }
    ann_.push_back('"');
    ann_.append(close - pos_ - 1, symbol);
    ann_.push_back('"');
    pos_ = close + 1;
  }

  void expect_end() {
    if (failed_) return;
    if (pos_ != line_.size()) {
      fail(pos_, "unexpected characters after the last field");
    }
  }

  void fail(std::size_t index, std::string reason) {
    if (failed_) return;
    failed_ = true;
    error_index_ = index;
    reason_ = std::move(reason);
  }

 private:
  std::string_view line_;
  std::string& ann_;
  std::size_t pos_ = 0;
  bool failed_ = false;
  std::size_t error_index_ = 0;
  std::string reason_;
};

inline bool is_three_digits(std::string_view token) {
  return token.size() == 3 &&
         std::isdigit(static_cast<unsigned char>(token[0])) &&
         std::isdigit(static_cast<unsigned char>(token[1])) &&
         std::isdigit(static_cast<unsigned char>(token[2]));
}

// Shared CLF prefix: h l u [t] "r" s b. Leaves the scanner just past b.
inline void scan_clf_fields(LineScanner& sc) {
  sc.plain_token('h', "remote host");
  sc.expect_space();
  sc.plain_token('l', "logname");
  sc.expect_space();
  sc.plain_token('u', "user");
  sc.expect_space();
  sc.bracketed_span('t', "timestamp");
  sc.expect_space();
  sc.quoted_span('r', "request line");
  sc.expect_space();
  const std::size_t status_at = sc.pos();
  const std::string_view status = sc.plain_token('s', "status");
  if (!sc.failed() && !is_three_digits(status)) {
    sc.fail(status_at, "status is not three ASCII digits");
  }
  sc.expect_space();
  sc.plain_token('b', "bytes sent");
}

}  // namespace annotate_detail

inline AnnotateResult annotate_line(std::string_view line, KnownFormat format) {
  using annotate_detail::LineScanner;
  if (line.find('\n') != std::string_view::npos ||
      line.find('\r') != std::string_view::npos) {
    return AnnotateResult::failure(line.find_first_of("\r\n"),
                                   "line contains a line break");
  }

  if (format == KnownFormat::QuotedElf) {
    if (line.size() < 2 || line.front() != '"' || line.back() != '"') {
      return AnnotateResult::failure(
          0, "quoted record must start and end with '\"'");
    }
    AnnotateResult inner =
        annotate_line(line.substr(1, line.size() - 2), KnownFormat::Elf);
    if (!inner.ok) {
      inner.error_index += 1;  // report positions in the original line
      return inner;
    }
    AnnotatedRecord rec;
    rec.raw = std::string(line);
    rec.ann = '"' + inner.record.ann + '"';
    return AnnotateResult::success(std::move(rec));
  }

  std::string ann;
  ann.reserve(line.size());
  LineScanner sc(line, ann);
  annotate_detail::scan_clf_fields(sc);
  if (format == KnownFormat::Elf) {
    sc.expect_space();
    sc.quoted_span('R', "referrer");
    sc.expect_space();
    sc.final_quoted_span('i', "user agent");
  }
  sc.expect_end();
  if (sc.failed()) {
    return AnnotateResult::failure(sc.error_index(), sc.reason());
  }
  AnnotatedRecord rec{std::string(line), std::move(ann)};
  return AnnotateResult::success(std::move(rec));
}

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based
  std::size_t error_index = 0;
  std::string reason;
};

struct AnnotateFileResult {
  std::vector<AnnotatedRecord> records;
  std::vector<RejectedLine> rejects;
};

inline AnnotateFileResult annotate_lines(const std::vector<std::string>& lines,
                                         KnownFormat format) {
  AnnotateFileResult out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    AnnotateResult r = annotate_line(lines[i], format);
    if (r.ok) {
      out.records.push_back(std::move(r.record));
    } else {
      out.rejects.push_back(
          {i + 1, r.error_index,
           r.reason + " (at character " + std::to_string(r.error_index) + ")"});
    }
  }
  return out;
}

inline AnnotateFileResult annotate_file(const std::filesystem::path& path,
                                        KnownFormat format) {
  return annotate_lines(read_raw_lines(path), format);
}

inline void write_rejects_csv(const std::filesystem::path& path,
                              const std::vector<RejectedLine>& rejects) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "line_number,reason\n";
  for (const RejectedLine& r : rejects) {
    std::string reason = r.reason;
    for (char& c : reason) {
      if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    out << r.line_number << ',' << reason << '\n';
  }
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace logxlate
