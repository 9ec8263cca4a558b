#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "logxlate/fields.hpp"

namespace logxlate {

// One log line paired with its character-to-field annotation. raw and ann
// always have the same length; ann[i] names the field that owns raw[i]
// ('_' for inter-field spaces, '"'/'['/']' for literal wrapper characters).
struct AnnotatedRecord {
  std::string raw;
  std::string ann;

  bool operator==(const AnnotatedRecord&) const = default;
};

inline bool record_lengths_match(const AnnotatedRecord& rec) {
  return rec.raw.size() == rec.ann.size();
}

inline bool record_has_no_line_breaks(const AnnotatedRecord& rec) {
  return rec.raw.find('\n') == std::string::npos &&
         rec.raw.find('\r') == std::string::npos;
}

inline bool record_annotation_in_alphabet(const AnnotatedRecord& rec) {
  for (char c : rec.ann) {
    if (!is_annotation_char(c)) return false;
  }
  return true;
}

// Each field symbol must form at most one contiguous run in ann. Separators
// and literal wrappers are exempt (they repeat by design).
inline bool record_field_runs_contiguous(const AnnotatedRecord& rec) {
  std::array<bool, 256> run_closed{};
  char current = '\0';
  for (char c : rec.ann) {
    if (c != current && current != '\0' && is_field_symbol(current)) {
      run_closed[static_cast<unsigned char>(current)] = true;
    }
    if (is_field_symbol(c) && c != current &&
        run_closed[static_cast<unsigned char>(c)]) {
      return false;
    }
    current = c;
  }
  return true;
}

inline bool record_well_formed(const AnnotatedRecord& rec) {
  return record_lengths_match(rec) && record_has_no_line_breaks(rec) &&
         record_annotation_in_alphabet(rec) &&
         record_field_runs_contiguous(rec);
}

}  // namespace logxlate
