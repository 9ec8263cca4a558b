#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "logxlate/fields.hpp"
#include "logxlate/rng.hpp"

namespace logxlate {

enum class Wrapper { None, Quotes, Brackets };

struct FormatToken {
  FieldKind field = FieldKind::Separator;
  Wrapper wrapper = Wrapper::None;

  bool operator==(const FormatToken&) const = default;
};

// An ordered list of fields making up one log format. Separators are
// implicit: a single space between consecutive tokens.
struct FormatSpec {
  std::vector<FormatToken> tokens;

  bool operator==(const FormatSpec&) const = default;
};

// Common Log Format: h l u [t] "r" s b
inline FormatSpec clf_format() {
  return FormatSpec{{
      {FieldKind::RemoteHost, Wrapper::None},
      {FieldKind::RemoteLogname, Wrapper::None},
      {FieldKind::RemoteUser, Wrapper::None},
      {FieldKind::Timestamp, Wrapper::Brackets},
      {FieldKind::RequestLine, Wrapper::Quotes},
      {FieldKind::Status, Wrapper::None},
      {FieldKind::BytesSent, Wrapper::None},
  }};
}

// Combined Log Format: CLF plus "R" "i"
inline FormatSpec elf_format() {
  FormatSpec spec = clf_format();
  spec.tokens.push_back({FieldKind::Referrer, Wrapper::Quotes});
  spec.tokens.push_back({FieldKind::UserAgent, Wrapper::Quotes});
  return spec;
}

// Draws a random format: k distinct fields (k uniform in
// [min_fields, max_fields]) in uniformly shuffled order, no wrappers.
inline FormatSpec sample_format(Rng& rng, int min_fields, int max_fields) {
  const int limit = static_cast<int>(kValueFieldKinds.size());
  if (min_fields < 2 || min_fields > max_fields || max_fields > limit) {
    throw std::invalid_argument("sample_format: field count bounds must satisfy 2 <= min <= max <= 15");
  }
  const int k = static_cast<int>(rng.uniform_int(min_fields, max_fields));
  std::array<FieldKind, 15> pool = kValueFieldKinds;
  // Partial Fisher-Yates: the first k entries end up a uniform ordered
  // k-subset, which is exactly "distinct fields, shuffled order".
  for (int i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  FormatSpec spec;
  spec.tokens.reserve(k);
  for (int i = 0; i < k; ++i) {
    spec.tokens.push_back({pool[i], Wrapper::None});
  }
  return spec;
}

}  // namespace logxlate
