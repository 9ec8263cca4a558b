#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "logxlate/fields.hpp"
#include "logxlate/format.hpp"
#include "logxlate/record.hpp"
#include "logxlate/rng.hpp"

namespace logxlate {

struct GeneratorOptions {
  double ipv6_probability = 0.5;
  double user_dash_probability = 0.3;
  double bytes_dash_probability = 0.1;
  double query_dash_probability = 0.4;
  double referrer_dash_probability = 0.3;
};

struct FieldValue {
  FieldKind kind = FieldKind::Separator;
  std::string text;

  bool operator==(const FieldValue&) const = default;
};

namespace gen_detail {

inline constexpr std::string_view kLower = "abcdefghijklmnopqrstuvwxyz";
inline constexpr std::string_view kLowerDigits = "abcdefghijklmnopqrstuvwxyz0123456789";
inline constexpr std::string_view kPathChars = "abcdefghijklmnopqrstuvwxyz0123456789~.";
inline constexpr std::string_view kHexDigits = "0123456789abcdef";

inline std::string word(Rng& rng, int min_len, int max_len,
                        std::string_view charset = kLower) {
  const int n = static_cast<int>(rng.uniform_int(min_len, max_len));
  std::string out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(rng.pick(charset));
  return out;
}

inline std::string capitalized_word(Rng& rng, int min_len, int max_len) {
  std::string w = word(rng, min_len, max_len);
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

inline void append_padded2(std::string& out, int value) {
  out.push_back(static_cast<char>('0' + value / 10));
  out.push_back(static_cast<char>('0' + value % 10));
}

inline std::string ipv4(Rng& rng) {
  std::string out;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) out.push_back('.');
    out += std::to_string(rng.uniform_int(0, 255));
  }
  return out;
}

inline std::string ipv6(Rng& rng) {
  std::string out;
  for (int group = 0; group < 8; ++group) {
    if (group > 0) out.push_back(':');
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) out.push_back(rng.pick(kHexDigits));
  }
  return out;
}

inline std::string timestamp(Rng& rng) {
  static constexpr std::string_view kMonths[] = {
      "Jan", "Feb", "Mar", "Apr", "May", "Jun",
      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::string out;
  out.reserve(26);
  append_padded2(out, static_cast<int>(rng.uniform_int(1, 28)));
  out.push_back('/');
  out += rng.pick(kMonths);
  out.push_back('/');
  out += std::to_string(rng.uniform_int(1970, 9999));
  out.push_back(':');
  append_padded2(out, static_cast<int>(rng.uniform_int(0, 23)));
  out.push_back(':');
  append_padded2(out, static_cast<int>(rng.uniform_int(0, 59)));
  out.push_back(':');
  append_padded2(out, static_cast<int>(rng.uniform_int(0, 59)));
  out.push_back(' ');
  out.push_back(rng.bernoulli(0.5) ? '+' : '-');
  const int zone_hours = static_cast<int>(rng.uniform_int(0, 14));
  static constexpr int kZoneMinutes[] = {0, 15, 30, 45};
  const int zone_minutes = zone_hours == 14 ? 0 : kZoneMinutes[rng.index(4)];
  append_padded2(out, zone_hours);
  append_padded2(out, zone_minutes);
  return out;
}

inline std::string uri_path(Rng& rng, bool force_leading_slash) {
  std::string out;
  if (force_leading_slash || rng.bernoulli(0.5)) out.push_back('/');
  const int segments = static_cast<int>(rng.uniform_int(1, 4));
  for (int s = 0; s < segments; ++s) {
    if (s > 0) out.push_back('/');
    out += word(rng, 1, 8, kPathChars);
  }
  if (rng.bernoulli(0.5)) {
    static constexpr std::string_view kSuffixes[] = {".html", ".php", ".png"};
    out += rng.pick(kSuffixes);
  }
  return out;
}

inline std::string query_string(Rng& rng, const GeneratorOptions& opts) {
  if (rng.bernoulli(opts.query_dash_probability)) return "-";
  std::string out = "?";
  const int pairs = static_cast<int>(rng.uniform_int(1, 3));
  for (int p = 0; p < pairs; ++p) {
    if (p > 0) out.push_back('&');
    out += word(rng, 1, 5, kLowerDigits);
    out.push_back('=');
    out += word(rng, 1, 6, kLowerDigits);
  }
  return out;
}

inline std::string domain(Rng& rng) {
  static constexpr std::string_view kTlds[] = {"com", "net", "org", "io"};
  std::string out = word(rng, 3, 12);
  out.push_back('.');
  out += rng.pick(kTlds);
  return out;
}

inline std::string product_version(Rng& rng) {
  std::string out = std::to_string(rng.uniform_int(1, 19));
  out.push_back('.');
  out += std::to_string(rng.uniform_int(0, 9));
  return out;
}

inline std::string user_agent(Rng& rng) {
  std::string out = capitalized_word(rng, 3, 9);
  out.push_back('/');
  out += product_version(rng);
  out += " (";
  const int tokens = static_cast<int>(rng.uniform_int(1, 4));
  for (int t = 0; t < tokens; ++t) {
    if (t > 0) out += "; ";
    switch (rng.index(4)) {
      case 0:
        out += rng.bernoulli(0.5) ? capitalized_word(rng, 4, 12)
                                  : word(rng, 4, 12);
        break;
      case 1:
        out += word(rng, 3, 8);
        out.push_back(' ');
        out += std::to_string(rng.uniform_int(1, 99));
        if (rng.bernoulli(0.5)) {
          out.push_back('.');
          out += std::to_string(rng.uniform_int(0, 9));
        }
        break;
      case 2:
        out += capitalized_word(rng, 3, 8);
        out.push_back('/');
        out += product_version(rng);
        break;
      default:
        out += word(rng, 3, 8);
        out.push_back(' ');
        out += word(rng, 3, 8);
        break;
    }
  }
  out.push_back(')');
  const int details = static_cast<int>(rng.uniform_int(1, 4));
  for (int d = 0; d < details; ++d) {
    out.push_back(' ');
    out += capitalized_word(rng, 4, 10);
    out.push_back('/');
    out += std::to_string(rng.uniform_int(1, 999));
    out.push_back('.');
    out += std::to_string(rng.uniform_int(0, 99));
    if (rng.bernoulli(0.5)) {
      out.push_back('.');
      out += std::to_string(rng.uniform_int(0, 9999));
    }
  }
  return out;
}

}  // namespace gen_detail

// Generates one value for the given field. Deterministic in the rng state.
// Draw order within each grammar is fixed; callers relying on byte-exact
// reproducibility must present the same rng state.
inline std::string gen_field_text(FieldKind kind, Rng& rng,
                                  const GeneratorOptions& opts = {}) {
  using namespace gen_detail;
  switch (kind) {
    case FieldKind::RemoteHost:
      return rng.bernoulli(opts.ipv6_probability) ? ipv6(rng) : ipv4(rng);
    case FieldKind::RemoteLogname:
      return "-";
    case FieldKind::RemoteUser:
      return rng.bernoulli(opts.user_dash_probability) ? "-"
                                                       : word(rng, 3, 12);
    case FieldKind::Timestamp:
      return timestamp(rng);
    case FieldKind::RequestLine: {
      // method SP path[query] SP protocol, drawn in that order
      std::string out = gen_field_text(FieldKind::Method, rng, opts);
      out.push_back(' ');
      out += uri_path(rng, false);
      const std::string query = query_string(rng, opts);
      if (query != "-") out += query;
      out.push_back(' ');
      out += gen_field_text(FieldKind::Protocol, rng, opts);
      return out;
    }
    case FieldKind::Status: {
      static constexpr std::string_view kStatuses[] = {
          "200", "201", "204", "301", "302", "304", "400",
          "401", "403", "404", "500", "502", "503"};
      return std::string(rng.pick(kStatuses));
    }
    case FieldKind::BytesSent:
      return rng.bernoulli(opts.bytes_dash_probability)
                 ? "-"
                 : std::to_string(rng.uniform_int(0, 9'999'999));
    case FieldKind::Method: {
      static constexpr std::string_view kMethods[] = {
          "GET", "POST", "PUT", "DELETE", "HEAD", "OPTIONS", "PATCH"};
      return std::string(rng.pick(kMethods));
    }
    case FieldKind::UriPath:
      return uri_path(rng, false);
    case FieldKind::Protocol: {
      static constexpr std::string_view kProtocols[] = {"HTTP/1.0", "HTTP/1.1",
                                                        "HTTP/2"};
      return std::string(rng.pick(kProtocols));
    }
    case FieldKind::QueryString:
      return query_string(rng, opts);
    case FieldKind::CanonicalServerName:
    case FieldKind::ServerName:
      return domain(rng);
    case FieldKind::UserAgent:
      return user_agent(rng);
    case FieldKind::Referrer: {
      if (rng.bernoulli(opts.referrer_dash_probability)) return "-";
      std::string out = rng.bernoulli(0.5) ? "https" : "http";
      out += "://";
      out += domain(rng);
      out += uri_path(rng, true);
      return out;
    }
    case FieldKind::Separator:
      break;
  }
  throw std::invalid_argument("gen_field_text: separator has no generated value");
}

inline FieldValue gen_field_value(FieldKind kind, Rng& rng,
                                  const GeneratorOptions& opts = {}) {
  return FieldValue{kind, gen_field_text(kind, rng, opts)};
}

// Values for every token of a format, in token order. When v and V co-occur
// the later one reuses the earlier one's text (the formats describe the same
// server twice).
inline std::vector<FieldValue> gen_record_values(
    const FormatSpec& spec, Rng& rng, const GeneratorOptions& opts = {}) {
  std::vector<FieldValue> values;
  values.reserve(spec.tokens.size());
  const std::string* server_name = nullptr;
  for (const FormatToken& token : spec.tokens) {
    const bool names_server = token.field == FieldKind::CanonicalServerName ||
                              token.field == FieldKind::ServerName;
    if (names_server && server_name != nullptr) {
      values.push_back({token.field, *server_name});
      continue;
    }
    values.push_back(gen_field_value(token.field, rng, opts));
    if (names_server) server_name = &values.back().text;
  }
  return values;
}

// Renders a format plus values into a raw line and its annotation string.
// Fields are joined by single spaces ('_' in ann); wrapper characters appear
// literally in both raw and ann; value characters (spaces included) carry
// the field's annotation symbol.
inline AnnotatedRecord render_record(const FormatSpec& spec,
                                     const std::vector<FieldValue>& values) {
  if (values.size() != spec.tokens.size()) {
    throw std::invalid_argument("render_record: value count does not match format tokens");
  }
  AnnotatedRecord rec;
  for (std::size_t i = 0; i < spec.tokens.size(); ++i) {
    const FormatToken& token = spec.tokens[i];
    const std::string& text = values[i].text;
    if (text.empty()) {
      throw std::invalid_argument("render_record: empty field value");
    }
    if (text.find('\n') != std::string::npos ||
        text.find('\r') != std::string::npos) {
      throw std::invalid_argument("render_record: field value contains a line break");
    }
    if (i > 0) {
      rec.raw.push_back(' ');
      rec.ann.push_back('_');
    }
    const char symbol = annotation_char(token.field);
    switch (token.wrapper) {
      case Wrapper::None:
        rec.raw += text;
        rec.ann.append(text.size(), symbol);
        break;
      case Wrapper::Quotes:
        rec.raw.push_back('"');
        rec.raw += text;
        rec.raw.push_back('"');
        rec.ann.push_back('"');
        rec.ann.append(text.size(), symbol);
        rec.ann.push_back('"');
        break;
      case Wrapper::Brackets:
        rec.raw.push_back('[');
        rec.raw += text;
        rec.raw.push_back(']');
        rec.ann.push_back('[');
        rec.ann.append(text.size(), symbol);
        rec.ann.push_back(']');
        break;
    }
  }
  return rec;
}

}  // namespace logxlate
