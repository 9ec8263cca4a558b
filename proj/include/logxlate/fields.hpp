#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace logxlate {

// The Apache log fields the generator knows how to produce, plus the
// inter-field separator. Each one is tagged in annotation strings by a
// single character (the Apache format specifier it corresponds to).
enum class FieldKind {
  RemoteHost,           // h: client IP, v4 or v6
  RemoteLogname,        // l: always "-"
  RemoteUser,           // u: "-" or a short name
  Timestamp,            // t: day/month/year:time zone
  RequestLine,          // r: "method path[query] protocol"
  Status,               // s: 3-digit response code
  BytesSent,            // b: "-" or a byte count
  Method,               // m: GET, POST, ...
  UriPath,              // U: requested path
  Protocol,             // H: HTTP/1.0, HTTP/1.1, HTTP/2
  QueryString,          // q: "?k=v&..." or empty marker
  CanonicalServerName,  // v: configured server name
  ServerName,           // V: server name per UseCanonical; equals v here
  UserAgent,            // i: client software description
  Referrer,             // R: "-" or a URL
  Separator,            // _: single space between fields
};

inline constexpr std::array<FieldKind, 16> kAllFieldKinds = {
    FieldKind::RemoteHost,   FieldKind::RemoteLogname,
    FieldKind::RemoteUser,   FieldKind::Timestamp,
    FieldKind::RequestLine,  FieldKind::Status,
    FieldKind::BytesSent,    FieldKind::Method,
    FieldKind::UriPath,      FieldKind::Protocol,
    FieldKind::QueryString,  FieldKind::CanonicalServerName,
    FieldKind::ServerName,   FieldKind::UserAgent,
    FieldKind::Referrer,     FieldKind::Separator,
};

// The 15 generatable fields (everything except the separator).
inline constexpr std::array<FieldKind, 15> kValueFieldKinds = {
    FieldKind::RemoteHost,   FieldKind::RemoteLogname,
    FieldKind::RemoteUser,   FieldKind::Timestamp,
    FieldKind::RequestLine,  FieldKind::Status,
    FieldKind::BytesSent,    FieldKind::Method,
    FieldKind::UriPath,      FieldKind::Protocol,
    FieldKind::QueryString,  FieldKind::CanonicalServerName,
    FieldKind::ServerName,   FieldKind::UserAgent,
    FieldKind::Referrer,
};

constexpr char annotation_char(FieldKind kind) {
  switch (kind) {
    case FieldKind::RemoteHost: return 'h';
    case FieldKind::RemoteLogname: return 'l';
    case FieldKind::RemoteUser: return 'u';
    case FieldKind::Timestamp: return 't';
    case FieldKind::RequestLine: return 'r';
    case FieldKind::Status: return 's';
    case FieldKind::BytesSent: return 'b';
    case FieldKind::Method: return 'm';
    case FieldKind::UriPath: return 'U';
    case FieldKind::Protocol: return 'H';
    case FieldKind::QueryString: return 'q';
    case FieldKind::CanonicalServerName: return 'v';
    case FieldKind::ServerName: return 'V';
    case FieldKind::UserAgent: return 'i';
    case FieldKind::Referrer: return 'R';
    case FieldKind::Separator: return '_';
  }
  return '?';
}

constexpr std::optional<FieldKind> field_from_annotation_char(char c) {
  for (FieldKind kind : kAllFieldKinds) {
    if (annotation_char(kind) == c) return kind;
  }
  return std::nullopt;
}

constexpr std::string_view field_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::RemoteHost: return "remote_host";
    case FieldKind::RemoteLogname: return "remote_logname";
    case FieldKind::RemoteUser: return "remote_user";
    case FieldKind::Timestamp: return "timestamp";
    case FieldKind::RequestLine: return "request_line";
    case FieldKind::Status: return "status";
    case FieldKind::BytesSent: return "bytes_sent";
    case FieldKind::Method: return "method";
    case FieldKind::UriPath: return "uri_path";
    case FieldKind::Protocol: return "protocol";
    case FieldKind::QueryString: return "query_string";
    case FieldKind::CanonicalServerName: return "canonical_server_name";
    case FieldKind::ServerName: return "server_name";
    case FieldKind::UserAgent: return "user_agent";
    case FieldKind::Referrer: return "referrer";
    case FieldKind::Separator: return "separator";
  }
  return "?";
}

// Field symbols that may appear in an annotation string.
inline constexpr std::string_view kFieldSymbols = "hlutrsbmUHqvViR";

// Full annotation alphabet: field symbols, separator, literal wrappers.
inline constexpr std::string_view kAnnotationAlphabet = "hlutrsbmUHqvViR_\"[]";

constexpr bool is_field_symbol(char c) {
  return kFieldSymbols.find(c) != std::string_view::npos;
}

constexpr bool is_annotation_char(char c) {
  return kAnnotationAlphabet.find(c) != std::string_view::npos;
}

}  // namespace logxlate
