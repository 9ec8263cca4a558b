#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "logxlate/format.hpp"

using namespace logxlate;

TEST_CASE("common log format is h l u [t] \"r\" s b", "[format]") {
  FormatSpec clf = clf_format();
  REQUIRE(clf.tokens.size() == 7);
  CHECK(clf.tokens[0] == FormatToken{FieldKind::RemoteHost, Wrapper::None});
  CHECK(clf.tokens[1] == FormatToken{FieldKind::RemoteLogname, Wrapper::None});
  CHECK(clf.tokens[2] == FormatToken{FieldKind::RemoteUser, Wrapper::None});
  CHECK(clf.tokens[3] == FormatToken{FieldKind::Timestamp, Wrapper::Brackets});
  CHECK(clf.tokens[4] == FormatToken{FieldKind::RequestLine, Wrapper::Quotes});
  CHECK(clf.tokens[5] == FormatToken{FieldKind::Status, Wrapper::None});
  CHECK(clf.tokens[6] == FormatToken{FieldKind::BytesSent, Wrapper::None});
}

TEST_CASE("combined format extends the common format with \"R\" \"i\"", "[format]") {
  FormatSpec elf = elf_format();
  REQUIRE(elf.tokens.size() == 9);
  FormatSpec clf = clf_format();
  for (std::size_t i = 0; i < clf.tokens.size(); ++i) {
    CHECK(elf.tokens[i] == clf.tokens[i]);
  }
  CHECK(elf.tokens[7] == FormatToken{FieldKind::Referrer, Wrapper::Quotes});
  CHECK(elf.tokens[8] == FormatToken{FieldKind::UserAgent, Wrapper::Quotes});
}

TEST_CASE("random formats have distinct unwrapped fields within bounds", "[format]") {
  Rng rng(123);
  for (int trial = 0; trial < 500; ++trial) {
    FormatSpec spec = sample_format(rng, 2, 15);
    REQUIRE(spec.tokens.size() >= 2);
    REQUIRE(spec.tokens.size() <= 15);
    std::set<FieldKind> seen;
    for (const FormatToken& tok : spec.tokens) {
      CHECK(tok.wrapper == Wrapper::None);
      CHECK(tok.field != FieldKind::Separator);
      REQUIRE(seen.insert(tok.field).second);
    }
  }
}

TEST_CASE("random format sizes span the requested range", "[format]") {
  Rng rng(321);
  std::set<std::size_t> sizes;
  for (int trial = 0; trial < 2000; ++trial) {
    sizes.insert(sample_format(rng, 2, 5).tokens.size());
  }
  REQUIRE(sizes == std::set<std::size_t>{2, 3, 4, 5});
}

TEST_CASE("every field can appear in first position", "[format]") {
  // The order must be a real shuffle, not the enum order.
  Rng rng(55);
  std::set<FieldKind> firsts;
  for (int trial = 0; trial < 3000; ++trial) {
    firsts.insert(sample_format(rng, 2, 15).tokens[0].field);
  }
  REQUIRE(firsts.size() == kValueFieldKinds.size());
}

TEST_CASE("random format bounds are validated", "[format]") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_format(rng, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(sample_format(rng, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(sample_format(rng, 2, 16), std::invalid_argument);
  CHECK_NOTHROW(sample_format(rng, 2, 2));
  CHECK_NOTHROW(sample_format(rng, 15, 15));
}
