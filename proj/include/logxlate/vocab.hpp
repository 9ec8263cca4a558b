#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "logxlate/record.hpp"

namespace logxlate {

// Character <-> index map. Index 0 is always PAD; the sorted distinct bytes
// come next; named specials (UNK for the source side, START/END for the
// target side) are appended after the characters.
class CharVocab {
 public:
  CharVocab() { char_to_id_.fill(-1); }

  static CharVocab from_chars(std::vector<unsigned char> sorted_chars,
                              std::vector<std::string> specials) {
    CharVocab v;
    v.chars_ = std::move(sorted_chars);
    v.specials_ = std::move(specials);
    for (std::size_t i = 0; i < v.chars_.size(); ++i) {
      v.char_to_id_[v.chars_[i]] = static_cast<int>(i) + 1;
    }
    return v;
  }

  int size() const {
    return 1 + static_cast<int>(chars_.size() + specials_.size());
  }
  static constexpr int pad_id() { return 0; }

  // -1 when the byte is out of vocabulary.
  int char_id(char c) const {
    return char_to_id_[static_cast<unsigned char>(c)];
  }

  // -1 when no such special exists on this side.
  int special_id(std::string_view name) const {
    for (std::size_t i = 0; i < specials_.size(); ++i) {
      if (specials_[i] == name) {
        return 1 + static_cast<int>(chars_.size() + i);
      }
    }
    return -1;
  }

  int unk_id() const { return special_id("UNK"); }
  int start_id() const { return special_id("START"); }
  int end_id() const { return special_id("END"); }

  bool is_char_id(int id) const {
    return id >= 1 && id <= static_cast<int>(chars_.size());
  }
  char char_of(int id) const {
    if (!is_char_id(id)) {
      throw std::out_of_range("CharVocab: id " + std::to_string(id) +
                              " is not a character");
    }
    return static_cast<char>(chars_[static_cast<std::size_t>(id - 1)]);
  }

  const std::vector<unsigned char>& chars() const { return chars_; }
  const std::vector<std::string>& specials() const { return specials_; }

  // Unknown bytes become UNK when the vocab has one, otherwise throw.
  std::vector<int> encode(std::string_view text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    const int unk = unk_id();
    for (char c : text) {
      int id = char_id(c);
      if (id < 0) {
        if (unk < 0) {
          throw std::out_of_range(std::string("CharVocab: byte '") + c +
                                  "' not in vocabulary");
        }
        id = unk;
      }
      ids.push_back(id);
    }
    return ids;
  }

  // Character ids only; specials and PAD are skipped.
  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    out.reserve(ids.size());
    for (int id : ids) {
      if (is_char_id(id)) out.push_back(char_of(id));
    }
    return out;
  }

  bool operator==(const CharVocab& other) const {
    return chars_ == other.chars_ && specials_ == other.specials_;
  }

 private:
  std::vector<unsigned char> chars_;
  std::vector<std::string> specials_;
  std::array<int, 256> char_to_id_;
};

struct VocabPair {
  CharVocab source;
  CharVocab target;
};

namespace vocab_detail {

inline std::vector<unsigned char> sorted_distinct_bytes(
    const std::vector<AnnotatedRecord>& corpus, bool raw_side) {
  std::array<bool, 256> seen{};
  for (const AnnotatedRecord& rec : corpus) {
    const std::string& s = raw_side ? rec.raw : rec.ann;
    for (char c : s) seen[static_cast<unsigned char>(c)] = true;
  }
  std::vector<unsigned char> out;
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) out.push_back(static_cast<unsigned char>(b));
  }
  return out;
}

}  // namespace vocab_detail

inline VocabPair build_vocab(const std::vector<AnnotatedRecord>& corpus) {
  if (corpus.empty()) {
    throw std::invalid_argument("build_vocab: empty corpus");
  }
  VocabPair v;
  v.source = CharVocab::from_chars(
      vocab_detail::sorted_distinct_bytes(corpus, true), {"UNK"});
  v.target = CharVocab::from_chars(
      vocab_detail::sorted_distinct_bytes(corpus, false), {"START", "END"});
  return v;
}

}  // namespace logxlate
