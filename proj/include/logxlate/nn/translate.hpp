#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logxlate/nn/checkpoint.hpp"
#include "logxlate/nn/model.hpp"
#include "logxlate/vocab.hpp"

namespace logxlate {

// Inference wrapper: raw text in, predicted annotation string out. Decoding
// emits at most length(raw) + 8 characters and never produces specials or PAD
// (their scores are excluded), so outputs stay inside the target alphabet.
class Translator {
 public:
  explicit Translator(const Checkpoint& ck)
      : model_(model_from_checkpoint<float>(ck)),
        src_(ck.source_vocab),
        tgt_(ck.target_vocab) {}

  Translator(Seq2Seq<float> model, CharVocab src, CharVocab tgt)
      : model_(std::move(model)), src_(std::move(src)), tgt_(std::move(tgt)) {}

  const CharVocab& source_vocab() const { return src_; }
  const CharVocab& target_vocab() const { return tgt_; }
  const Seq2Seq<float>& model() const { return model_; }

  static std::size_t decode_cap(std::string_view raw) { return raw.size() + 8; }

  std::string greedy(std::string_view raw) const {
    const auto enc = model_.encode(src_.encode(raw));
    auto st = model_.initial_state(enc);
    const std::size_t cap = decode_cap(raw);
    std::vector<int> out;
    int y = tgt_.start_id();
    for (std::size_t step = 0; step < cap; ++step) {
      const Vec<float> lp = model_.step_logprobs(enc, st, y);
      const int id = best_allowed(lp);
      if (id == tgt_.end_id()) break;
      out.push_back(id);
      y = id;
    }
    return tgt_.decode(out);
  }

  std::string beam(std::string_view raw, int width) const {
    if (width < 1) throw std::invalid_argument("beam width must be >= 1");
    const auto enc = model_.encode(src_.encode(raw));
    const std::size_t cap = decode_cap(raw);

    struct Hyp {
      std::vector<int> ids;
      double logp = 0.0;
      Seq2Seq<float>::DecodeState st;
    };
    struct Done {
      std::vector<int> ids;
      double logp = 0.0;
      double norm = 0.0;
    };
    auto normalized = [](double logp, std::size_t len) {
      return logp / static_cast<double>(std::max<std::size_t>(1, len));
    };

    std::vector<Hyp> beams;
    beams.push_back({{}, 0.0, model_.initial_state(enc)});
    std::vector<Done> completed;

    for (std::size_t step = 0; step < cap && !beams.empty(); ++step) {
      struct Cand {
        std::size_t hyp;
        int id;
        double logp;
      };
      std::vector<Cand> cands;
      std::vector<Seq2Seq<float>::DecodeState> advanced;
      advanced.reserve(beams.size());
      for (std::size_t hi = 0; hi < beams.size(); ++hi) {
        Hyp& h = beams[hi];
        const int y = h.ids.empty() ? tgt_.start_id() : h.ids.back();
        auto st = h.st;
        const Vec<float> lp = model_.step_logprobs(enc, st, y);
        advanced.push_back(std::move(st));
        for (int id = 0; id < lp.size(); ++id) {
          if (!allowed(id)) continue;
          cands.push_back({hi, id, h.logp + static_cast<double>(lp(id))});
        }
      }
      // Deterministic order: score desc, then smaller character id, then
      // earlier hypothesis. With width 1 this reproduces greedy's tie rule.
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) {
                         if (a.logp != b.logp) return a.logp > b.logp;
                         if (a.id != b.id) return a.id < b.id;
                         return a.hyp < b.hyp;
                       });
      std::vector<Hyp> next;
      int taken = 0;
      for (const Cand& c : cands) {
        if (taken >= width) break;
        ++taken;  // an END consumes a beam slot, like any expansion
        if (c.id == tgt_.end_id()) {
          completed.push_back({beams[c.hyp].ids, c.logp,
                               normalized(c.logp, beams[c.hyp].ids.size())});
          continue;
        }
        Hyp h;
        h.ids = beams[c.hyp].ids;
        h.ids.push_back(c.id);
        h.logp = c.logp;
        h.st = advanced[c.hyp];
        next.push_back(std::move(h));
      }
      beams = std::move(next);
    }
    for (const Hyp& h : beams) {
      completed.push_back({h.ids, h.logp, normalized(h.logp, h.ids.size())});
    }
    const Done* best = nullptr;
    for (const Done& d : completed) {
      if (best == nullptr || d.norm > best->norm ||
          (d.norm == best->norm && d.logp > best->logp)) {
        best = &d;
      }
    }
    return best == nullptr ? std::string() : tgt_.decode(best->ids);
  }

  // Teacher-forced cumulative log-probability of `ann` (+ END) given `raw`.
  double sequence_logprob(std::string_view raw, std::string_view ann) const {
    const auto enc = model_.encode(src_.encode(raw));
    auto st = model_.initial_state(enc);
    std::vector<int> gold = tgt_.encode(ann);
    gold.push_back(tgt_.end_id());
    double total = 0.0;
    int y = tgt_.start_id();
    for (int id : gold) {
      const Vec<float> lp = model_.step_logprobs(enc, st, y);
      total += static_cast<double>(lp(id));
      y = id;
    }
    return total;
  }

 private:
  bool allowed(int id) const {
    return id != CharVocab::pad_id() && id != tgt_.start_id();
  }

  int best_allowed(const Vec<float>& lp) const {
    int best = -1;
    float best_lp = -std::numeric_limits<float>::infinity();
    for (int id = 0; id < lp.size(); ++id) {
      if (!allowed(id)) continue;
      if (best < 0 || lp(id) > best_lp) {
        best = id;
        best_lp = lp(id);
      }
    }
    return best;
  }

  Seq2Seq<float> model_;
  CharVocab src_;
  CharVocab tgt_;
};

}  // namespace logxlate
