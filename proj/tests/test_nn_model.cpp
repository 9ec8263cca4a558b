#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "logxlate/nn/model.hpp"

using namespace logxlate;

namespace {
ModelConfig small_config(Arch arch, CellKind cell) {
  ModelConfig cfg;
  cfg.arch = arch;
  cfg.cell = cell;
  cfg.cells = 10;
  cfg.embedding_dim = 6;
  cfg.dropout = 0.0;
  return cfg;
}

using BatchD = Seq2Seq<double>::Batch;

const int kVs = 8, kVt = 7, kStart = 5, kEnd = 6;

BatchD tiny_batch() {
  return BatchD{{{1, 2, 3, 4}, {2, 2}}, {{1, 2, 3}, {4, 1, 2, 3, 4}}};
}
}  // namespace

TEST_CASE("an untrained all-zero model predicts uniformly", "[model]") {
  for (Arch arch : {Arch::Classic, Arch::Bahdanau, Arch::Luong}) {
    for (CellKind cell : {CellKind::Lstm, CellKind::Gru}) {
      Seq2Seq<double> m(small_config(arch, cell), kVs, kVt, kStart, kEnd);
      // parameters start zeroed: every logit is zero, so every position
      // costs exactly ln(target vocabulary size)
      double loss = m.forward_loss(tiny_batch());
      REQUIRE(loss == Catch::Approx(std::log(double(kVt))).epsilon(1e-12));
    }
  }
}

TEST_CASE("each architecture owns exactly its parameter tensors", "[model]") {
  auto has_params = [](Arch arch, std::vector<std::string> names) {
    Seq2Seq<double> m(small_config(arch, CellKind::Lstm), kVs, kVt, kStart, kEnd);
    for (const auto& n : names) {
      INFO(arch_name(arch) << " expects " << n);
      REQUIRE(m.params().has(n));
    }
    return m.params().names().size();
  };
  // shared: 2 embeddings + enc wx/wh/b + dec wx/wh/b + out w/b = 10
  CHECK(has_params(Arch::Classic, {"src_embed", "tgt_embed", "enc0_wx",
                                   "enc0_wh", "enc0_b", "dec0_wx", "dec0_wh",
                                   "dec0_b", "out_w", "out_b"}) == 10);
  CHECK(has_params(Arch::Bahdanau, {"att_w1", "att_w2", "att_v"}) == 13);
  CHECK(has_params(Arch::Luong, {"att_w", "att_wc"}) == 12);

  Seq2Seq<double> mc(small_config(Arch::Classic, CellKind::Lstm), kVs, kVt,
                     kStart, kEnd);
  CHECK_FALSE(mc.params().has("att_w"));
  CHECK_FALSE(mc.params().has("att_w1"));
}

TEST_CASE("attention-fed decoder input widens by the context size", "[model]") {
  ModelConfig cfg = small_config(Arch::Bahdanau, CellKind::Gru);
  Seq2Seq<double> ml(cfg, kVs, kVt, kStart, kEnd);
  // Bahdanau concatenates [embedding; context] at the first decoder layer.
  CHECK(ml.params().at("dec0_wx").cols() == cfg.embedding_dim + cfg.cells);
  cfg.arch = Arch::Luong;
  Seq2Seq<double> ms(cfg, kVs, kVt, kStart, kEnd);
  CHECK(ms.params().at("dec0_wx").cols() == cfg.embedding_dim);
}

TEST_CASE("stepwise log-probabilities are a normalized distribution", "[model]") {
  for (Arch arch : {Arch::Classic, Arch::Bahdanau, Arch::Luong}) {
    for (CellKind cell : {CellKind::Lstm, CellKind::Gru}) {
      Seq2Seq<double> m(small_config(arch, cell), kVs, kVt, kStart, kEnd);
      Rng rng(7);
      m.init_params(rng);
      auto enc = m.encode({1, 2, 3, 4, 5});
      auto st = m.initial_state(enc);
      auto lp = m.step_logprobs(enc, st, kStart);
      REQUIRE(lp.size() == kVt);
      double z = 0;
      for (Eigen::Index i = 0; i < lp.size(); ++i) z += std::exp(lp(i));
      REQUIRE(z == Catch::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("attention weights are a distribution over source positions", "[model]") {
  for (Arch arch : {Arch::Bahdanau, Arch::Luong}) {
    Seq2Seq<double> m(small_config(arch, CellKind::Lstm), kVs, kVt, kStart, kEnd);
    Rng rng(11);
    m.init_params(rng);
    auto enc = m.encode({1, 2, 3, 4, 5, 6});
    auto st = m.initial_state(enc);
    m.step_logprobs(enc, st, kStart);
    m.step_logprobs(enc, st, 1);
    REQUIRE(st.last_attention.size() == 6);
    double sum = 0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      REQUIRE(st.last_attention(i) >= 0.0);
      sum += st.last_attention(i);
    }
    REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("batched training loss equals stepwise decoding losses", "[model]") {
  // The masked batched path and the one-token-at-a-time inference path must
  // compute the same distributions when dropout is off.
  for (Arch arch : {Arch::Classic, Arch::Bahdanau, Arch::Luong}) {
    for (CellKind cell : {CellKind::Lstm, CellKind::Gru}) {
      Seq2Seq<double> m(small_config(arch, cell), kVs, kVt, kStart, kEnd);
      Rng rng(13);
      m.init_params(rng);
      std::vector<int> src{1, 4, 2, 7, 3};
      std::vector<int> tgt{2, 5, 1, 3};

      auto enc = m.encode(src);
      auto st = m.initial_state(enc);
      double total = 0;
      int y_prev = kStart;
      for (std::size_t t = 0; t <= tgt.size(); ++t) {
        auto lp = m.step_logprobs(enc, st, y_prev);
        int gold = t < tgt.size() ? tgt[t] : kEnd;
        total += lp(gold);
        y_prev = gold;
      }
      double stepwise = -total / static_cast<double>(tgt.size() + 1);
      double batched = m.forward_loss({{src}, {tgt}});
      REQUIRE(batched == Catch::Approx(stepwise).epsilon(1e-10));
    }
  }
}

TEST_CASE("padding does not leak into shorter batch members", "[model]") {
  // Mixed-length batch loss must be the position-weighted mean of the
  // records' individual losses; any mask slip shows up here.
  for (Arch arch : {Arch::Classic, Arch::Bahdanau, Arch::Luong}) {
    for (CellKind cell : {CellKind::Lstm, CellKind::Gru}) {
      Seq2Seq<double> m(small_config(arch, cell), kVs, kVt, kStart, kEnd);
      Rng rng(17);
      m.init_params(rng);
      BatchD a{{{1, 2, 3, 4, 5, 6, 7}}, {{1, 2, 3, 4, 5}}};
      BatchD b{{{2, 2}}, {{4}}};
      BatchD joint{{a.src[0], b.src[0]}, {a.tgt[0], b.tgt[0]}};
      double la = m.forward_loss(a), lb = m.forward_loss(b);
      double weighted = (la * 6 + lb * 2) / 8.0;  // positions include END
      REQUIRE(m.forward_loss(joint) == Catch::Approx(weighted).epsilon(1e-10));
    }
  }
}

TEST_CASE("gradient accumulation reports the same loss as evaluation", "[model]") {
  for (Arch arch : {Arch::Classic, Arch::Bahdanau, Arch::Luong}) {
    Seq2Seq<double> m(small_config(arch, CellKind::Gru), kVs, kVt, kStart, kEnd);
    Rng rng(19);
    m.init_params(rng);
    TensorStore<double> grads = m.params().zeros_like();
    Rng drop(1);
    REQUIRE(m.forward_backward(tiny_batch(), grads, drop) ==
            Catch::Approx(m.forward_loss(tiny_batch())).epsilon(1e-12));
    // and the gradients are not all zero
    double norm = 0;
    for (const auto& name : grads.names()) norm += grads.at(name).squaredNorm();
    REQUIRE(norm > 0.0);
  }
}

TEST_CASE("empty batches and empty sources are rejected or safe", "[model]") {
  Seq2Seq<double> m(small_config(Arch::Bahdanau, CellKind::Lstm), kVs, kVt,
                    kStart, kEnd);
  Rng rng(23);
  m.init_params(rng);
  // Empty source: context falls back to zeros, decoding still works.
  auto enc = m.encode({});
  auto st = m.initial_state(enc);
  auto lp = m.step_logprobs(enc, st, kStart);
  double z = 0;
  for (Eigen::Index i = 0; i < lp.size(); ++i) z += std::exp(lp(i));
  REQUIRE(z == Catch::Approx(1.0).epsilon(1e-9));
}
