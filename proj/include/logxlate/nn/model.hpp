#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "logxlate/nn/cells.hpp"
#include "logxlate/nn/config.hpp"
#include "logxlate/nn/tensor.hpp"
#include "logxlate/rng.hpp"

namespace logxlate {

// Encoder-decoder translator over character ids. Scalar-templated: float for
// training speed, double for finite-difference gradient verification.
//
// Batched layout: column-major matrices, one batch item per column. Time
// steps are packed side by side, so a per-layer activation cache is
// rows x (B*T) with step t occupying columns [t*B, (t+1)*B). Variable lengths
// are handled by masking: past a sequence's end the recurrent state is frozen
// (h_t = h_{t-1}) and the position contributes nothing to loss or gradients.
//
// Dropout (inverted scaling) applies to recurrent-layer *outputs*: whatever a
// layer feeds downstream — the next layer, attention, the output projection —
// sees the dropped value. States are not outputs: the layer's own recurrence,
// the LSTM cell state, and the encoder-to-decoder state handoff (the decoder's
// initial state) stay undropped, matching the convention that initial-state
// wiring bypasses dropout.
template <class S>
class Seq2Seq {
 public:
  struct Batch {
    std::vector<std::vector<int>> src;  // encoded raw lines
    std::vector<std::vector<int>> tgt;  // encoded annotations (chars only)
  };

  Seq2Seq(const ModelConfig& cfg, int src_vocab_size, int tgt_vocab_size,
          int start_id, int end_id)
      : cfg_(cfg),
        vs_(src_vocab_size),
        vt_(tgt_vocab_size),
        start_id_(start_id),
        end_id_(end_id),
        cell_(cfg.cell, cfg.cells) {
    validate_model_config(cfg);
    if (vs_ < 2 || vt_ < 3) throw std::invalid_argument("vocab too small");
    if (start_id_ < 0 || start_id_ >= vt_ || end_id_ < 0 || end_id_ >= vt_) {
      throw std::invalid_argument("START/END ids outside target vocab");
    }
    build_params();
  }

  const ModelConfig& config() const { return cfg_; }
  int src_vocab_size() const { return vs_; }
  int tgt_vocab_size() const { return vt_; }
  int start_id() const { return start_id_; }
  int end_id() const { return end_id_; }
  TensorStore<S>& params() { return params_; }
  const TensorStore<S>& params() const { return params_; }

  // Every parameter, biases included, draws from U[-range, range].
  void init_params(Rng& rng, S range = static_cast<S>(0.08)) {
    params_.init_uniform(rng, range);
  }

  // Teacher-forced loss with gradient accumulation (training mode: dropout
  // active when cfg.dropout > 0). Returns mean cross-entropy per non-pad
  // target position.
  S forward_backward(const Batch& batch, TensorStore<S>& grads,
                     Rng& dropout_rng) const {
    return run(batch, &grads, &dropout_rng);
  }

  // Evaluation-mode loss: no dropout, no gradients.
  S forward_loss(const Batch& batch) const { return run(batch, nullptr, nullptr); }

  // ---- single-sequence inference ----

  struct EncodedSource {
    Eigen::Index ts = 0;
    Mat<S> memory;                // H x Ts, top-layer encoder outputs
    Mat<S> w2e;                   // H x Ts, att_w2 * memory (Bahdanau)
    std::vector<Vec<S>> h_final;  // per layer
    std::vector<Vec<S>> c_final;  // per layer (LSTM)
  };

  struct DecodeState {
    std::vector<Vec<S>> h;
    std::vector<Vec<S>> c;
    Vec<S> last_attention;  // weights from the most recent step (empty for M_C)
  };

  // The classic architecture reads the source right to left: its only
  // input-output channel is the final encoder state, and reversal puts the
  // line's opening fields — the first thing the decoder must reproduce —
  // closest to that state. The attention architectures keep natural order
  // since they address every encoder position directly.
  bool reads_source_reversed() const { return cfg_.arch == Arch::Classic; }

  EncodedSource encode(const std::vector<int>& src_ids) const {
    const Eigen::Index H = cfg_.cells, L = cfg_.layers;
    const Eigen::Index Ts = static_cast<Eigen::Index>(src_ids.size());
    const Mat<S>& emb = params_.at("src_embed");
    EncodedSource enc;
    enc.ts = Ts;
    enc.h_final.assign(L, Vec<S>::Zero(H));
    enc.c_final.assign(L, Vec<S>::Zero(H));
    if (cfg_.arch != Arch::Classic) enc.memory.resize(H, Ts);

    const bool rev = reads_source_reversed();
    std::vector<Vec<S>> h(L, Vec<S>::Zero(H)), c(L, Vec<S>::Zero(H));
    Mat<S> cache(cell_.cache_rows(), 1);
    Vec<S> x, hnew(H), cnew(H);
    for (Eigen::Index t = 0; t < Ts; ++t) {
      x = emb.col(src_ids[static_cast<std::size_t>(rev ? Ts - 1 - t : t)]);
      for (Eigen::Index l = 0; l < L; ++l) {
        const auto& p = layer_params("enc", l);
        Vec<S> gx = p.wx * x + p.b;
        Vec<S> hh = p.wh * h[l];
        cell_.forward(gx, hh, h[l], c[l], hnew, cnew, cache);
        h[l] = hnew;
        if (cell_.has_cell_state()) c[l] = cnew;
        x = h[l];
      }
      if (cfg_.arch != Arch::Classic) enc.memory.col(t) = h[L - 1];
    }
    for (Eigen::Index l = 0; l < L; ++l) {
      enc.h_final[static_cast<std::size_t>(l)] = h[l];
      enc.c_final[static_cast<std::size_t>(l)] = c[l];
    }
    if (cfg_.arch == Arch::Bahdanau && Ts > 0) {
      enc.w2e.noalias() = params_.at("att_w2") * enc.memory;
    }
    return enc;
  }

  DecodeState initial_state(const EncodedSource& enc) const {
    DecodeState st;
    st.h = enc.h_final;
    st.c = enc.c_final;
    return st;
  }

  // Advances the decoder by one input token; returns log-probabilities over
  // the full target vocabulary.
  Vec<S> step_logprobs(const EncodedSource& enc, DecodeState& st,
                       int y_prev) const {
    const Eigen::Index H = cfg_.cells, L = cfg_.layers;
    Vec<S> x = params_.at("tgt_embed").col(y_prev);
    if (cfg_.arch == Arch::Bahdanau) {
      Vec<S> ctx = Vec<S>::Zero(H);
      if (enc.ts > 0) {
        Vec<S> q = params_.at("att_w1") * st.h[static_cast<std::size_t>(L - 1)];
        Mat<S> a = ((enc.w2e.colwise() + q).array().tanh()).matrix();
        Vec<S> scores = a.transpose() * params_.at("att_v").col(0);
        st.last_attention = softmax(scores);
        ctx.noalias() = enc.memory * st.last_attention;
      }
      Vec<S> xc(x.size() + H);
      xc << x, ctx;
      x = std::move(xc);
    }
    Mat<S> cache(cell_.cache_rows(), 1);
    Vec<S> hnew(H), cnew(H);
    for (Eigen::Index l = 0; l < L; ++l) {
      const auto& p = layer_params("dec", l);
      Vec<S> gx = p.wx * x + p.b;
      Vec<S> hh = p.wh * st.h[static_cast<std::size_t>(l)];
      cell_.forward(gx, hh, st.h[static_cast<std::size_t>(l)],
                    st.c[static_cast<std::size_t>(l)], hnew, cnew, cache);
      st.h[static_cast<std::size_t>(l)] = hnew;
      if (cell_.has_cell_state()) st.c[static_cast<std::size_t>(l)] = cnew;
      x = st.h[static_cast<std::size_t>(l)];
    }
    Vec<S> proj_in = st.h[static_cast<std::size_t>(L - 1)];
    if (cfg_.arch == Arch::Luong) {
      Vec<S> ctx = Vec<S>::Zero(H);
      if (enc.ts > 0) {
        Vec<S> wh = params_.at("att_w") * proj_in;
        Vec<S> scores = enc.memory.transpose() * wh;
        st.last_attention = softmax(scores);
        ctx.noalias() = enc.memory * st.last_attention;
      }
      Vec<S> cat(2 * H);
      cat << proj_in, ctx;
      proj_in = (params_.at("att_wc") * cat).array().tanh().matrix();
    }
    Vec<S> logits = params_.at("out_w") * proj_in + params_.at("out_b").col(0);
    const S m = logits.maxCoeff();
    const S lse = m + std::log((logits.array() - m).exp().sum());
    return (logits.array() - lse).matrix();
  }

 private:
  struct LayerParams {
    const Mat<S>& wx;
    const Mat<S>& wh;
    const Mat<S>& b;
  };
  LayerParams layer_params(const char* side, Eigen::Index l) const {
    const std::string p = std::string(side) + std::to_string(l);
    return {params_.at(p + "_wx"), params_.at(p + "_wh"), params_.at(p + "_b")};
  }

  void build_params() {
    const int H = cfg_.cells, E = cfg_.embedding_dim, L = cfg_.layers;
    const Eigen::Index G = cell_.gate_rows();
    params_.add("src_embed", E, vs_);
    params_.add("tgt_embed", E, vt_);
    for (int l = 0; l < L; ++l) {
      const std::string p = "enc" + std::to_string(l);
      params_.add(p + "_wx", G, l == 0 ? E : H);
      params_.add(p + "_wh", G, H);
      params_.add(p + "_b", G, 1);
    }
    const int dec_in0 = E + (cfg_.arch == Arch::Bahdanau ? H : 0);
    for (int l = 0; l < L; ++l) {
      const std::string p = "dec" + std::to_string(l);
      params_.add(p + "_wx", G, l == 0 ? dec_in0 : H);
      params_.add(p + "_wh", G, H);
      params_.add(p + "_b", G, 1);
    }
    if (cfg_.arch == Arch::Bahdanau) {
      params_.add("att_w1", H, H);
      params_.add("att_w2", H, H);
      params_.add("att_v", H, 1);
    } else if (cfg_.arch == Arch::Luong) {
      params_.add("att_w", H, H);
      params_.add("att_wc", H, 2 * H);
    }
    params_.add("out_w", vt_, H);
    params_.add("out_b", vt_, 1);
  }

  static Vec<S> softmax(Vec<S> scores) {
    const S m = scores.maxCoeff();
    Vec<S> e = (scores.array() - m).exp().matrix();
    return e / e.sum();
  }

  // ---- batched training path ----

  using Stride = Eigen::OuterStride<Eigen::Dynamic>;
  using ItemMap = Eigen::Map<Mat<S>, 0, Stride>;
  using ConstItemMap = Eigen::Map<const Mat<S>, 0, Stride>;

  // View of batch item b inside an H x (B*T) step-packed matrix: H x T.
  static ConstItemMap item_view(const Mat<S>& m, Eigen::Index b,
                                Eigen::Index rows, Eigen::Index B,
                                Eigen::Index T) {
    return ConstItemMap(m.data() + b * rows, rows, T, Stride(B * rows));
  }
  static ItemMap item_view(Mat<S>& m, Eigen::Index b, Eigen::Index rows,
                           Eigen::Index B, Eigen::Index T) {
    return ItemMap(m.data() + b * rows, rows, T, Stride(B * rows));
  }

  struct Prepared {
    Eigen::Index B = 0, Ts = 0, Tt = 0;
    std::vector<int> src_ids;   // Ts*B, index t*B+b, PAD-filled
    std::vector<int> in_ids;    // Tt*B, decoder inputs (START + tgt)
    std::vector<int> gold_ids;  // Tt*B, decoder goals (tgt + END)
    std::vector<Eigen::Index> slen, tlen;
    Mat<S> msrc, mtgt;          // B x T, 1 while the sequence is live
    S positions = 0;            // total live target positions
  };

  Prepared prepare(const Batch& batch) const {
    if (batch.src.size() != batch.tgt.size() || batch.src.empty()) {
      throw std::invalid_argument("batch: src/tgt size mismatch or empty");
    }
    Prepared p;
    p.B = static_cast<Eigen::Index>(batch.src.size());
    for (std::size_t i = 0; i < batch.src.size(); ++i) {
      if (batch.src[i].empty()) {
        throw std::invalid_argument("batch: empty source sequence");
      }
      p.slen.push_back(static_cast<Eigen::Index>(batch.src[i].size()));
      p.tlen.push_back(static_cast<Eigen::Index>(batch.tgt[i].size()) + 1);
      p.Ts = std::max(p.Ts, p.slen.back());
      p.Tt = std::max(p.Tt, p.tlen.back());
    }
    p.src_ids.assign(static_cast<std::size_t>(p.Ts * p.B), 0);
    p.in_ids.assign(static_cast<std::size_t>(p.Tt * p.B), 0);
    p.gold_ids.assign(static_cast<std::size_t>(p.Tt * p.B), 0);
    p.msrc = Mat<S>::Zero(p.B, p.Ts);
    p.mtgt = Mat<S>::Zero(p.B, p.Tt);
    const bool rev = reads_source_reversed();
    for (Eigen::Index b = 0; b < p.B; ++b) {
      const auto& src = batch.src[static_cast<std::size_t>(b)];
      const auto& tgt = batch.tgt[static_cast<std::size_t>(b)];
      const Eigen::Index sn = p.slen[static_cast<std::size_t>(b)];
      for (Eigen::Index t = 0; t < sn; ++t) {
        p.src_ids[static_cast<std::size_t>(t * p.B + b)] =
            src[static_cast<std::size_t>(rev ? sn - 1 - t : t)];
        p.msrc(b, t) = S(1);
      }
      for (Eigen::Index t = 0; t < p.tlen[static_cast<std::size_t>(b)]; ++t) {
        const std::size_t j = static_cast<std::size_t>(t * p.B + b);
        p.in_ids[j] = t == 0 ? start_id_
                             : tgt[static_cast<std::size_t>(t - 1)];
        p.gold_ids[j] = t + 1 == p.tlen[static_cast<std::size_t>(b)] + 0 &&
                                static_cast<std::size_t>(t) == tgt.size()
                            ? end_id_
                            : tgt[static_cast<std::size_t>(t)];
        p.mtgt(b, t) = S(1);
        p.positions += S(1);
      }
    }
    return p;
  }

  // One recurrent side's caches for a layer stack.
  struct SideCache {
    std::vector<Mat<S>> cache;  // per layer, cache_rows x (B*T)
    std::vector<Mat<S>> h;      // per layer, H x (B*(T+1)), block 0 = init
    std::vector<Mat<S>> c;      // per layer (LSTM)
    std::vector<Mat<S>> hd;     // per layer, dropped outputs, H x (B*T)
    std::vector<Mat<S>> dropm;  // per layer (training with dropout only)
  };

  void alloc_side(SideCache& sc, Eigen::Index B, Eigen::Index T,
                  bool dropout_on) const {
    const Eigen::Index H = cfg_.cells, L = cfg_.layers;
    sc.cache.assign(L, Mat<S>(cell_.cache_rows(), B * T));
    sc.h.assign(L, Mat<S>::Zero(H, B * (T + 1)));
    if (cell_.has_cell_state()) sc.c.assign(L, Mat<S>::Zero(H, B * (T + 1)));
    sc.hd.assign(L, Mat<S>(H, B * T));
    if (dropout_on) sc.dropm.assign(L, Mat<S>(H, B * T));
  }

  void fill_dropout_mask(Mat<S>& m, Rng& rng) const {
    const S keep_scale = S(1) / static_cast<S>(1.0 - cfg_.dropout);
    S* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      data[i] = rng.bernoulli(1.0 - cfg_.dropout) ? keep_scale : S(0);
    }
  }

  // Masked recurrent step: reads h/c block t, writes block t+1, records the
  // activation cache. Frozen columns (mask 0) copy the previous state.
  void step_layer(const Mat<S>& wh, const Mat<S>& gx_t, Mat<S>& h_all,
                  Mat<S>* c_all, Mat<S>& cache_all, Eigen::Index t,
                  Eigen::Index B, const Mat<S>& mask, Mat<S>& hh, Mat<S>& hnew,
                  Mat<S>& cnew) const {
    const Eigen::Index H = cfg_.cells;
    auto h_prev = h_all.middleCols(t * B, B);
    auto h_next = h_all.middleCols((t + 1) * B, B);
    auto cache_t = cache_all.middleCols(t * B, B);
    hh.noalias() = wh * h_prev;
    const auto m = mask.col(t).transpose().array();  // 1 x B
    if (cell_.has_cell_state()) {
      auto c_prev = c_all->middleCols(t * B, B);
      auto c_next = c_all->middleCols((t + 1) * B, B);
      cell_.forward(gx_t, hh, h_prev, c_prev, hnew, cnew, cache_t);
      h_next.array() = hnew.array().rowwise() * m +
                       h_prev.array().rowwise() * (S(1) - m);
      c_next.array() = cnew.array().rowwise() * m +
                       c_prev.array().rowwise() * (S(1) - m);
    } else {
      cell_.forward(gx_t, hh, h_prev, h_prev, hnew, cnew, cache_t);
      h_next.array() = hnew.array().rowwise() * m +
                       h_prev.array().rowwise() * (S(1) - m);
    }
  }

  // Reverse of step_layer. dh_total: full gradient on h block t+1 (consumer
  // deposits plus carry). dc_carry: gradient on c block t+1. Writes dgx and
  // dghh for step t and updates the carries to refer to block t.
  void step_layer_back(const Mat<S>& wh, const Mat<S>& h_all,
                       const Mat<S>* c_all, const Mat<S>& cache_all,
                       Eigen::Index t, Eigen::Index B, const Mat<S>& mask,
                       Mat<S>& dh_carry, Mat<S>& dc_carry, Mat<S>& dgx_t_out,
                       Mat<S>& dghh, Mat<S>& dh_new, Mat<S>& dc_new,
                       Mat<S>& dh_direct) const {
    const Eigen::Index H = cfg_.cells;
    auto h_prev = h_all.middleCols(t * B, B);
    auto cache_t = cache_all.middleCols(t * B, B);
    const auto m = mask.col(t).transpose().array();
    dh_new.array() = dh_carry.array().rowwise() * m;
    if (cell_.has_cell_state()) {
      auto c_prev = c_all->middleCols(t * B, B);
      dc_new.array() = dc_carry.array().rowwise() * m;
      cell_.backward(dh_new, dc_new, cache_t, h_prev, c_prev, dgx_t_out, dghh,
                     dh_direct);
      dc_carry.array() = dc_carry.array().rowwise() * (S(1) - m) + dc_new.array();
    } else {
      cell_.backward(dh_new, dc_new, cache_t, h_prev, h_prev, dgx_t_out, dghh,
                     dh_direct);
    }
    dh_carry.array() = dh_carry.array().rowwise() * (S(1) - m) +
                       dh_direct.array();
    dh_carry.noalias() += wh.transpose() * dghh;
  }

  S run(const Batch& batch, TensorStore<S>* grads, Rng* dropout_rng) const {
    const Eigen::Index H = cfg_.cells, E = cfg_.embedding_dim, L = cfg_.layers;
    const Eigen::Index G = cell_.gate_rows(), K = vt_;
    const bool training = grads != nullptr;
    const bool dropout_on = training && cfg_.dropout > 0.0;
    if (dropout_on && dropout_rng == nullptr) {
      throw std::invalid_argument("dropout requires an rng");
    }
    const Prepared p = prepare(batch);
    const Eigen::Index B = p.B, Ts = p.Ts, Tt = p.Tt;

    // ---------- encoder forward ----------
    SideCache enc;
    alloc_side(enc, B, Ts, dropout_on);
    if (dropout_on) {
      for (Eigen::Index l = 0; l < L; ++l) fill_dropout_mask(enc.dropm[l], *dropout_rng);
    }

    Mat<S> x0(E, B * Ts);
    for (Eigen::Index j = 0; j < Ts * B; ++j) {
      x0.col(j) = params_.at("src_embed").col(p.src_ids[static_cast<std::size_t>(j)]);
    }
    Mat<S> hh(G, B), hnew(H, B), cnew(H, B);
    std::vector<Mat<S>> enc_gx(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      const auto lp = layer_params("enc", l);
      const Mat<S>& input = l == 0 ? x0 : enc.hd[l - 1];
      enc_gx[l].noalias() = lp.wx * input;
      enc_gx[l].colwise() += lp.b.col(0);
      for (Eigen::Index t = 0; t < Ts; ++t) {
        step_layer(lp.wh, enc_gx[l].middleCols(t * B, B), enc.h[l],
                   cell_.has_cell_state() ? &enc.c[l] : nullptr, enc.cache[l],
                   t, B, p.msrc, hh, hnew, cnew);
      }
      if (dropout_on) {
        enc.hd[l] = enc.h[l].rightCols(B * Ts).cwiseProduct(enc.dropm[l]);
      } else {
        enc.hd[l] = enc.h[l].rightCols(B * Ts);
      }
    }

    // Handoff: final encoder states become the decoder's initial states.
    // States are not layer outputs, so dropout never touches them.
    std::vector<Mat<S>> h0_dec(L), c0_dec;
    if (cell_.has_cell_state()) c0_dec.resize(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      h0_dec[l] = enc.h[l].middleCols(Ts * B, B);
      if (cell_.has_cell_state()) c0_dec[l] = enc.c[l].middleCols(Ts * B, B);
    }

    const Mat<S>& ENC = enc.hd[L - 1];  // attention memory (dropped)
    Mat<S> w2e;
    if (cfg_.arch == Arch::Bahdanau) {
      w2e.noalias() = params_.at("att_w2") * ENC;
    }

    // ---------- decoder forward ----------
    SideCache dec;
    alloc_side(dec, B, Tt, dropout_on);
    if (dropout_on) {
      for (Eigen::Index l = 0; l < L; ++l) fill_dropout_mask(dec.dropm[l], *dropout_rng);
    }
    for (Eigen::Index l = 0; l < L; ++l) {
      dec.h[l].leftCols(B) = h0_dec[l];
      if (cell_.has_cell_state()) dec.c[l].leftCols(B) = c0_dec[l];
    }

    const Eigen::Index dec_in0 = E + (cfg_.arch == Arch::Bahdanau ? H : 0);
    Mat<S> x0dec(dec_in0, B * Tt);
    for (Eigen::Index j = 0; j < Tt * B; ++j) {
      x0dec.col(j).topRows(E) =
          params_.at("tgt_embed").col(p.in_ids[static_cast<std::size_t>(j)]);
    }

    Mat<S> alpha_all, wh_all, ctx_all, htilde_all;
    const bool attn = cfg_.arch != Arch::Classic;
    if (attn) alpha_all = Mat<S>::Zero(Ts, B * Tt);
    if (cfg_.arch == Arch::Luong) {
      wh_all.resize(H, B * Tt);
      ctx_all.resize(H, B * Tt);
      htilde_all.resize(H, B * Tt);
    }

    Mat<S> gx_t(G, B), w1q(H, B), abuf(H, Ts), scores(Ts, 1);
    const S neg_inf = -std::numeric_limits<S>::infinity();
    for (Eigen::Index t = 0; t < Tt; ++t) {
      if (cfg_.arch == Arch::Bahdanau) {
        // Query = previous top-layer output (dropped); t=0 queries with the
        // handoff state, which bypasses dropout like any initial state.
        const Mat<S> q = t == 0
                             ? h0_dec[L - 1]
                             : Mat<S>(dec.hd[L - 1].middleCols((t - 1) * B, B));
        w1q.noalias() = params_.at("att_w1") * q;
        auto ctx = x0dec.middleCols(t * B, B).bottomRows(H);
        for (Eigen::Index b = 0; b < B; ++b) {
          auto enc_b = item_view(ENC, b, H, B, Ts);
          auto w2e_b = item_view(w2e, b, H, B, Ts);
          abuf = (w2e_b.colwise() + w1q.col(b)).array().tanh();
          scores.noalias() = abuf.transpose() * params_.at("att_v").col(0);
          for (Eigen::Index s = p.slen[static_cast<std::size_t>(b)]; s < Ts; ++s) {
            scores(s, 0) = neg_inf;
          }
          Vec<S> alpha = softmax(scores.col(0));
          alpha_all.col(t * B + b) = alpha;
          ctx.col(b).noalias() = enc_b * alpha;
        }
      }
      for (Eigen::Index l = 0; l < L; ++l) {
        const auto lp = layer_params("dec", l);
        const auto input = l == 0
                               ? x0dec.middleCols(t * B, B)
                               : Mat<S>(dec.hd[l - 1].middleCols((t)*B, B));
        gx_t.noalias() = lp.wx * input;
        gx_t.colwise() += lp.b.col(0);
        step_layer(lp.wh, gx_t, dec.h[l],
                   cell_.has_cell_state() ? &dec.c[l] : nullptr, dec.cache[l],
                   t, B, p.mtgt, hh, hnew, cnew);
        auto hd_t = dec.hd[l].middleCols(t * B, B);
        if (dropout_on) {
          hd_t = dec.h[l].middleCols((t + 1) * B, B)
                     .cwiseProduct(dec.dropm[l].middleCols(t * B, B));
        } else {
          hd_t = dec.h[l].middleCols((t + 1) * B, B);
        }
      }
      if (cfg_.arch == Arch::Luong) {
        auto hd_t = dec.hd[L - 1].middleCols(t * B, B);
        auto wh_t = wh_all.middleCols(t * B, B);
        wh_t.noalias() = params_.at("att_w") * hd_t;
        auto ctx_t = ctx_all.middleCols(t * B, B);
        for (Eigen::Index b = 0; b < B; ++b) {
          auto enc_b = item_view(ENC, b, H, B, Ts);
          scores.noalias() = enc_b.transpose() * wh_t.col(b);
          for (Eigen::Index s = p.slen[static_cast<std::size_t>(b)]; s < Ts; ++s) {
            scores(s, 0) = neg_inf;
          }
          Vec<S> alpha = softmax(scores.col(0));
          alpha_all.col(t * B + b) = alpha;
          ctx_t.col(b).noalias() = enc_b * alpha;
        }
        Mat<S> cat(2 * H, B);
        cat << hd_t, ctx_t;
        htilde_all.middleCols(t * B, B) =
            (params_.at("att_wc") * cat).array().tanh();
      }
    }

    // ---------- loss ----------
    const Mat<S>& proj_in =
        cfg_.arch == Arch::Luong ? htilde_all : dec.hd[L - 1];
    Mat<S> probs(K, B * Tt);
    probs.noalias() = params_.at("out_w") * proj_in;
    probs.colwise() += params_.at("out_b").col(0);
    S total = S(0);
    for (Eigen::Index t = 0; t < Tt; ++t) {
      auto block = probs.middleCols(t * B, B);
      Eigen::Matrix<S, 1, Eigen::Dynamic> mx = block.colwise().maxCoeff();
      block.array().rowwise() -= mx.array();
      block.array() = block.array().exp();
      Eigen::Matrix<S, 1, Eigen::Dynamic> z = block.colwise().sum();
      for (Eigen::Index b = 0; b < B; ++b) {
        if (p.mtgt(b, t) == S(0)) continue;
        const int gold = p.gold_ids[static_cast<std::size_t>(t * B + b)];
        total += std::log(z(b)) - std::log(block(gold, b));
      }
      block.array().rowwise() /= z.array();
    }
    const S loss = total / p.positions;
    if (!training) return loss;

    // ---------- backward ----------
    TensorStore<S>& g = *grads;
    // dlogits, in place over probs: (softmax - onehot) * mask / positions
    for (Eigen::Index t = 0; t < Tt; ++t) {
      auto block = probs.middleCols(t * B, B);
      for (Eigen::Index b = 0; b < B; ++b) {
        if (p.mtgt(b, t) == S(0)) {
          block.col(b).setZero();
          continue;
        }
        block(p.gold_ids[static_cast<std::size_t>(t * B + b)], b) -= S(1);
        block.col(b) /= p.positions;
      }
    }
    g.at("out_w").noalias() += probs * proj_in.transpose();
    g.at("out_b").col(0) += probs.rowwise().sum();
    Mat<S> dproj(H, B * Tt);
    dproj.noalias() = params_.at("out_w").transpose() * probs;

    // Consumer-gradient accumulators on each layer's (undropped) h, plus the
    // attention-memory gradient for the encoder top layer.
    std::vector<Mat<S>> dec_acc(L, Mat<S>::Zero(H, B * Tt));
    Mat<S> dENC = Mat<S>::Zero(H, B * Ts);
    Mat<S> dW2E;
    if (cfg_.arch == Arch::Bahdanau) dW2E = Mat<S>::Zero(H, B * Ts);

    auto deposit = [&](std::vector<Mat<S>>& acc, const SideCache& sc,
                       Eigen::Index l, Eigen::Index t, const Mat<S>& grad) {
      auto dst = acc[l].middleCols(t * B, B);
      if (dropout_on) {
        dst += grad.cwiseProduct(sc.dropm[l].middleCols(t * B, B));
      } else {
        dst += grad;
      }
    };

    if (cfg_.arch == Arch::Luong) {
      Mat<S> dwh(H, B), dctx(H, B), dhd(H, B), cat(2 * H, B), dpre(H, B);
      for (Eigen::Index t = 0; t < Tt; ++t) {
        auto htilde_t = htilde_all.middleCols(t * B, B);
        dpre.array() = dproj.middleCols(t * B, B).array() *
                       (S(1) - htilde_t.array().square());
        auto hd_t = dec.hd[L - 1].middleCols(t * B, B);
        cat << hd_t, ctx_all.middleCols(t * B, B);
        g.at("att_wc").noalias() += dpre * cat.transpose();
        Mat<S> dcat = params_.at("att_wc").transpose() * dpre;
        dhd = dcat.topRows(H);
        dctx = dcat.bottomRows(H);
        for (Eigen::Index b = 0; b < B; ++b) {
          if (p.mtgt(b, t) == S(0)) continue;
          auto enc_b = item_view(ENC, b, H, B, Ts);
          auto alpha = alpha_all.col(t * B + b);
          Vec<S> dalpha = enc_b.transpose() * dctx.col(b);
          const S dot = alpha.dot(dalpha);
          Vec<S> ds = alpha.array() * (dalpha.array() - dot);
          dwh.col(b).noalias() = enc_b * ds;
          auto denc_b = item_view(dENC, b, H, B, Ts);
          denc_b.noalias() += wh_all.col(t * B + b) * ds.transpose();
          denc_b.noalias() += dctx.col(b) * alpha.transpose();
        }
        for (Eigen::Index b = 0; b < B; ++b) {
          if (p.mtgt(b, t) == S(0)) dwh.col(b).setZero();
        }
        g.at("att_w").noalias() += dwh * hd_t.transpose();
        dhd.noalias() += params_.at("att_w").transpose() * dwh;
        deposit(dec_acc, dec, L - 1, t, dhd);
      }
    } else {
      // M_C and M_L project the top decoder output directly.
      for (Eigen::Index t = 0; t < Tt; ++t) {
        deposit(dec_acc, dec, L - 1, t, dproj.middleCols(t * B, B));
      }
    }

    // Decoder BPTT, time-major so the additive attention's query gradient
    // (into step t-1) lands before step t-1 is processed.
    std::vector<Mat<S>> ddec_h0(L), ddec_c0(L);
    std::vector<Mat<S>> dh_carry(L, Mat<S>::Zero(H, B));
    std::vector<Mat<S>> dc_carry(L, Mat<S>::Zero(H, B));
    std::vector<Mat<S>> dgx_dec(L);
    for (Eigen::Index l = 0; l < L; ++l) dgx_dec[l].resize(G, B * Tt);
    Mat<S> dghh(G, B), dh_new(H, B), dc_new(H, B), dh_direct(H, B);
    Mat<S> dx0dec;
    if (cfg_.arch == Arch::Bahdanau) dx0dec.resize(dec_in0, B * Tt);

    for (Eigen::Index t = Tt - 1; t >= 0; --t) {
      for (Eigen::Index l = L - 1; l >= 0; --l) {
        dh_carry[l] += dec_acc[l].middleCols(t * B, B);
        auto dgx_t = dgx_dec[l].middleCols(t * B, B);
        {
          Mat<S> dgx_tmp(G, B);
          step_layer_back(params_.at("dec" + std::to_string(l) + "_wh"),
                          dec.h[l], cell_.has_cell_state() ? &dec.c[l] : nullptr,
                          dec.cache[l], t, B, p.mtgt, dh_carry[l], dc_carry[l],
                          dgx_tmp, dghh, dh_new, dc_new, dh_direct);
          dgx_t = dgx_tmp;
          g.at("dec" + std::to_string(l) + "_wh").noalias() +=
              dghh * dec.h[l].middleCols(t * B, B).transpose();
        }
        if (l > 0) {
          Mat<S> din = params_.at("dec" + std::to_string(l) + "_wx").transpose() *
                       dgx_t;
          deposit(dec_acc, dec, l - 1, t, din);
        } else if (cfg_.arch == Arch::Bahdanau) {
          auto dx_t = dx0dec.middleCols(t * B, B);
          dx_t.noalias() = params_.at("dec0_wx").transpose() * dgx_t;
          // Attention backward for step t; query gradient goes to t-1.
          const Mat<S> q =
              t == 0 ? h0_dec[L - 1]
                     : Mat<S>(dec.hd[L - 1].middleCols((t - 1) * B, B));
          w1q.noalias() = params_.at("att_w1") * q;
          Mat<S> dqs = Mat<S>::Zero(H, B);
          auto dctx = dx_t.bottomRows(H);
          for (Eigen::Index b = 0; b < B; ++b) {
            if (p.mtgt(b, t) == S(0)) continue;
            auto enc_b = item_view(ENC, b, H, B, Ts);
            auto w2e_b = item_view(w2e, b, H, B, Ts);
            auto alpha = alpha_all.col(t * B + b);
            Vec<S> dalpha = enc_b.transpose() * dctx.col(b);
            const S dot = alpha.dot(dalpha);
            Vec<S> ds = alpha.array() * (dalpha.array() - dot);
            auto denc_b = item_view(dENC, b, H, B, Ts);
            denc_b.noalias() += dctx.col(b) * alpha.transpose();
            abuf = (w2e_b.colwise() + w1q.col(b)).array().tanh();
            g.at("att_v").col(0).noalias() += abuf * ds;
            Mat<S> dq_pre =
                (params_.at("att_v").col(0) * ds.transpose()).array() *
                (S(1) - abuf.array().square());
            auto dw2e_b = item_view(dW2E, b, H, B, Ts);
            dw2e_b += dq_pre;
            dqs.col(b) = dq_pre.rowwise().sum();
          }
          g.at("att_w1").noalias() += dqs * q.transpose();
          Mat<S> dq = params_.at("att_w1").transpose() * dqs;
          if (t == 0) {
            // The t=0 query was h0_dec itself; its gradient joins the
            // recurrence's initial-state gradient directly.
            dh_carry[L - 1] += dq;
          } else {
            deposit(dec_acc, dec, L - 1, t - 1, dq);
          }
        }
      }
    }
    // Carries now hold gradients on the decoder's initial state.
    for (Eigen::Index l = 0; l < L; ++l) {
      ddec_h0[l] = dh_carry[l];
      if (cell_.has_cell_state()) ddec_c0[l] = dc_carry[l];
    }

    // Decoder weight/bias/input gradients (batched over every step).
    for (Eigen::Index l = 0; l < L; ++l) {
      const std::string nm = "dec" + std::to_string(l);
      const Mat<S>& input =
          l == 0 ? x0dec
                 : dec.hd[l - 1];
      g.at(nm + "_wx").noalias() += dgx_dec[l] * input.transpose();
      g.at(nm + "_b").col(0) += dgx_dec[l].rowwise().sum();
    }
    {
      // Embedding gradients for decoder inputs.
      Mat<S> dx0;
      if (cfg_.arch == Arch::Bahdanau) {
        dx0 = std::move(dx0dec);  // built per step above
      } else {
        dx0.noalias() = params_.at("dec0_wx").transpose() * dgx_dec[0];
      }
      Mat<S>& demb = g.at("tgt_embed");
      for (Eigen::Index j = 0; j < Tt * B; ++j) {
        demb.col(p.in_ids[static_cast<std::size_t>(j)]) += dx0.col(j).topRows(E);
      }
    }

    // ---------- encoder backward ----------
    if (cfg_.arch == Arch::Bahdanau) {
      g.at("att_w2").noalias() += dW2E * ENC.transpose();
      dENC.noalias() += params_.at("att_w2").transpose() * dW2E;
    }
    std::vector<Mat<S>> enc_acc(L, Mat<S>::Zero(H, B * Ts));
    if (attn) {
      // dENC is a gradient on dropped outputs of the encoder top layer.
      if (dropout_on) {
        enc_acc[L - 1] += dENC.cwiseProduct(enc.dropm[L - 1]);
      } else {
        enc_acc[L - 1] += dENC;
      }
    }
    for (Eigen::Index l = L - 1; l >= 0; --l) {
      Mat<S> dh_c = ddec_h0[l];
      Mat<S> dc_c = cell_.has_cell_state() ? ddec_c0[l] : Mat<S>::Zero(H, B);
      Mat<S> dgx_all(G, B * Ts);
      const std::string nm = "enc" + std::to_string(l);
      for (Eigen::Index t = Ts - 1; t >= 0; --t) {
        dh_c += enc_acc[l].middleCols(t * B, B);
        Mat<S> dgx_tmp(G, B);
        step_layer_back(params_.at(nm + "_wh"), enc.h[l],
                        cell_.has_cell_state() ? &enc.c[l] : nullptr,
                        enc.cache[l], t, B, p.msrc, dh_c, dc_c, dgx_tmp, dghh,
                        dh_new, dc_new, dh_direct);
        dgx_all.middleCols(t * B, B) = dgx_tmp;
        g.at(nm + "_wh").noalias() +=
            dghh * enc.h[l].middleCols(t * B, B).transpose();
      }
      const Mat<S>& input = l == 0 ? x0 : enc.hd[l - 1];
      g.at(nm + "_wx").noalias() += dgx_all * input.transpose();
      g.at(nm + "_b").col(0) += dgx_all.rowwise().sum();
      Mat<S> din = params_.at(nm + "_wx").transpose() * dgx_all;
      if (l > 0) {
        if (dropout_on) {
          enc_acc[l - 1] += din.cwiseProduct(enc.dropm[l - 1]);
        } else {
          enc_acc[l - 1] += din;
        }
      } else {
        Mat<S>& demb = g.at("src_embed");
        for (Eigen::Index j = 0; j < Ts * B; ++j) {
          demb.col(p.src_ids[static_cast<std::size_t>(j)]) += din.col(j);
        }
      }
    }
    return loss;
  }

  ModelConfig cfg_;
  int vs_, vt_, start_id_, end_id_;
  CellOps<S> cell_;
  TensorStore<S> params_;
};

}  // namespace logxlate
