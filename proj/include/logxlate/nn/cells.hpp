#pragma once

#include <Eigen/Dense>

#include "logxlate/nn/config.hpp"
#include "logxlate/nn/tensor.hpp"

namespace logxlate {

// Elementwise recurrent-cell math on batched column matrices. The caller owns
// the GEMMs: gx = Wx*x + b and hh = Wh*h_prev arrive precomputed, gradients
// leave as d(gx) and d(hh) for the caller to push through the weights.
//
// Gate row layout (H rows each):
//   LSTM: gx/hh rows [i f g o]; cache rows hold the activated i f g o.
//   GRU:  gx/hh rows [z r n];   cache rows hold activated z r n plus raw hh_n
//         (the reset-gated recurrent term, needed for the reset gradient).
template <class S>
class CellOps {
 public:
  CellOps(CellKind kind, Eigen::Index hidden) : kind_(kind), h_(hidden) {}

  CellKind kind() const { return kind_; }
  Eigen::Index hidden() const { return h_; }
  Eigen::Index gate_rows() const { return kind_ == CellKind::Lstm ? 4 * h_ : 3 * h_; }
  Eigen::Index cache_rows() const { return 4 * h_; }
  bool has_cell_state() const { return kind_ == CellKind::Lstm; }

  // h_out/c_out may not alias h_prev/c_prev. For GRU, c_* are ignored.
  template <class MGx, class MHh, class MHp, class MCp, class MH, class MC, class MK>
  void forward(const MGx& gx, const MHh& hh, const MHp& h_prev,
               const MCp& c_prev, MH&& h_out, MC&& c_out, MK&& cache) const {
    const Eigen::Index H = h_;
    if (kind_ == CellKind::Lstm) {
      cache.topRows(3 * H) = gx.topRows(3 * H) + hh.topRows(3 * H);
      cache.middleRows(3 * H, H) = gx.middleRows(3 * H, H) + hh.middleRows(3 * H, H);
      auto i = cache.topRows(H).array();
      auto f = cache.middleRows(H, H).array();
      auto g = cache.middleRows(2 * H, H).array();
      auto o = cache.middleRows(3 * H, H).array();
      i = S(1) / (S(1) + (-i).exp());
      f = S(1) / (S(1) + (-f).exp());
      g = g.tanh();
      o = S(1) / (S(1) + (-o).exp());
      c_out.array() = f * c_prev.array() + i * g;
      h_out.array() = o * c_out.array().tanh();
    } else {
      auto z = cache.topRows(H).array();
      auto r = cache.middleRows(H, H).array();
      auto n = cache.middleRows(2 * H, H).array();
      auto hh_n = cache.middleRows(3 * H, H).array();
      z = S(1) / (S(1) + (-(gx.topRows(H) + hh.topRows(H))).array().exp());
      r = S(1) / (S(1) + (-(gx.middleRows(H, H) + hh.middleRows(H, H))).array().exp());
      hh_n = hh.middleRows(2 * H, H).array();
      n = (gx.middleRows(2 * H, H).array() + r * hh_n).tanh();
      h_out.array() = (S(1) - z) * n + z * h_prev.array();
    }
  }

  // dh: incoming dL/dh_t. dc: LSTM cell-state carry, read and replaced with
  // dc_prev (ignored for GRU). Writes dgx, dghh (gate_rows x B) and the
  // direct (non-Wh) part of dh_prev.
  template <class MDh, class MDc, class MK, class MHp, class MCp, class MDgx,
            class MDghh, class MDhp>
  void backward(const MDh& dh, MDc&& dc, const MK& cache, const MHp& h_prev,
                const MCp& c_prev, MDgx&& dgx, MDghh&& dghh,
                MDhp&& dh_prev_direct) const {
    const Eigen::Index H = h_;
    if (kind_ == CellKind::Lstm) {
      auto i = cache.topRows(H).array();
      auto f = cache.middleRows(H, H).array();
      auto g = cache.middleRows(2 * H, H).array();
      auto o = cache.middleRows(3 * H, H).array();
      // c_t recomputed from the activated gates; avoids caching it twice.
      Mat<S> c = (f * c_prev.array() + i * g).matrix();
      Mat<S> tc = c.array().tanh().matrix();
      dc.array() += dh.array() * o * (S(1) - tc.array().square());
      dgx.topRows(H).array() = dc.array() * g * i * (S(1) - i);
      dgx.middleRows(H, H).array() = dc.array() * c_prev.array() * f * (S(1) - f);
      dgx.middleRows(2 * H, H).array() = dc.array() * i * (S(1) - g.square());
      dgx.middleRows(3 * H, H).array() = dh.array() * tc.array() * o * (S(1) - o);
      dc.array() *= f;  // carry to t-1
      dghh = dgx;
      dh_prev_direct.setZero();
    } else {
      auto z = cache.topRows(H).array();
      auto r = cache.middleRows(H, H).array();
      auto n = cache.middleRows(2 * H, H).array();
      auto hh_n = cache.middleRows(3 * H, H).array();
      Mat<S> dgn = (dh.array() * (S(1) - z) * (S(1) - n.square())).matrix();
      dgx.topRows(H).array() =
          dh.array() * (h_prev.array() - n) * z * (S(1) - z);
      dgx.middleRows(H, H).array() =
          dgn.array() * hh_n * r * (S(1) - r);
      dgx.middleRows(2 * H, H) = dgn;
      dghh.topRows(2 * H) = dgx.topRows(2 * H);
      dghh.middleRows(2 * H, H).array() = dgn.array() * r;
      dh_prev_direct.array() = dh.array() * z;
    }
  }

 private:
  CellKind kind_;
  Eigen::Index h_;
};

}  // namespace logxlate
