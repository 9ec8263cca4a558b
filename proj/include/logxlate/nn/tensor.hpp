#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "logxlate/rng.hpp"

namespace logxlate {

// Column-major matrices throughout; a batch occupies columns.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Named parameter container. Iteration order is insertion order so Adam
// state, gradient accumulation, and checkpoints all walk the same sequence.
template <class S>
class TensorStore {
 public:
  Mat<S>& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    auto [it, inserted] = mats_.try_emplace(name, Mat<S>::Zero(rows, cols));
    if (!inserted) throw std::invalid_argument("duplicate tensor: " + name);
    names_.push_back(name);
    return it->second;
  }

  Mat<S>& at(const std::string& name) {
    auto it = mats_.find(name);
    if (it == mats_.end()) throw std::out_of_range("no tensor named " + name);
    return it->second;
  }
  const Mat<S>& at(const std::string& name) const {
    auto it = mats_.find(name);
    if (it == mats_.end()) throw std::out_of_range("no tensor named " + name);
    return it->second;
  }
  Mat<S>& operator[](const std::string& name) { return at(name); }
  const Mat<S>& operator[](const std::string& name) const { return at(name); }

  bool has(const std::string& name) const { return mats_.count(name) != 0; }
  const std::vector<std::string>& names() const { return names_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& name : names_) {
      n += static_cast<std::size_t>(mats_.at(name).size());
    }
    return n;
  }

  // Same names and shapes, all zeros (gradient / moment buffers).
  TensorStore<S> zeros_like() const {
    TensorStore<S> out;
    for (const auto& name : names_) {
      const Mat<S>& m = mats_.at(name);
      out.add(name, m.rows(), m.cols());
    }
    return out;
  }

  void set_zero() {
    for (const auto& name : names_) mats_.at(name).setZero();
  }

  // Seeded uniform fill in [-range, range], walking tensors in insertion
  // order and each tensor in column-major storage order.
  void init_uniform(Rng& rng, S range = static_cast<S>(0.08)) {
    for (const auto& name : names_) {
      Mat<S>& m = mats_.at(name);
      S* data = m.data();
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        data[i] = static_cast<S>(rng.uniform_real() * 2.0 - 1.0) * range;
      }
    }
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Mat<S>> mats_;
};

}  // namespace logxlate
