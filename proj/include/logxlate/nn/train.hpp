#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "logxlate/error.hpp"
#include "logxlate/nn/adam.hpp"
#include "logxlate/nn/checkpoint.hpp"
#include "logxlate/nn/config.hpp"
#include "logxlate/nn/model.hpp"
#include "logxlate/record.hpp"
#include "logxlate/rng.hpp"
#include "logxlate/vocab.hpp"

namespace logxlate {

// Stream salts for deriving independent rng sequences from one training seed.
inline constexpr std::uint64_t kSaltInit = 0x696e6974;      // parameter init
inline constexpr std::uint64_t kSaltSplit = 0x73706c6974;   // train/val split
inline constexpr std::uint64_t kSaltShuffle = 0x73687566;   // per-epoch batch order
inline constexpr std::uint64_t kSaltDropout = 0x64726f70;   // per-epoch dropout

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochStats> history;
  int best_epoch = -1;
  bool early_stopped = false;
  std::size_t truncated_records = 0;
};

inline void write_history_csv(const std::filesystem::path& path,
                              const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,val_loss\n";
  out.precision(17);
  for (const EpochStats& e : history) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  }
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

namespace train_detail {

struct EncodedCorpus {
  std::vector<std::vector<int>> src, tgt;
  std::size_t truncated = 0;
};

inline EncodedCorpus encode_corpus(const std::vector<AnnotatedRecord>& corpus,
                                   const VocabPair& vocab, int max_len) {
  EncodedCorpus enc;
  enc.src.reserve(corpus.size());
  enc.tgt.reserve(corpus.size());
  for (const AnnotatedRecord& rec : corpus) {
    std::string raw = rec.raw, ann = rec.ann;
    if (raw.size() > static_cast<std::size_t>(max_len)) {
      raw.resize(static_cast<std::size_t>(max_len));
      ann.resize(static_cast<std::size_t>(max_len));
      ++enc.truncated;
    }
    enc.src.push_back(vocab.source.encode(raw));
    enc.tgt.push_back(vocab.target.encode(ann));
  }
  return enc;
}

// Position-weighted mean loss over an index set, evaluation mode.
inline double eval_loss(const Seq2Seq<float>& model, const EncodedCorpus& enc,
                        const std::vector<std::size_t>& indices,
                        int batch_size) {
  double total = 0.0, positions = 0.0;
  for (std::size_t begin = 0; begin < indices.size();
       begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(indices.size(), begin + static_cast<std::size_t>(batch_size));
    Seq2Seq<float>::Batch batch;
    double batch_positions = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      batch.src.push_back(enc.src[indices[k]]);
      batch.tgt.push_back(enc.tgt[indices[k]]);
      batch_positions += static_cast<double>(enc.tgt[indices[k]].size()) + 1.0;
    }
    total += static_cast<double>(model.forward_loss(batch)) * batch_positions;
    positions += batch_positions;
  }
  return total / positions;
}

}  // namespace train_detail

inline TrainResult train(const ModelConfig& model_cfg,
                         const OptimizerConfig& opt_cfg,
                         const std::vector<AnnotatedRecord>& corpus,
                         std::uint64_t seed, std::ostream* log = nullptr) {
  validate_model_config(model_cfg);
  validate_optimizer_config(opt_cfg);
  if (corpus.size() < 10) {
    throw std::invalid_argument("train: corpus must hold at least 10 records");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!record_lengths_match(corpus[i]) || corpus[i].raw.empty()) {
      throw std::invalid_argument("train: record " + std::to_string(i + 1) +
                                  " is misaligned or empty");
    }
  }

  const VocabPair vocab = build_vocab(corpus);
  train_detail::EncodedCorpus enc =
      train_detail::encode_corpus(corpus, vocab, model_cfg.max_len);
  if (enc.truncated > 0 && log != nullptr) {
    *log << "warning: truncated " << enc.truncated << " record(s) to max_len="
         << model_cfg.max_len << "\n";
  }

  // Seeded split: shuffle all indices, carve the validation head off.
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  {
    Rng split_rng(mix_seed(seed, kSaltSplit));
    split_rng.shuffle(order.begin(), order.end());
  }
  const std::size_t n_val = static_cast<std::size_t>(
      opt_cfg.val_fraction * static_cast<double>(corpus.size()));
  std::vector<std::size_t> val_idx(order.begin(),
                                   order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_val),
                                     order.end());
  if (train_idx.empty()) {
    throw std::invalid_argument("train: validation split leaves no training data");
  }

  Seq2Seq<float> model(model_cfg, vocab.source.size(), vocab.target.size(),
                       vocab.target.start_id(), vocab.target.end_id());
  {
    Rng init_rng(mix_seed(seed, kSaltInit));
    model.init_params(init_rng);
  }
  Adam<float> adam(opt_cfg, model.params());
  TensorStore<float> grads = model.params().zeros_like();

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= opt_cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(seed, kSaltShuffle, static_cast<std::uint64_t>(epoch)));
    Rng dropout_rng(mix_seed(seed, kSaltDropout, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(train_idx.begin(), train_idx.end());

    double total = 0.0, positions = 0.0;
    for (std::size_t begin = 0; begin < train_idx.size();
         begin += static_cast<std::size_t>(opt_cfg.batch_size)) {
      const std::size_t end = std::min(
          train_idx.size(), begin + static_cast<std::size_t>(opt_cfg.batch_size));
      Seq2Seq<float>::Batch batch;
      double batch_positions = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        batch.src.push_back(enc.src[train_idx[k]]);
        batch.tgt.push_back(enc.tgt[train_idx[k]]);
        batch_positions += static_cast<double>(enc.tgt[train_idx[k]].size()) + 1.0;
      }
      grads.set_zero();
      const float loss = model.forward_backward(batch, grads, dropout_rng);
      if (!std::isfinite(loss)) {
        throw TrainingDivergence(
            "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(begin / static_cast<std::size_t>(opt_cfg.batch_size) + 1));
      }
      adam.step(model.params(), grads);
      total += static_cast<double>(loss) * batch_positions;
      positions += batch_positions;
    }
    const double train_loss = total / positions;
    const double val_loss =
        val_idx.empty()
            ? train_loss
            : train_detail::eval_loss(model, enc, val_idx, opt_cfg.batch_size);
    if (!std::isfinite(val_loss)) {
      throw TrainingDivergence("non-finite validation loss at epoch " +
                               std::to_string(epoch));
    }
    result.history.push_back({epoch, train_loss, val_loss});
    if (log != nullptr) {
      *log << "epoch " << epoch << "  train_loss " << train_loss
           << "  val_loss " << val_loss << "\n";
    }

    if (val_loss < best_val) {
      best_val = val_loss;
      result.best_epoch = epoch;
      result.best = make_checkpoint(model, vocab.source, vocab.target,
                                    best_val, epoch);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= opt_cfg.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  result.truncated_records = enc.truncated;
  return result;
}

}  // namespace logxlate
