#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logxlate {

// The three translator architectures: classic encoder-decoder (M_C),
// additive-attention decoder (M_L), and multiplicative post-attention (M_S).
enum class Arch { Classic, Bahdanau, Luong };

enum class CellKind { Lstm, Gru };

inline const char* arch_name(Arch a) {
  switch (a) {
    case Arch::Classic: return "mc";
    case Arch::Bahdanau: return "ml";
    case Arch::Luong: return "ms";
  }
  return "?";
}

inline Arch parse_arch(std::string_view name) {
  if (name == "mc" || name == "MC") return Arch::Classic;
  if (name == "ml" || name == "ML") return Arch::Bahdanau;
  if (name == "ms" || name == "MS") return Arch::Luong;
  throw std::invalid_argument("unknown architecture: " + std::string(name) +
                              " (expected mc, ml, or ms)");
}

inline const char* cell_name(CellKind c) {
  return c == CellKind::Lstm ? "lstm" : "gru";
}

inline CellKind parse_cell(std::string_view name) {
  if (name == "lstm" || name == "LSTM") return CellKind::Lstm;
  if (name == "gru" || name == "GRU") return CellKind::Gru;
  throw std::invalid_argument("unknown cell kind: " + std::string(name) +
                              " (expected lstm or gru)");
}

struct ModelConfig {
  Arch arch = Arch::Classic;
  CellKind cell = CellKind::Lstm;
  int cells = 128;          // hidden width per recurrent layer
  int layers = 1;           // recurrent depth per side
  double dropout = 0.0;     // applied to recurrent outputs during training
  int embedding_dim = 64;
  int max_len = 512;        // longer training records are truncated (warned)
  int beam_width = 1;

  bool operator==(const ModelConfig&) const = default;
};

inline void validate_model_config(const ModelConfig& c) {
  if (c.cells < 1) throw std::invalid_argument("cells must be >= 1");
  if (c.layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) {
    throw std::invalid_argument("dropout must be in [0,1)");
  }
  if (c.embedding_dim < 1) throw std::invalid_argument("embedding_dim must be >= 1");
  if (c.max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (c.beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
}

struct OptimizerConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  int batch_size = 64;
  int max_epochs = 30;
  int patience = 10;  // epochs without validation improvement
  // Fraction held out for validation. Zero disables the split; validation
  // loss then tracks training loss (used by overfitting checks).
  double val_fraction = 0.1;

  bool operator==(const OptimizerConfig&) const = default;
};

inline void validate_optimizer_config(const OptimizerConfig& c) {
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0)) throw std::invalid_argument("beta1 must be in (0,1)");
  if (!(c.beta2 > 0.0 && c.beta2 < 1.0)) throw std::invalid_argument("beta2 must be in (0,1)");
  if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (c.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (c.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (c.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(c.val_fraction >= 0.0 && c.val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in [0,1)");
  }
}

}  // namespace logxlate
