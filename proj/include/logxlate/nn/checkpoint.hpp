#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "logxlate/error.hpp"
#include "logxlate/nn/config.hpp"
#include "logxlate/nn/model.hpp"
#include "logxlate/nn/tensor.hpp"
#include "logxlate/vocab.hpp"

namespace logxlate {

namespace b64_detail {

inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(const unsigned char* data, std::size_t n) {
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= n; i += 3) {
    const std::uint32_t v = (std::uint32_t(data[i]) << 16) |
                            (std::uint32_t(data[i + 1]) << 8) |
                            std::uint32_t(data[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i + 1 == n) {
    const std::uint32_t v = std::uint32_t(data[i]) << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == n) {
    const std::uint32_t v =
        (std::uint32_t(data[i]) << 16) | (std::uint32_t(data[i + 1]) << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

inline std::vector<unsigned char> decode(std::string_view text) {
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t buf = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = decode_char(c);
    if (v < 0) throw IoError("invalid base64 character in checkpoint");
    buf = (buf << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buf >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace b64_detail

namespace ckpt_detail {

using ordered_json = nlohmann::ordered_json;

// Row-major little-endian float32 bytes, independent of host layout.
inline std::string pack_tensor(const Mat<float>& m) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto u = std::bit_cast<std::uint32_t>(m(r, c));
      bytes.push_back(static_cast<unsigned char>(u & 0xff));
      bytes.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
      bytes.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
      bytes.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
    }
  }
  return b64_detail::encode(bytes.data(), bytes.size());
}

inline void unpack_tensor(const std::string& data, Mat<float>& m) {
  const std::vector<unsigned char> bytes = b64_detail::decode(data);
  if (bytes.size() != static_cast<std::size_t>(m.size()) * 4) {
    throw IoError("tensor byte count does not match its shape");
  }
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c, i += 4) {
      const std::uint32_t u = std::uint32_t(bytes[i]) |
                              (std::uint32_t(bytes[i + 1]) << 8) |
                              (std::uint32_t(bytes[i + 2]) << 16) |
                              (std::uint32_t(bytes[i + 3]) << 24);
      m(r, c) = std::bit_cast<float>(u);
    }
  }
}

inline ordered_json vocab_to_json(const CharVocab& v) {
  ordered_json j;
  j["chars"] = ordered_json::array();
  for (unsigned char c : v.chars()) j["chars"].push_back(static_cast<int>(c));
  j["specials"] = v.specials();
  return j;
}

inline CharVocab vocab_from_json(const ordered_json& j) {
  std::vector<unsigned char> chars;
  for (const auto& c : j.at("chars")) {
    chars.push_back(static_cast<unsigned char>(c.get<int>()));
  }
  return CharVocab::from_chars(std::move(chars),
                               j.at("specials").get<std::vector<std::string>>());
}

inline ordered_json config_to_json(const ModelConfig& c) {
  ordered_json j;
  j["arch"] = arch_name(c.arch);
  j["cell"] = cell_name(c.cell);
  j["cells"] = c.cells;
  j["layers"] = c.layers;
  j["dropout"] = c.dropout;
  j["embedding_dim"] = c.embedding_dim;
  j["max_len"] = c.max_len;
  j["beam_width"] = c.beam_width;
  return j;
}

inline ModelConfig config_from_json(const ordered_json& j) {
  ModelConfig c;
  c.arch = parse_arch(j.at("arch").get<std::string>());
  c.cell = parse_cell(j.at("cell").get<std::string>());
  c.cells = j.at("cells").get<int>();
  c.layers = j.at("layers").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.beam_width = j.at("beam_width").get<int>();
  return c;
}

}  // namespace ckpt_detail

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  ModelConfig config;
  CharVocab source_vocab;
  CharVocab target_vocab;
  TensorStore<float> tensors;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epoch = -1;
};

inline Checkpoint make_checkpoint(const Seq2Seq<float>& model,
                                  const CharVocab& src, const CharVocab& tgt,
                                  double best_val_loss, int epoch) {
  Checkpoint ck;
  ck.config = model.config();
  ck.source_vocab = src;
  ck.target_vocab = tgt;
  for (const auto& name : model.params().names()) {
    const Mat<float>& m = model.params().at(name);
    ck.tensors.add(name, m.rows(), m.cols()) = m;
  }
  ck.best_val_loss = best_val_loss;
  ck.epoch = epoch;
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path,
                            const Checkpoint& ck) {
  using ckpt_detail::ordered_json;
  ordered_json j;
  j["version"] = ck.version;
  j["config"] = ckpt_detail::config_to_json(ck.config);
  j["vocabs"]["source"] = ckpt_detail::vocab_to_json(ck.source_vocab);
  j["vocabs"]["target"] = ckpt_detail::vocab_to_json(ck.target_vocab);
  j["tensors"] = ordered_json::array();
  for (const auto& name : ck.tensors.names()) {
    const Mat<float>& m = ck.tensors.at(name);
    ordered_json t;
    t["name"] = name;
    t["shape"] = {m.rows(), m.cols()};
    t["data"] = ckpt_detail::pack_tensor(m);
    j["tensors"].push_back(std::move(t));
  }
  j["best_val_loss"] = ck.best_val_loss;
  j["epoch"] = ck.epoch;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write error on " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  using ckpt_detail::ordered_json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  Checkpoint ck;
  try {
    ck.version = j.at("version").get<int>();
    if (ck.version != kCheckpointVersion) {
      throw IoError("unsupported checkpoint version " +
                    std::to_string(ck.version));
    }
    ck.config = ckpt_detail::config_from_json(j.at("config"));
    ck.source_vocab = ckpt_detail::vocab_from_json(j.at("vocabs").at("source"));
    ck.target_vocab = ckpt_detail::vocab_from_json(j.at("vocabs").at("target"));
    for (const auto& t : j.at("tensors")) {
      const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
        throw IoError("tensor shape must be [rows, cols]");
      }
      Mat<float>& m =
          ck.tensors.add(t.at("name").get<std::string>(), shape[0], shape[1]);
      ckpt_detail::unpack_tensor(t.at("data").get<std::string>(), m);
    }
    ck.best_val_loss = j.at("best_val_loss").get<double>();
    ck.epoch = j.at("epoch").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return ck;
}

// Rebuilds a runnable model from checkpoint tensors.
template <class S = float>
inline Seq2Seq<S> model_from_checkpoint(const Checkpoint& ck) {
  Seq2Seq<S> model(ck.config, ck.source_vocab.size(), ck.target_vocab.size(),
                   ck.target_vocab.start_id(), ck.target_vocab.end_id());
  for (const auto& name : model.params().names()) {
    if (!ck.tensors.has(name)) {
      throw IoError("checkpoint is missing tensor " + name);
    }
    Mat<S>& dst = model.params().at(name);
    const Mat<float>& src = ck.tensors.at(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw IoError("checkpoint tensor " + name + " has the wrong shape");
    }
    dst = src.template cast<S>();
  }
  return model;
}

}  // namespace logxlate
