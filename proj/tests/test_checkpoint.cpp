#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "logxlate/nn/checkpoint.hpp"
#include "logxlate/nn/model.hpp"
#include "logxlate/vocab.hpp"

using namespace logxlate;
namespace fs = std::filesystem;

namespace {
struct Fixture {
  ModelConfig cfg;
  VocabPair vocab;
  Seq2Seq<float> model;

  static Fixture make() {
    ModelConfig cfg;
    cfg.arch = Arch::Luong;
    cfg.cell = CellKind::Lstm;
    cfg.cells = 12;
    cfg.embedding_dim = 7;
    cfg.dropout = 0.25;
    std::vector<AnnotatedRecord> corpus{{"ab c 12", "hh_l_uu"},
                                        {"ca 9", "hh_b"}};
    VocabPair vocab = build_vocab(corpus);
    Seq2Seq<float> m(cfg, vocab.source.size(), vocab.target.size(),
                     vocab.target.start_id(), vocab.target.end_id());
    Rng rng(3);
    m.init_params(rng);
    return {cfg, vocab, std::move(m)};
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_CASE("base64 round-trips all padding cases", "[checkpoint]") {
  using namespace b64_detail;
  auto enc = [](std::string_view s) {
    return encode(reinterpret_cast<const unsigned char*>(s.data()), s.size());
  };
  for (std::string s : {std::string(""), std::string("f"), std::string("fo"),
                        std::string("foo"), std::string("foob"),
                        std::string("fooba"), std::string("foobar")}) {
    std::vector<unsigned char> bytes(s.begin(), s.end());
    REQUIRE(decode(enc(s)) == bytes);
  }
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("f") == "Zg==");
  REQUIRE_THROWS_AS(decode("Z$=="), IoError);
}

TEST_CASE("tensors survive the pack/unpack cycle exactly", "[checkpoint]") {
  Mat<float> m(3, 2);
  m << 1.5f, -0.0f, 3.25e-30f, 7.0f, -2.5f, 1e30f;
  std::string data = ckpt_detail::pack_tensor(m);
  Mat<float> back(3, 2);
  ckpt_detail::unpack_tensor(data, back);
  // bit-exact: signed zero preserved
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    REQUIRE(std::bit_cast<std::uint32_t>(back(i)) ==
            std::bit_cast<std::uint32_t>(m(i)));
  }
  Mat<float> wrong(4, 2);
  REQUIRE_THROWS_AS(ckpt_detail::unpack_tensor(data, wrong), IoError);
}

TEST_CASE("a saved checkpoint loads back equal and re-saves byte-identical",
          "[checkpoint]") {
  auto fx = Fixture::make();
  Checkpoint ck = make_checkpoint(fx.model, fx.vocab.source, fx.vocab.target,
                                  0.123456789, 17);

  fs::path dir = fs::temp_directory_path() / "logxlate_ckpt_test";
  fs::create_directories(dir);
  save_checkpoint(dir / "model.ckpt", ck);
  Checkpoint loaded = load_checkpoint(dir / "model.ckpt");

  CHECK(loaded.version == ck.version);
  CHECK(loaded.best_val_loss == ck.best_val_loss);
  CHECK(loaded.epoch == 17);
  CHECK(loaded.source_vocab == fx.vocab.source);
  CHECK(loaded.target_vocab == fx.vocab.target);
  CHECK(loaded.config.arch == fx.cfg.arch);
  CHECK(loaded.config.cell == fx.cfg.cell);
  CHECK(loaded.config.cells == fx.cfg.cells);
  CHECK(loaded.config.dropout == fx.cfg.dropout);
  for (const auto& name : ck.tensors.names()) {
    REQUIRE(loaded.tensors.at(name) == ck.tensors.at(name));
  }

  save_checkpoint(dir / "model2.ckpt", loaded);
  REQUIRE(slurp(dir / "model.ckpt") == slurp(dir / "model2.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("a rebuilt model computes exactly what the original did",
          "[checkpoint]") {
  auto fx = Fixture::make();
  Checkpoint ck = make_checkpoint(fx.model, fx.vocab.source, fx.vocab.target,
                                  0.5, 1);
  Seq2Seq<float> rebuilt = model_from_checkpoint<float>(ck);
  Seq2Seq<float>::Batch batch{
      {fx.vocab.source.encode("ab c 12"), fx.vocab.source.encode("ca")},
      {fx.vocab.target.encode("hh_l_uu"), fx.vocab.target.encode("hh")}};
  REQUIRE(rebuilt.forward_loss(batch) == fx.model.forward_loss(batch));
}

TEST_CASE("damaged checkpoints are rejected with an I/O error", "[checkpoint]") {
  auto fx = Fixture::make();
  Checkpoint ck = make_checkpoint(fx.model, fx.vocab.source, fx.vocab.target,
                                  0.5, 1);
  fs::path dir = fs::temp_directory_path() / "logxlate_ckpt_bad";
  fs::create_directories(dir);

  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_checkpoint(dir / "absent.ckpt"), IoError);
  }
  SECTION("not JSON") {
    std::ofstream(dir / "junk.ckpt") << "this is not json {";
    REQUIRE_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), IoError);
  }
  SECTION("unsupported version") {
    save_checkpoint(dir / "v.ckpt", ck);
    auto j = nlohmann::ordered_json::parse(slurp(dir / "v.ckpt"));
    j["version"] = 999;
    std::ofstream(dir / "v.ckpt") << j.dump(2) << '\n';
    REQUIRE_THROWS_AS(load_checkpoint(dir / "v.ckpt"), IoError);
  }
  SECTION("tensor data does not match its shape") {
    save_checkpoint(dir / "s.ckpt", ck);
    auto j = nlohmann::ordered_json::parse(slurp(dir / "s.ckpt"));
    j["tensors"][0]["shape"][0] = 10000;
    std::ofstream(dir / "s.ckpt") << j.dump(2) << '\n';
    REQUIRE_THROWS_AS(load_checkpoint(dir / "s.ckpt"), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("rebuilding validates tensor inventory against the config",
          "[checkpoint]") {
  auto fx = Fixture::make();
  Checkpoint ck = make_checkpoint(fx.model, fx.vocab.source, fx.vocab.target,
                                  0.5, 1);
  // claim a different architecture than the stored tensors describe
  ck.config.arch = Arch::Bahdanau;
  REQUIRE_THROWS_AS(model_from_checkpoint<float>(ck), IoError);
}
