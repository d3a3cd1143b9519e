#include <algorithm>
#include <cmath>

#include "criteria.hpp"
#include "doctest.h"
#include "smq/pipeline.hpp"
#include "temp_dir.hpp"

using namespace smq;

namespace {

Dataset tiny_data(std::uint64_t seed = 7, std::size_t sequences = 4) {
  SyntheticSpec spec;
  spec.sequences = sequences;
  spec.fps = 10.0f;
  spec.seed = seed;
  return generate_synthetic(spec);
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 2;
  cfg.lr = 1e-3;
  cfg.model.hidden_dim = 8;
  cfg.model.latent_dim = 4;
  return cfg;
}

}  // namespace

TEST_CASE("resolve_config fills K and position channels") {
  const Dataset data = tiny_data();
  const TrainConfig cfg = resolve_config(data, TrainConfig{});
  CHECK(cfg.k == 4);
  CHECK(cfg.position_channels == std::vector<std::size_t>{0, 1, 2});
  TrainConfig bad;
  bad.position_channels = {0, 7};
  CHECK_THROWS_AS(resolve_config(data, bad), InvalidArgument);
}

TEST_CASE("training lowers the loss") {
  int descended = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TrainConfig cfg = tiny_config();
    cfg.seed = seed;
    const auto result = train(tiny_data(), cfg);
    const auto& steps = result.log.steps;
    REQUIRE(steps.size() == 4);
    descended += steps.back().l_total < steps.front().l_total;
  }
  CHECK(descended >= 9);
}

TEST_CASE("step records and evaluation log") {
  TrainConfig cfg = tiny_config();
  cfg.eval_every = 1;
  const Dataset data = tiny_data();
  Trainer trainer(data, cfg);
  std::size_t seen = 0;
  trainer.run([&](const StepRecord& r) {
    CHECK(r.l_total == doctest::Approx(cfg.lambda * r.l_rec + r.l_commit).epsilon(1e-5));
    std::size_t used = 0;
    for (auto u : r.usage) used += u;
    CHECK(used > 0);
    ++seen;
  });
  CHECK(seen == 4);
  CHECK(trainer.steps_taken() == 4);
  CHECK(trainer.log().evals.size() == 2);
  const std::string jsonl = trainer.log().to_jsonl();
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 6);
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  CHECK(first["type"] == "step");
  CHECK(first.contains("l_rec"));
  CHECK(first.contains("l_commit"));
  CHECK(first.contains("usage"));
}

TEST_CASE("alpha = 1 keeps the codebook fixed: gradients never reach the words") {
  TrainConfig cfg = tiny_config();
  cfg.alpha = 1.0;
  const Dataset data = tiny_data();
  Trainer trainer(data, cfg);
  const Codebook<float> before = trainer.checkpoint().codebook;
  const auto params_before = trainer.checkpoint().autoencoder.parameters().front().data()[0];
  trainer.run();
  CHECK(trainer.checkpoint().codebook == before);
  CHECK(trainer.checkpoint().autoencoder.parameters().front().data()[0] != params_before);
}

TEST_CASE("lambda = 0 trains on the commitment loss alone") {
  TrainConfig cfg = tiny_config();
  cfg.lambda = 0.0;
  const auto result = train(tiny_data(), cfg);
  for (const auto& r : result.log.steps) {
    CHECK(r.l_total == r.l_commit);
    CHECK(r.l_rec > 0.0);
  }
}

TEST_CASE("training is deterministic, serial or parallel") {
  const Dataset data = tiny_data();
  TrainConfig cfg = tiny_config();
  cfg.init = CodebookInit::kmeans;
  cfg.dead_word_restart = true;
  cfg.dead_word_patience = 1;
  cfg.k = 6;
  const auto a = acceptance::determinism(data, cfg);
  INFO(a.detail);
  CHECK(a.pass);
  const auto parallel = serialize_checkpoint(train(data, cfg).checkpoint);
  kernels::set_parallel(false);
  const auto serial = serialize_checkpoint(train(data, cfg).checkpoint);
  kernels::set_parallel(true);
  CHECK(parallel == serial);
}

TEST_CASE("different seeds give different models") {
  TrainConfig a = tiny_config(), b = tiny_config();
  b.seed = 1;
  const Dataset data = tiny_data();
  CHECK(serialize_checkpoint(train(data, a).checkpoint) != serialize_checkpoint(train(data, b).checkpoint));
}

TEST_CASE("segmentation contracts") {
  const Dataset data = tiny_data();
  const auto result = train(data, tiny_config());
  const auto labels = segment(data, result.checkpoint);
  const std::size_t P = result.checkpoint.patch_size;
  CHECK(P == 10);
  REQUIRE(labels.size() == data.sequences.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CHECK(labels[i].size() == data.sequences[i].frames);
    for (std::size_t t = 1; t < labels[i].size(); ++t) {
      if (labels[i][t] != labels[i][t - 1]) CHECK(t % P == 0);
    }
    for (int l : labels[i]) CHECK((l >= 0 && l < 4));
  }
  CHECK(segment(data, result.checkpoint) == labels);
  // batch size does not change inference
  CHECK(infer(data, result.checkpoint, 1).labels == labels);
  const Codebook<float> words = result.checkpoint.codebook;
  const auto inf = infer(data, result.checkpoint);
  CHECK(result.checkpoint.codebook == words);
  CHECK(inf.patches.size() == inf.patch_words.size() * inf.patch_dim);
}

TEST_CASE("inference rejects mismatched data") {
  const Dataset data = tiny_data();
  const auto result = train(data, tiny_config());
  SyntheticSpec spec;
  spec.sequences = 2;
  spec.fps = 10.0f;
  spec.joints = 5;
  CHECK_THROWS_AS(segment(generate_synthetic(spec), result.checkpoint), InvalidArgument);
}

TEST_CASE("checkpoint round-trip") {
  testing::TempDir dir;
  const Dataset data = tiny_data();
  const auto result = train(data, tiny_config());
  save_checkpoint(result.checkpoint, dir / "m.smq");
  const Checkpoint back = load_checkpoint(dir / "m.smq");
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(result.checkpoint));
  CHECK(config_to_map(back.config) == config_to_map(result.checkpoint.config));
  CHECK(back.codebook == result.checkpoint.codebook);
  CHECK(segment(data, back) == segment(data, result.checkpoint));
}

TEST_CASE("standardized training ignores power-of-two channel scales") {
  const Dataset data = tiny_data();
  Dataset scaled = data;
  for (auto& seq : scaled.sequences) {
    for (std::size_t i = 0; i < seq.frames * seq.joints; ++i) seq.data[i] *= 4.0f;
  }
  TrainConfig cfg = tiny_config();
  cfg.standardize = true;
  const auto a = train(data, cfg), b = train(scaled, cfg);
  const auto stats = channel_stats(data.sequences);
  CHECK(a.checkpoint.input_stats.mean == stats.mean);
  CHECK(a.checkpoint.input_stats.stddev == stats.stddev);
  CHECK(b.checkpoint.input_stats.stddev[0] == 4.0 * stats.stddev[0]);
  CHECK(a.checkpoint.codebook == b.checkpoint.codebook);
  CHECK(segment(data, a.checkpoint) == segment(scaled, b.checkpoint));
  const Checkpoint back = deserialize_checkpoint(serialize_checkpoint(a.checkpoint));
  CHECK(back.input_stats.mean == stats.mean);
  CHECK(segment(data, back) == segment(data, a.checkpoint));
  cfg.standardize = false;
  CHECK(train(data, cfg).checkpoint.input_stats.mean.empty());
}

TEST_CASE("checkpoint errors") {
  const auto result = train(tiny_data(), tiny_config());
  const auto bytes = serialize_checkpoint(result.checkpoint);
  auto expect_code = [](std::vector<std::uint8_t> b, ParseError::Code code) {
    try {
      deserialize_checkpoint(b);
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.code() == code);
    }
  };
  auto magic = bytes;
  magic[0] = 'X';
  expect_code(magic, ParseError::Code::bad_magic);
  auto version = bytes;
  version[8] = 9;
  expect_code(version, ParseError::Code::version);
  expect_code(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 4), ParseError::Code::truncated);
  expect_code(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 12), ParseError::Code::truncated);
  auto extra = bytes;
  extra.push_back(0);
  expect_code(extra, ParseError::Code::format);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/m.smq"), IoError);
}

TEST_CASE("non-finite losses stop training with the step index") {
  TrainConfig cfg = tiny_config();
  cfg.lr = 1e30;
  cfg.epochs = 5;
  try {
    train(tiny_data(), cfg);
    FAIL("no error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("K sweep contracts") {
  const Dataset data = tiny_data();
  const auto rows = sweep_k(data, tiny_config(), {2, 3, 4});
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i].k == i + 2);
    CHECK(rows[i].report.has_value());
    CHECK(rows[i].words_used <= rows[i].k);
    if (rows[i].words_used >= 2) CHECK(rows[i].silhouette.has_value());
  }
  const auto j = sweep_to_json(rows);
  CHECK(j.size() == 3);
  CHECK(j[0]["k"] == 2);
  CHECK_THROWS_AS(sweep_k(data, tiny_config(), {1, 2}), InvalidArgument);
  CHECK_THROWS_AS(sweep_k(data, tiny_config(), {}), InvalidArgument);
}

TEST_CASE("evaluate_predictions requires labels") {
  Dataset data = tiny_data();
  std::vector<LabelSeq> gt;
  for (const auto& s : data.sequences) gt.push_back(*s.labels);
  CHECK(evaluate_predictions(data, gt, 4).mof == 100.0);
  for (auto& s : data.sequences) s.labels.reset();
  CHECK_THROWS_AS(evaluate_predictions(data, gt, 4), InvalidArgument);
}

TEST_CASE("the separability oracle passes on the default synthetic set") {
  CHECK(acceptance::separability_mof(acceptance::synthetic_set(), 4) >= 85.0);
}
