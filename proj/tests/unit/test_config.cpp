#include <string>

#include "doctest.h"
#include "smq/config.hpp"
#include "smq/error.hpp"

using namespace smq;

TEST_CASE("defaults") {
  const TrainConfig cfg;
  CHECK(cfg.lambda == 0.001);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.patch_seconds == 1.0);
  CHECK(cfg.lr == 5e-4);
  CHECK(cfg.batch_size == 8);
  CHECK(cfg.loss == ReconstructionLoss::inter_joint);
  CHECK(cfg.init == CodebookInit::random);
  CHECK(cfg.model.stages == 2);
  CHECK(cfg.model.layers_per_stage == 3);
  CHECK(cfg.patch_frames(50.0) == 50);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("every key round-trips through text") {
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.lambda = 0.0001;
  cfg.alpha = 0.25;
  cfg.patch_seconds = 0.02;
  cfg.k = 6;
  cfg.seed = 123456789012345ULL;
  cfg.loss = ReconstructionLoss::root_distance;
  cfg.init = CodebookInit::kmeans;
  cfg.model.hidden_dim = 12;
  cfg.model.disentangled_decoder = false;
  cfg.dead_word_restart = true;
  cfg.position_channels = {3, 4, 5};
  const TrainConfig back = parse_config_text(config_to_text(cfg));
  CHECK(config_to_map(back) == config_to_map(cfg));
  CHECK(back.position_channels == cfg.position_channels);
  CHECK(back.seed == cfg.seed);
  CHECK(config_keys().size() == config_to_map(cfg).size());
}

TEST_CASE("the lambda grid is reachable") {
  for (const char* v : {"0.1", "0.01", "0.001", "0.0001"}) {
    TrainConfig cfg;
    set_config_value(cfg, "lambda", v);
    CHECK(std::stod(config_to_map(cfg).at("lambda")) == std::stod(v));
  }
}

TEST_CASE("bad configs are rejected") {
  TrainConfig cfg;
  CHECK_THROWS_AS(set_config_value(cfg, "lamda", "1"), InvalidArgument);
  CHECK_THROWS_AS(set_config_value(cfg, "epochs", "-1"), InvalidArgument);
  CHECK_THROWS_AS(set_config_value(cfg, "lr", "fast"), InvalidArgument);
  CHECK_THROWS_AS(set_config_value(cfg, "shuffle", "maybe"), InvalidArgument);
  CHECK_THROWS_AS(set_config_value(cfg, "init", "zeros"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("epochs 3"), InvalidArgument);
  CHECK(parse_config_text("# comment\n\n  epochs = 3 \n").epochs == 3);
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.lambda = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.patch_seconds = 0.001;
  CHECK_THROWS_AS(cfg.patch_frames(50.0), InvalidArgument);
}
