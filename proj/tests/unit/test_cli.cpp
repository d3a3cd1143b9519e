#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "smq/cli.hpp"
#include "smq/config.hpp"
#include "smq/pipeline.hpp"
#include "smq/plot.hpp"
#include "smq/skeleton.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "smq");
  std::ostringstream out, err;
  const int code = smq::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string synth_tiny(const testing::TempDir& dir, const std::string& name, const std::string& seed = "7") {
  const auto r = cli({"synth", "--out", (dir / name).string(), "--k", "4", "--seqs", "4", "--seed", seed,
                      "--fps", "10"});
  REQUIRE(r.code == 0);
  return (dir / name / "manifest.txt").string();
}

const std::vector<std::string> kTinyTrain{"--epochs", "1", "--hidden-dim", "8", "--latent-dim", "4",
                                          "--batch-size", "2"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Minimal well-formedness check: balanced, properly nested tags.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t close = s.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = s.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("synth is deterministic and writes labels") {
  testing::TempDir dir;
  const auto m1 = synth_tiny(dir, "a"), m2 = synth_tiny(dir, "b");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir / "a")) names.push_back(e.path().filename().string());
  for (const auto& n : names) CHECK(testing::read_bytes(dir / "a" / n) == testing::read_bytes(dir / "b" / n));
  CHECK(names.size() == 1 + 1 + 4 * 2);
  CHECK(testing::read_text(m1).rfind("K=4\n", 0) == 0);
  const auto data = smq::load_dataset(m1);
  for (const auto& s : data.sequences) CHECK(s.labels.has_value());
  CHECK(fs::exists(dir / "a" / "synth_config.txt"));
}

TEST_CASE("train writes config, checkpoint, log and metrics") {
  testing::TempDir dir;
  const auto manifest = synth_tiny(dir, "d");
  const auto r = cli(with({"train", "--data", manifest, "--out", (dir / "run").string(), "--lambda", "0.01"}, kTinyTrain));
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto cfg = smq::parse_config_text(testing::read_text(dir / "run" / "config.txt"));
  CHECK(cfg.lambda == 0.01);
  CHECK(cfg.k == 4);
  CHECK(smq::load_checkpoint(dir / "run" / "model.smq").config.lambda == 0.01);
  CHECK(fs::exists(dir / "run" / "train_log.jsonl"));
  const auto metrics = nlohmann::json::parse(testing::read_text(dir / "run" / "metrics.json"));
  CHECK(metrics.contains("mof"));
  CHECK(nlohmann::json::parse(r.out)["mof"] == metrics["mof"]);
  CHECK(r.err.find("epoch 0 mean L_total") != std::string::npos);

  // segment, then evaluate the written predictions
  const auto seg = cli({"segment", "--data", manifest, "--checkpoint", (dir / "run" / "model.smq").string(), "--out",
                        (dir / "pred").string()});
  REQUIRE(seg.code == 0);
  CHECK(fs::exists(dir / "pred" / "config.txt"));
  const auto ev = cli({"eval", "--data", manifest, "--pred", (dir / "pred").string()});
  REQUIRE(ev.code == 0);
  CHECK(nlohmann::json::parse(ev.out)["mof"] == metrics["mof"]);
}

TEST_CASE("train reads a config file and flags override it") {
  testing::TempDir dir;
  const auto manifest = synth_tiny(dir, "d");
  {
    std::ofstream(dir / "c.txt") << "lambda=0.1\nalpha=0.25\nepochs=1\nhidden_dim=8\nlatent_dim=4\n";
  }
  const auto r = cli({"train", "--data", manifest, "--out", (dir / "run").string(), "--config",
                      (dir / "c.txt").string(), "--alpha", "0.75"});
  REQUIRE(r.code == 0);
  const auto cfg = smq::parse_config_text(testing::read_text(dir / "run" / "config.txt"));
  CHECK(cfg.lambda == 0.1);
  CHECK(cfg.alpha == 0.75);
  {
    std::ofstream(dir / "bad.txt") << "lamda=0.1\n";
  }
  const auto bad = cli({"train", "--data", manifest, "--out", (dir / "run2").string(), "--config",
                        (dir / "bad.txt").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("unknown key") != std::string::npos);
}

TEST_CASE("eval: identical labels score 100, local vs global") {
  testing::TempDir dir;
  const auto manifest = synth_tiny(dir, "d");
  const auto r = cli({"eval", "--data", manifest, "--pred", (dir / "d").string(), "--out", (dir / "e").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"mof", "edit", "f1_10", "f1_25", "f1_50"}) CHECK(j[key] == 100.0);
  CHECK(fs::exists(dir / "e" / "metrics.json"));
  CHECK(fs::exists(dir / "e" / "eval_config.txt"));

  // Swap two cluster ids in one sequence only.
  const auto data = smq::load_dataset(manifest);
  fs::create_directories(dir / "swapped");
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    auto labels = *data.sequences[i].labels;
    if (i == 0) {
      for (auto& l : labels) l = l == 0 ? 1 : l == 1 ? 0 : l;
    }
    smq::save_labels(labels, dir / "swapped" / (data.sequences[i].id + ".skll"));
  }
  const auto local = nlohmann::json::parse(
      cli({"eval", "--data", manifest, "--pred", (dir / "swapped").string(), "--scope", "local"}).out);
  const auto global = nlohmann::json::parse(cli({"eval", "--data", manifest, "--pred", (dir / "swapped").string()}).out);
  CHECK(local["mof"] == 100.0);
  CHECK(global["mof"].get<double>() < 100.0);
}

TEST_CASE("sweepk writes one row per K") {
  testing::TempDir dir;
  const auto manifest = synth_tiny(dir, "d");
  const auto r = cli(with({"sweepk", "--data", manifest, "--out", (dir / "s").string(), "--k-min", "2", "--k-max", "3"},
                          kTinyTrain));
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = nlohmann::json::parse(testing::read_text(dir / "s" / "sweep.json"));
  CHECK(rows.size() == 2);
  CHECK(fs::exists(dir / "s" / "config.txt"));
  CHECK(cli({"sweepk", "--data", manifest, "--out", (dir / "s2").string(), "--k-min", "1"}).code == 2);
}

TEST_CASE("plot draws one rect per segment") {
  testing::TempDir dir;
  const std::vector<int> gt{0, 0, 1, 1, 1, 2}, pred{1, 1, 1, 0, 0, 0};
  smq::save_labels(gt, dir / "gt.skll");
  smq::save_labels(pred, dir / "pred.skll");
  const auto r = cli({"plot", "--pred", (dir / "pred.skll").string(), "--gt", (dir / "gt.skll").string(), "--out",
                      (dir / "t.svg").string()});
  REQUIRE(r.code == 0);
  const std::string svg = testing::read_text(dir / "t.svg");
  std::size_t rects = 0;
  for (std::size_t i = 0; (i = svg.find("<rect", i)) != std::string::npos; ++i) ++rects;
  CHECK(rects == 3 + 2);
  CHECK(well_formed_xml(svg));
  // identical inputs draw the same rect sequence twice
  const std::string same = smq::timeline_svg(gt, gt);
  const auto gt_group = same.substr(same.find("ground_truth"), same.find("prediction") - same.find("ground_truth"));
  const auto pred_group = same.substr(same.find("prediction"));
  auto rects_without_y = [](const std::string& group) {
    std::vector<std::string> out;
    const std::regex rect("<rect[^>]*/>"), y(" y=\"[^\"]*\"");
    for (std::sregex_iterator it(group.begin(), group.end(), rect), end; it != end; ++it) {
      out.push_back(std::regex_replace(it->str(), y, ""));
    }
    return out;
  };
  CHECK(rects_without_y(gt_group).size() == 3);
  CHECK(rects_without_y(gt_group) == rects_without_y(pred_group));
  CHECK_THROWS_AS(smq::timeline_svg({0, 1}, {0}), smq::InvalidArgument);
}

TEST_CASE("errors are one line with a kind and an exit code") {
  testing::TempDir dir;
  auto check_error = [](const Run& r, int code, const std::string& kind) {
    CHECK(r.code == code);
    CHECK(r.err.rfind("smq: error[" + kind + "]", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  };
  check_error(cli({}), 2, "usage");
  check_error(cli({"train", "--out", "x"}), 2, "usage");
  check_error(cli({"bogus"}), 2, "usage");
  check_error(cli({"train", "--data", (dir / "none.txt").string(), "--out", (dir / "o").string()}), 2, "usage");
  {
    std::ofstream(dir / "m.txt") << "K=2\nmissing.skl1\n";
  }
  check_error(cli({"train", "--data", (dir / "m.txt").string(), "--out", (dir / "o").string()}), 1, "io");
  {
    std::ofstream(dir / "bad.skl1") << "XXXXjunk";
    std::ofstream(dir / "m2.txt") << "K=2\nbad.skl1\n";
  }
  check_error(cli({"eval", "--data", (dir / "m2.txt").string(), "--pred", dir.path().string()}), 1, "parse.magic");
  const auto synth_dir = synth_tiny(dir, "d");
  check_error(cli({"train", "--data", synth_dir, "--out", (dir / "o").string(), "--alpha", "2"}), 1,
              "invalid_argument");
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("synth") != std::string::npos);
}
