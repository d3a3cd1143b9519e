#include "smq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "smq/error.hpp"
#include "smq/kernels.hpp"
#include "smq/pipeline.hpp"
#include "smq/plot.hpp"

namespace fs = std::filesystem;

namespace smq {

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error("usage", msg) {}
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

std::set<int> parse_label_csv(const std::string& csv) {
  std::set<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.insert(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--exclude-labels expects comma-separated integers, got '" + csv + "'");
    }
  }
  return out;
}

/// Training flags shared by train and sweepk; each maps onto one config key.
struct TrainFlags {
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> overrides;
  std::map<std::string, std::string> values;
  bool entangled_encoder = false;
  bool entangled_decoder = false;
  bool standardize = false;

  void attach(CLI::App* cmd, bool with_k) {
    cmd->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    auto add = [&](const std::string& flag, const std::string& key, const std::string& help) {
      overrides.emplace_back(key, cmd->add_option(flag, values[key], help));
    };
    add("--seed", "seed", "random seed");
    if (with_k) add("--k", "k", "number of motion words");
    add("--lambda", "lambda", "reconstruction loss weight");
    add("--alpha", "alpha", "EMA decay");
    add("--patch-seconds", "patch_seconds", "patch length in seconds");
    add("--loss", "loss", "inter_joint|mse|root_distance");
    add("--init", "init", "random|kmeans");
    add("--epochs", "epochs", "training epochs");
    add("--batch-size", "batch_size", "sequences per batch");
    add("--lr", "lr", "Adam learning rate");
    add("--hidden-dim", "hidden_dim", "TCN hidden width");
    add("--latent-dim", "latent_dim", "latent width per joint");
    cmd->add_flag("--entangled-encoder", entangled_encoder, "encode all joints jointly");
    cmd->add_flag("--entangled-decoder", entangled_decoder, "decode all joints jointly");
    cmd->add_flag("--standardize", standardize, "z-score channels with training-set statistics");
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = parse_config_text(read_text(config_path));
    for (const auto& [key, opt] : overrides) {
      if (opt->count() > 0) set_config_value(cfg, key, values.at(key));
    }
    if (entangled_encoder) cfg.model.disentangled_encoder = false;
    if (entangled_decoder) cfg.model.disentangled_decoder = false;
    if (standardize) cfg.standardize = true;
    cfg.validate();
    return cfg;
  }
};

Dataset load_manifest(const std::string& path) {
  require_file(path, "manifest");
  return load_dataset(path);
}

std::vector<LabelSeq> load_predictions(const Dataset& data, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("prediction directory not found: " + dir.string());
  std::vector<LabelSeq> pred;
  for (const auto& seq : data.sequences) {
    const fs::path file = dir / (seq.id + ".skll");
    require_file(file, "prediction for '" + seq.id + "'");
    pred.push_back(load_labels(file));
  }
  return pred;
}

std::size_t label_span(const std::vector<LabelSeq>& seqs) {
  int top = -1;
  for (const auto& s : seqs) {
    for (int v : s) top = std::max(top, v);
  }
  return static_cast<std::size_t>(top + 1);
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised skeleton action segmentation with motion-word quantization", "smq"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "disable OpenMP kernels");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic dataset");
  SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--k", spec.actions, "number of actions");
  synth->add_option("--seqs", spec.sequences, "number of sequences");
  synth->add_option("--seed", spec.seed, "random seed");
  synth->add_option("--joints", spec.joints, "joints per frame");
  synth->add_option("--channels", spec.channels, "channels per joint");
  synth->add_option("--fps", spec.fps, "frame rate");
  synth->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma");
  synth->add_option("--min-segment-seconds", spec.min_segment_seconds);
  synth->add_option("--max-segment-seconds", spec.max_segment_seconds);
  synth->add_option("--min-segments", spec.min_segments);
  synth->add_option("--max-segments", spec.max_segments);
  synth->add_option("--segment-quantum", spec.segment_quantum_seconds, "round segment lengths to multiples of this many seconds");
  synth->add_option("--max-offset", spec.ranges.max_offset);
  synth->add_option("--min-amplitude", spec.ranges.min_amplitude);
  synth->add_option("--max-amplitude", spec.ranges.max_amplitude);
  synth->add_option("--min-frequency", spec.ranges.min_frequency);
  synth->add_option("--max-frequency", spec.ranges.max_frequency);
  synth->add_option("--frequency-quantum", spec.ranges.frequency_quantum, "round frequencies to multiples of this (Hz)");
  synth->add_option("--min-separation", spec.ranges.min_separation, "smallest RMS offset distance between actions");

  // train
  auto* train_cmd = app.add_subcommand("train", "train encoder, decoder and codebook");
  TrainFlags train_flags;
  std::string train_data, train_out;
  train_cmd->add_option("--data", train_data, "dataset manifest")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_flags.attach(train_cmd, true);

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "label every frame with its motion word");
  std::string seg_data, seg_ckpt, seg_out;
  segment_cmd->add_option("--data", seg_data, "dataset manifest")->required();
  segment_cmd->add_option("--checkpoint", seg_ckpt, "trained model")->required();
  segment_cmd->add_option("--out", seg_out, "output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Hungarian-matched segmentation metrics");
  std::string eval_data, eval_pred, eval_out, scope = "global", exclude;
  eval_cmd->add_option("--data", eval_data, "dataset manifest with ground-truth labels")->required();
  eval_cmd->add_option("--pred", eval_pred, "directory of <id>.skll predictions")->required();
  eval_cmd->add_option("--scope", scope, "global|local");
  eval_cmd->add_option("--exclude-labels", exclude, "comma-separated classes to ignore");
  eval_cmd->add_option("--out", eval_out, "directory for metrics.json");

  // sweepk
  auto* sweep_cmd = app.add_subcommand("sweepk", "train one model per K and report silhouettes");
  TrainFlags sweep_flags;
  std::string sweep_data, sweep_out;
  std::size_t k_min = 2, k_max = 8;
  sweep_cmd->add_option("--data", sweep_data, "dataset manifest")->required();
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
  sweep_cmd->add_option("--k-min", k_min, "smallest K");
  sweep_cmd->add_option("--k-max", k_max, "largest K");
  sweep_flags.attach(sweep_cmd, false);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "SVG timeline of prediction against ground truth");
  std::string plot_pred, plot_gt, plot_out;
  plot_cmd->add_option("--pred", plot_pred, "predicted .skll labels")->required();
  plot_cmd->add_option("--gt", plot_gt, "ground-truth .skll labels")->required();
  plot_cmd->add_option("--out", plot_out, "output .svg path")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "smq: error[usage]: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    kernels::set_parallel(!serial);

    if (synth->parsed()) {
      const Dataset data = generate_synthetic(spec);
      const fs::path dir = synth_out;
      make_dir(dir);
      write_dataset(data, dir);
      std::ostringstream cfg;
      cfg << "k=" << spec.actions << "\nseqs=" << spec.sequences << "\nseed=" << spec.seed
          << "\njoints=" << spec.joints << "\nchannels=" << spec.channels << "\nfps=" << format_double(spec.fps)
          << "\nnoise=" << format_double(spec.noise_sigma)
          << "\nmin_segment_seconds=" << format_double(spec.min_segment_seconds)
          << "\nmax_segment_seconds=" << format_double(spec.max_segment_seconds)
          << "\nmin_segments=" << spec.min_segments << "\nmax_segments=" << spec.max_segments
          << "\nsegment_quantum=" << format_double(spec.segment_quantum_seconds)
          << "\nmax_offset=" << format_double(spec.ranges.max_offset)
          << "\nmin_amplitude=" << format_double(spec.ranges.min_amplitude)
          << "\nmax_amplitude=" << format_double(spec.ranges.max_amplitude)
          << "\nmin_frequency=" << format_double(spec.ranges.min_frequency)
          << "\nmax_frequency=" << format_double(spec.ranges.max_frequency)
          << "\nfrequency_quantum=" << format_double(spec.ranges.frequency_quantum)
          << "\nmin_separation=" << format_double(spec.ranges.min_separation) << "\n";
      write_text(dir / "synth_config.txt", cfg.str());
      out << (dir / "manifest.txt").string() << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      const Dataset data = load_manifest(train_data);
      const TrainConfig cfg = resolve_config(data, train_flags.resolve());
      const fs::path dir = train_out;
      make_dir(dir);
      write_text(dir / "config.txt", config_to_text(cfg));
      Trainer trainer(data, cfg);
      std::size_t last_epoch = 0;
      double epoch_total = 0.0;
      std::size_t epoch_steps = 0;
      trainer.run([&](const StepRecord& rec) {
        if (rec.epoch != last_epoch && epoch_steps > 0) {
          err << "epoch " << last_epoch << " mean L_total " << epoch_total / static_cast<double>(epoch_steps) << "\n";
          epoch_total = 0.0;
          epoch_steps = 0;
        }
        last_epoch = rec.epoch;
        epoch_total += rec.l_total;
        ++epoch_steps;
      });
      if (epoch_steps > 0) {
        err << "epoch " << last_epoch << " mean L_total " << epoch_total / static_cast<double>(epoch_steps) << "\n";
      }
      save_checkpoint(trainer.checkpoint(), dir / "model.smq");
      trainer.log().write_jsonl(dir / "train_log.jsonl");
      if (data.has_labels()) {
        const MetricsReport report = evaluate_predictions(data, segment(data, trainer.checkpoint()), cfg.k);
        write_text(dir / "metrics.json", report.to_json().dump(2) + "\n");
        out << report.to_json().dump() << "\n";
      }
      return 0;
    }

    if (segment_cmd->parsed()) {
      require_file(seg_ckpt, "checkpoint");
      const Dataset data = load_manifest(seg_data);
      const Checkpoint ckpt = load_checkpoint(seg_ckpt);
      const auto labels = segment(data, ckpt);
      const fs::path dir = seg_out;
      make_dir(dir);
      write_text(dir / "config.txt", config_to_text(ckpt.config));
      for (std::size_t i = 0; i < labels.size(); ++i) {
        save_labels(labels[i], dir / (data.sequences[i].id + ".skll"));
      }
      out << labels.size() << " sequences segmented into " << dir.string() << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const Dataset data = load_manifest(eval_data);
      const auto pred = load_predictions(data, eval_pred);
      EvalOptions options;
      options.exclude_labels = parse_label_csv(exclude);
      const EvalScope sc = parse_scope(scope);
      const std::size_t num_pred = std::max<std::size_t>(label_span(pred), 1);
      const MetricsReport report = evaluate_predictions(data, pred, num_pred, sc, options);
      if (!eval_out.empty()) {
        make_dir(eval_out);
        write_text(fs::path(eval_out) / "metrics.json", report.to_json().dump(2) + "\n");
        write_text(fs::path(eval_out) / "eval_config.txt",
                   "scope=" + to_string(sc) + "\nexclude_labels=" + exclude + "\npred=" + eval_pred + "\n");
      }
      out << report.to_json().dump() << "\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      if (k_min < 2 || k_max < k_min) throw UsageError("K range must satisfy 2 <= k-min <= k-max");
      const Dataset data = load_manifest(sweep_data);
      const TrainConfig cfg = resolve_config(data, sweep_flags.resolve());
      const fs::path dir = sweep_out;
      make_dir(dir);
      TrainConfig recorded = cfg;
      recorded.k = 0;
      write_text(dir / "config.txt", config_to_text(recorded) + "k_min=" + std::to_string(k_min) +
                                         "\nk_max=" + std::to_string(k_max) + "\n");
      std::vector<std::size_t> ks;
      for (std::size_t k = k_min; k <= k_max; ++k) ks.push_back(k);
      const auto rows = sweep_k(data, cfg, ks, [&](const SweepRow& row) {
        err << "K=" << row.k << " silhouette "
            << (row.silhouette ? format_double(*row.silhouette) : std::string("n/a")) << "\n";
      });
      const auto table = sweep_to_json(rows);
      write_text(dir / "sweep.json", table.dump(2) + "\n");
      out << table.dump() << "\n";
      return 0;
    }

    if (plot_cmd->parsed()) {
      require_file(plot_pred, "prediction labels");
      require_file(plot_gt, "ground-truth labels");
      const std::string svg = timeline_svg(load_labels(plot_pred), load_labels(plot_gt));
      const fs::path path = plot_out;
      if (path.has_parent_path()) make_dir(path.parent_path());
      write_text(path, svg);
      out << path.string() << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    err << "smq: error[usage]: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "smq: error[" << e.kind() << "]: " << one_line(e.what()) << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "smq: error[internal]: " << one_line(e.what()) << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace smq
