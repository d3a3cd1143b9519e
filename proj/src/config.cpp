#include "smq/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "smq/error.hpp"

namespace smq {

namespace {

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  if (value.empty() || value == "auto") return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size(key, item));
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string to_string(CodebookInit init) { return init == CodebookInit::random ? "random" : "kmeans"; }

CodebookInit parse_codebook_init(const std::string& s) {
  if (s == "random") return CodebookInit::random;
  if (s == "kmeans") return CodebookInit::kmeans;
  throw InvalidArgument("unknown codebook init '" + s + "' (expected random|kmeans)");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw InvalidArgument("config: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("config: batch_size must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("config: lr must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("config: lambda must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("config: alpha must lie in [0, 1]");
  if (!(patch_seconds > 0.0)) throw InvalidArgument("config: patch_seconds must be positive");
  if (dead_word_patience < 1) throw InvalidArgument("config: dead_word_patience must be >= 1");
}

std::size_t TrainConfig::patch_frames(double fps) const {
  const double frames = std::round(patch_seconds * fps);
  if (!(frames >= 1.0)) {
    throw InvalidArgument("config: patch_seconds * fps rounds to less than one frame");
  }
  return static_cast<std::size_t>(frames);
}

std::map<std::string, std::string> config_to_map(const TrainConfig& cfg) {
  std::string channels;
  for (std::size_t i = 0; i < cfg.position_channels.size(); ++i) {
    channels += (i ? "," : "") + std::to_string(cfg.position_channels[i]);
  }
  return {
      {"epochs", std::to_string(cfg.epochs)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"lr", format_double(cfg.lr)},
      {"lambda", format_double(cfg.lambda)},
      {"alpha", format_double(cfg.alpha)},
      {"patch_seconds", format_double(cfg.patch_seconds)},
      {"k", std::to_string(cfg.k)},
      {"seed", std::to_string(cfg.seed)},
      {"loss", to_string(cfg.loss)},
      {"init", to_string(cfg.init)},
      {"stages", std::to_string(cfg.model.stages)},
      {"layers_per_stage", std::to_string(cfg.model.layers_per_stage)},
      {"hidden_dim", std::to_string(cfg.model.hidden_dim)},
      {"latent_dim", std::to_string(cfg.model.latent_dim)},
      {"kernel", std::to_string(cfg.model.kernel)},
      {"entangled_encoder", cfg.model.disentangled_encoder ? "false" : "true"},
      {"entangled_decoder", cfg.model.disentangled_decoder ? "false" : "true"},
      {"eval_every", std::to_string(cfg.eval_every)},
      {"shuffle", cfg.shuffle ? "true" : "false"},
      {"standardize", cfg.standardize ? "true" : "false"},
      {"dead_word_restart", cfg.dead_word_restart ? "true" : "false"},
      {"dead_word_patience", std::to_string(cfg.dead_word_patience)},
      {"position_channels", channels.empty() ? "auto" : channels},
      {"kmeans_sample", std::to_string(cfg.kmeans_sample)},
      {"silhouette_cap", std::to_string(cfg.silhouette_cap)},
  };
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : config_to_map(TrainConfig{})) keys.push_back(k);
  return keys;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "epochs") cfg.epochs = parse_size(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_size(key, value);
  else if (key == "lr") cfg.lr = parse_real(key, value);
  else if (key == "lambda") cfg.lambda = parse_real(key, value);
  else if (key == "alpha") cfg.alpha = parse_real(key, value);
  else if (key == "patch_seconds") cfg.patch_seconds = parse_real(key, value);
  else if (key == "k") cfg.k = parse_size(key, value);
  else if (key == "seed") cfg.seed = parse_size(key, value);
  else if (key == "loss") cfg.loss = parse_reconstruction_loss(value);
  else if (key == "init") cfg.init = parse_codebook_init(value);
  else if (key == "stages") cfg.model.stages = parse_size(key, value);
  else if (key == "layers_per_stage") cfg.model.layers_per_stage = parse_size(key, value);
  else if (key == "hidden_dim") cfg.model.hidden_dim = parse_size(key, value);
  else if (key == "latent_dim") cfg.model.latent_dim = parse_size(key, value);
  else if (key == "kernel") cfg.model.kernel = parse_size(key, value);
  else if (key == "entangled_encoder") cfg.model.disentangled_encoder = !parse_bool(key, value);
  else if (key == "entangled_decoder") cfg.model.disentangled_decoder = !parse_bool(key, value);
  else if (key == "eval_every") cfg.eval_every = parse_size(key, value);
  else if (key == "shuffle") cfg.shuffle = parse_bool(key, value);
  else if (key == "standardize") cfg.standardize = parse_bool(key, value);
  else if (key == "dead_word_restart") cfg.dead_word_restart = parse_bool(key, value);
  else if (key == "dead_word_patience") cfg.dead_word_patience = parse_size(key, value);
  else if (key == "position_channels") cfg.position_channels = parse_index_list(key, value);
  else if (key == "kmeans_sample") cfg.kmeans_sample = parse_size(key, value);
  else if (key == "silhouette_cap") cfg.silhouette_cap = parse_size(key, value);
  else throw InvalidArgument("config: unknown key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

std::string config_to_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_to_map(cfg)) out += k + "=" + v + "\n";
  return out;
}

}  // namespace smq
