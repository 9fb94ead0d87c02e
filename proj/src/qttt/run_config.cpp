#include "qttt/run_config.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace qttt {

namespace {

using nlohmann::json;

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of a (possibly nested) key, found by scanning for each quoted key in
// turn after the previous one.
int line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::size_t found = text.find("\"" + key + "\"", pos);
    if (found == std::string::npos) return 0;
    pos = found;
  }
  return line_at(text, pos);
}

std::string dotted(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& k : path) out += (out.empty() ? "" : ".") + k;
  return out;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  void check_keys(const json& obj, const std::vector<std::string>& parent, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(parent, "must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.contains(key)) {
        auto path = parent;
        path.push_back(key);
        fail(path, "unknown key '" + dotted(path) + "'");
      }
    }
  }

  template <typename T>
  void read(const json& obj, const std::vector<std::string>& parent, const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    auto path = parent;
    path.push_back(key);
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(path, "'" + dotted(path) + "' has the wrong type");
    }
  }

  template <typename Fn>
  void guarded(const std::vector<std::string>& path, Fn&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) {
    throw ConfigError(path.empty() ? 1 : line_of(text_, path), message);
  }

 private:
  const std::string& text_;
};

}  // namespace

ConfigError::ConfigError(int line, const std::string& message)
    : std::invalid_argument("config line " + std::to_string(line) + ": " + message), line_(line) {}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_at(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
  }

  Reader r(text);
  r.check_keys(doc, {}, {"rule_version", "obs_mode", "seed", "output_dir", "episode_cap", "encoder", "ppo"});

  RunConfig cfg;
  std::string version = to_string(cfg.version);
  std::string mode = to_string(cfg.encoder.mode);
  r.read(doc, {}, "rule_version", version);
  r.read(doc, {}, "obs_mode", mode);
  r.guarded({"rule_version"}, [&] { cfg.version = parse_rule_version(version); });
  r.guarded({"obs_mode"}, [&] { cfg.encoder.mode = parse_obs_mode(mode); });
  r.read(doc, {}, "seed", cfg.ppo.seed);
  r.read(doc, {}, "output_dir", cfg.output_dir);
  r.read(doc, {}, "episode_cap", cfg.episode_cap);
  if (cfg.episode_cap < 1) r.fail({"episode_cap"}, "episode_cap must be >= 1");

  if (doc.contains("encoder")) {
    const json& enc = doc.at("encoder");
    const std::vector<std::string> p = {"encoder"};
    r.check_keys(enc, p, {"n_samples", "exact", "history_norm"});
    r.read(enc, p, "n_samples", cfg.encoder.n_samples);
    r.read(enc, p, "exact", cfg.encoder.exact);
    r.read(enc, p, "history_norm", cfg.encoder.history_norm);
    r.guarded(p, [&] { cfg.encoder.validate(); });
  }

  if (doc.contains("ppo")) {
    const json& ppo = doc.at("ppo");
    const std::vector<std::string> p = {"ppo"};
    r.check_keys(ppo, p,
                 {"gamma", "lambda", "clip", "learning_rate", "epochs", "minibatch_size", "steps_per_update",
                  "entropy_coef", "value_coef", "max_grad_norm", "total_steps", "eval_interval", "eval_games",
                  "hidden"});
    r.read(ppo, p, "gamma", cfg.ppo.gamma);
    r.read(ppo, p, "lambda", cfg.ppo.lambda);
    r.read(ppo, p, "clip", cfg.ppo.clip);
    r.read(ppo, p, "learning_rate", cfg.ppo.learning_rate);
    r.read(ppo, p, "epochs", cfg.ppo.epochs);
    r.read(ppo, p, "minibatch_size", cfg.ppo.minibatch_size);
    r.read(ppo, p, "steps_per_update", cfg.ppo.steps_per_update);
    r.read(ppo, p, "entropy_coef", cfg.ppo.entropy_coef);
    r.read(ppo, p, "value_coef", cfg.ppo.value_coef);
    r.read(ppo, p, "max_grad_norm", cfg.ppo.max_grad_norm);
    r.read(ppo, p, "total_steps", cfg.ppo.total_steps);
    r.read(ppo, p, "eval_interval", cfg.ppo.eval_interval);
    r.read(ppo, p, "eval_games", cfg.ppo.eval_games);
    r.read(ppo, p, "hidden", cfg.ppo.hidden);
    try {
      cfg.ppo.validate();
    } catch (const std::invalid_argument& e) {
      // Messages start with the field name.
      const std::string msg = e.what();
      r.fail({"ppo", msg.substr(0, msg.find(' '))}, msg);
    }
  }
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"rule_version", to_string(version)},
      {"obs_mode", to_string(encoder.mode)},
      {"seed", ppo.seed},
      {"output_dir", output_dir},
      {"episode_cap", episode_cap},
      {"encoder", {{"n_samples", encoder.n_samples}, {"exact", encoder.exact}, {"history_norm", encoder.history_norm}}},
      {"ppo",
       {{"gamma", ppo.gamma},
        {"lambda", ppo.lambda},
        {"clip", ppo.clip},
        {"learning_rate", ppo.learning_rate},
        {"epochs", ppo.epochs},
        {"minibatch_size", ppo.minibatch_size},
        {"steps_per_update", ppo.steps_per_update},
        {"entropy_coef", ppo.entropy_coef},
        {"value_coef", ppo.value_coef},
        {"max_grad_norm", ppo.max_grad_norm},
        {"total_steps", ppo.total_steps},
        {"eval_interval", ppo.eval_interval},
        {"eval_games", ppo.eval_games},
        {"hidden", ppo.hidden}}},
  };
}

}  // namespace qttt
