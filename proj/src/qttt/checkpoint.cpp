#include "qttt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace qttt {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'Q', 'T', 'T', 'T', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint: " + path);
  return value;
}

void write_layer(std::ostream& out, const DenseLayer& layer) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.cols()));
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) put<double>(out, layer.weight(r, c));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.bias.size()));
  for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put<double>(out, layer.bias(r));
}

DenseLayer read_layer(std::istream& in, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  const auto r = get<std::uint32_t>(in, path);
  const auto c = get<std::uint32_t>(in, path);
  if (r != rows || c != cols) throw CheckpointError("layer shape does not match metadata in " + path);
  DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = get<double>(in, path);
  }
  if (get<std::uint32_t>(in, path) != rows) throw CheckpointError("bias length does not match metadata in " + path);
  for (Eigen::Index i = 0; i < rows; ++i) layer.bias(i) = get<double>(in, path);
  return layer;
}

}  // namespace

std::string code_version() { return QTTT_VERSION_STRING; }

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  if (static_cast<std::size_t>(ckpt.params.input_dim) != observation_size(ckpt.meta.encoder.mode)) {
    throw CheckpointError("refusing to save " + path + ": mode " + to_string(ckpt.meta.encoder.mode) +
                          " does not fit a network with " + std::to_string(ckpt.params.input_dim) + " inputs");
  }
  const nlohmann::json meta = {
      {"obs_mode", to_string(ckpt.meta.encoder.mode)},
      {"rule_version", to_string(ckpt.meta.rule_version)},
      {"input_dim", ckpt.params.input_dim},
      {"hidden", ckpt.params.hidden},
      {"n_samples", ckpt.meta.encoder.n_samples},
      {"exact", ckpt.meta.encoder.exact},
      {"history_norm", ckpt.meta.encoder.history_norm},
      {"episode_cap", ckpt.meta.episode_cap},
      {"training_step", ckpt.meta.training_step},
      {"seed", ckpt.meta.seed},
      {"code_version", ckpt.meta.code_version},
      {"eval_avg_reward", ckpt.meta.eval_avg_reward},
  };
  const std::string meta_text = meta.dump();

  // Write-then-rename so an interrupted save never clobbers a good file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(meta_text.size()));
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    for (const auto& layer : ckpt.params.trunk) write_layer(out, layer);
    write_layer(out, ckpt.params.policy_head);
    write_layer(out, ckpt.params.value_head);
    if (!out) throw CheckpointError("failed writing checkpoint: " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw CheckpointError("not a qttt checkpoint: " + path);
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointFormatVersion) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version) + " in " + path);
  }
  const auto meta_len = get<std::uint32_t>(in, path);
  std::string meta_text(meta_len, '\0');
  in.read(meta_text.data(), meta_len);
  if (!in) throw CheckpointError("truncated checkpoint metadata: " + path);

  Checkpoint ckpt;
  try {
    const auto meta = nlohmann::json::parse(meta_text);
    ckpt.meta.encoder.mode = parse_obs_mode(meta.at("obs_mode").get<std::string>());
    ckpt.meta.rule_version = parse_rule_version(meta.at("rule_version").get<std::string>());
    ckpt.meta.encoder.n_samples = meta.at("n_samples").get<int>();
    ckpt.meta.encoder.exact = meta.at("exact").get<bool>();
    ckpt.meta.encoder.history_norm = meta.at("history_norm").get<double>();
    ckpt.meta.episode_cap = meta.at("episode_cap").get<int>();
    ckpt.meta.training_step = meta.at("training_step").get<long>();
    ckpt.meta.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.meta.code_version = meta.at("code_version").get<std::string>();
    ckpt.meta.eval_avg_reward = meta.at("eval_avg_reward").get<double>();
    ckpt.params.input_dim = meta.at("input_dim").get<int>();
    ckpt.params.hidden = meta.at("hidden").get<std::vector<int>>();
  } catch (const std::exception& e) {
    throw CheckpointError("bad checkpoint metadata in " + path + ": " + e.what());
  }
  if (static_cast<std::size_t>(ckpt.params.input_dim) != observation_size(ckpt.meta.encoder.mode)) {
    throw CheckpointError("checkpoint " + path + " declares mode " + to_string(ckpt.meta.encoder.mode) +
                          " but its network expects " + std::to_string(ckpt.params.input_dim) + " inputs");
  }

  Eigen::Index fan_in = ckpt.params.input_dim;
  for (int width : ckpt.params.hidden) {
    ckpt.params.trunk.push_back(read_layer(in, path, width, fan_in));
    fan_in = width;
  }
  ckpt.params.policy_head = read_layer(in, path, kActionCount, fan_in);
  ckpt.params.value_head = read_layer(in, path, 1, fan_in);
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes in checkpoint: " + path);
  return ckpt;
}

}  // namespace qttt
