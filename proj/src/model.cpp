// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/model.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "cmaug/rng.hpp"

#include "json.hpp"

namespace cmaug {
namespace {

constexpr std::size_t kConvWidth = 5;
constexpr std::size_t kMinFrames = 16;  // receptive field of the temporal encoder
constexpr const char* kCheckpointFormat = "cmaug-checkpoint";
constexpr int kCheckpointVersion = 1;

void fill_uniform(Mat& m, std::size_t fan_in, rng::Engine& eng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : m.flat()) {
    v = rng::uniform_real(eng, -bound, bound);
  }
}

std::vector<std::string> conv_tap_names(const char* stem) {
  std::vector<std::string> names;
  for (std::size_t w = 0; w < kConvWidth; ++w) {
    names.push_back(std::string(stem) + "_w" + std::to_string(w));
  }
  return names;
}

std::vector<Tape::Var> tap_vars(const BoundParams& p, const char* stem) {
  std::vector<Tape::Var> vars;
  for (const std::string& name : conv_tap_names(stem)) {
    vars.push_back(p.var(name));
  }
  return vars;
}

// One recurrent direction; returns the hidden state per timestep, indexed
// by original time regardless of scan direction.
std::vector<Tape::Var> rnn_scan(Tape& tape, Tape::Var x, Tape::Var wx, Tape::Var wh,
                                Tape::Var b, bool forward) {
  const std::size_t steps = tape.value(x).rows();
  std::vector<Tape::Var> states(steps);
  Tape::Var prev;
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t t = forward ? i : steps - 1 - i;
    Tape::Var pre = tape.matmul(tape.slice_rows(x, t, t + 1), wx);
    if (prev.valid()) {
      pre = tape.add(pre, tape.matmul(prev, wh));
    }
    Tape::Var h = tape.tanh(tape.add_bias(pre, b));
    states[t] = h;
    prev = h;
  }
  return states;
}

Tape::Var birnn(Tape& tape, const BoundParams& p, Tape::Var x, const char* stem) {
  const std::string s(stem);
  auto fwd = rnn_scan(tape, x, p.var(s + "_fwd_wx"), p.var(s + "_fwd_wh"),
                      p.var(s + "_fwd_b"), true);
  auto bwd = rnn_scan(tape, x, p.var(s + "_bwd_wx"), p.var(s + "_bwd_wh"),
                      p.var(s + "_bwd_b"), false);
  std::vector<Tape::Var> rows(fwd.size());
  for (std::size_t t = 0; t < fwd.size(); ++t) {
    rows[t] = tape.concat_cols({fwd[t], bwd[t]});
  }
  return tape.concat_rows(rows);
}

void write_f64_le(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char raw[8];
  for (int i = 0; i < 8; ++i) {
    raw[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  }
  os.write(reinterpret_cast<const char*>(raw), 8);
}

double read_f64_le(std::istream& is) {
  unsigned char raw[8];
  is.read(reinterpret_cast<char*>(raw), 8);
  if (!is) {
    throw std::runtime_error("checkpoint: truncated parameter payload");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(raw[i]) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0 || embed_dim == 0 || rnn_hidden == 0) {
    throw std::invalid_argument("model config: dimensions must be positive");
  }
  if (vocab_size < 1) {
    throw std::invalid_argument("model config: vocab_size must be at least 1");
  }
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d_in = config_.input_dim;
  const std::size_t d_h = config_.embed_dim;
  const std::size_t h = config_.rnn_hidden;
  const std::size_t c3 = config_.feature_dim();
  const std::size_t n_out = static_cast<std::size_t>(config_.vocab_size) + 1;

  rng::Engine eng(config_.init_seed);
  auto put = [&](const std::string& name, std::size_t rows, std::size_t cols,
                 std::size_t fan_in) {
    Mat m(rows, cols);
    fill_uniform(m, fan_in, eng);
    index_[name] = tensors_.size();
    tensors_.push_back(Tensor{name, std::move(m)});
  };
  auto put_conv = [&](const char* stem) {
    for (const std::string& name : conv_tap_names(stem)) {
      put(name, d_h, d_h, d_h * kConvWidth);
    }
    put(std::string(stem) + "_b", 1, d_h, d_h * kConvWidth);
  };
  auto put_rnn = [&](const std::string& stem, std::size_t in_dim) {
    for (const char* dir : {"fwd", "bwd"}) {
      put(stem + "_" + dir + "_wx", in_dim, h, in_dim);
      put(stem + "_" + dir + "_wh", h, h, h);
      put(stem + "_" + dir + "_b", 1, h, h);
    }
  };

  put("embed_w", d_in, d_h, d_in);
  put("embed_b", 1, d_h, d_in);
  put_conv("conv1");
  put_conv("conv2");
  put_rnn("vid", d_h);
  put("cls_w", c3, n_out, c3);
  put("cls_b", 1, n_out, c3);
  put("gloss_embed", static_cast<std::size_t>(config_.vocab_size), d_h, d_h);
  put_rnn("txt", d_h);
}

std::size_t ModelParams::tensor_index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::invalid_argument("model params: unknown tensor " + name);
  }
  return it->second;
}

Mat& ModelParams::tensor(const std::string& name) {
  return tensors_[tensor_index(name)].value;
}

const Mat& ModelParams::tensor(const std::string& name) const {
  return tensors_[tensor_index(name)].value;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) {
    n += t.value.size();
  }
  return n;
}

Tape::Var BoundParams::var(const std::string& name) const {
  return vars[params->tensor_index(name)];
}

BoundParams bind(Tape& tape, const ModelParams& params) {
  BoundParams bound;
  bound.params = &params;
  bound.vars.reserve(params.tensors().size());
  for (const ModelParams::Tensor& t : params.tensors()) {
    bound.vars.push_back(tape.leaf(t.value));
  }
  return bound;
}

Tape::Var visual_encode_node(Tape& tape, const BoundParams& p, const Mat& video) {
  if (video.rows() < kMinFrames) {
    throw std::invalid_argument("visual_encode: input shorter than the receptive field");
  }
  if (video.cols() != p.params->config().input_dim) {
    throw std::invalid_argument("visual_encode: frame dimension mismatch");
  }
  Tape::Var x = tape.leaf(video);
  Tape::Var e = tape.add_bias(tape.matmul(x, p.var("embed_w")), p.var("embed_b"));
  Tape::Var c1 = tape.tanh(tape.conv1d_same(e, tap_vars(p, "conv1"), p.var("conv1_b")));
  Tape::Var p1 = tape.maxpool2_rows(c1);
  Tape::Var c2 = tape.tanh(tape.conv1d_same(p1, tap_vars(p, "conv2"), p.var("conv2_b")));
  return tape.maxpool2_rows(c2);
}

Tape::Var sequential_encode_node(Tape& tape, const BoundParams& p, Tape::Var f) {
  return birnn(tape, p, f, "vid");
}

Tape::Var classify_node(Tape& tape, const BoundParams& p, Tape::Var f_v) {
  return tape.log_softmax_rows(
      tape.add_bias(tape.matmul(f_v, p.var("cls_w")), p.var("cls_b")));
}

Tape::Var text_encode_node(Tape& tape, const BoundParams& p, const GlossSequence& s) {
  if (s.empty()) {
    throw std::invalid_argument("text_encode: empty gloss sequence");
  }
  const int n = p.params->config().vocab_size;
  Tape::Var table = p.var("gloss_embed");
  std::vector<Tape::Var> rows;
  rows.reserve(s.length());
  for (int g : s.items) {
    if (g < 1 || g > n) {
      throw std::invalid_argument("text_encode: gloss id out of range");
    }
    const auto r = static_cast<std::size_t>(g - 1);
    rows.push_back(tape.slice_rows(table, r, r + 1));
  }
  return birnn(tape, p, tape.concat_rows(rows), "txt");
}

FeatureSequence visual_encode(const ModelParams& params, const FeatureSequence& video) {
  Tape tape;
  BoundParams p = bind(tape, params);
  Tape::Var out = visual_encode_node(tape, p, video.frames());
  return FeatureSequence(tape.value(out), FeatureRole::visual_feature);
}

FeatureSequence sequential_encode(const ModelParams& params, const FeatureSequence& f) {
  Tape tape;
  BoundParams p = bind(tape, params);
  Tape::Var out = sequential_encode_node(tape, p, tape.leaf(f.frames()));
  return FeatureSequence(tape.value(out), FeatureRole::sequential_feature);
}

LogProbMatrix classify(const ModelParams& params, const FeatureSequence& f_v) {
  Tape tape;
  BoundParams p = bind(tape, params);
  Tape::Var out = classify_node(tape, p, tape.leaf(f_v.frames()));
  return LogProbMatrix(tape.value(out));
}

FeatureSequence text_encode(const ModelParams& params, const GlossSequence& s) {
  Tape tape;
  BoundParams p = bind(tape, params);
  Tape::Var out = text_encode_node(tape, p, s);
  return FeatureSequence(tape.value(out), FeatureRole::text_feature);
}

LogProbMatrix predict_log_probs(const ModelParams& params, const FeatureSequence& video) {
  Tape tape;
  BoundParams p = bind(tape, params);
  Tape::Var f = visual_encode_node(tape, p, video.frames());
  Tape::Var f_v = sequential_encode_node(tape, p, f);
  Tape::Var logp = classify_node(tape, p, f_v);
  return LogProbMatrix(tape.value(logp));
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const GlossVocabulary& vocab) {
  if (vocab.size() != params.config().vocab_size) {
    throw std::invalid_argument("checkpoint: vocabulary size does not match config");
  }
  nlohmann::ordered_json header;
  header["format"] = kCheckpointFormat;
  header["version"] = kCheckpointVersion;
  header["config"] = {{"input_dim", params.config().input_dim},
                      {"embed_dim", params.config().embed_dim},
                      {"rnn_hidden", params.config().rnn_hidden},
                      {"vocab_size", params.config().vocab_size},
                      {"init_seed", params.config().init_seed}};
  header["vocab"] = vocab.glosses();
  nlohmann::ordered_json shapes = nlohmann::ordered_json::array();
  for (const ModelParams::Tensor& t : params.tensors()) {
    shapes.push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  header["tensors"] = std::move(shapes);

  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  }
  os << header.dump() << '\n';
  for (const ModelParams::Tensor& t : params.tensors()) {
    for (double v : t.value.flat()) {
      write_f64_le(os, v);
    }
  }
  if (!os) {
    throw std::runtime_error("checkpoint: write failed for " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("checkpoint: cannot open " + path);
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("checkpoint: missing header line");
  }
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != kCheckpointFormat ||
      header.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unrecognized format");
  }
  ModelConfig config;
  config.input_dim = header.at("config").at("input_dim").get<std::size_t>();
  config.embed_dim = header.at("config").at("embed_dim").get<std::size_t>();
  config.rnn_hidden = header.at("config").at("rnn_hidden").get<std::size_t>();
  config.vocab_size = header.at("config").at("vocab_size").get<int>();
  config.init_seed = header.at("config").at("init_seed").get<std::uint64_t>();

  ModelParams params(config);
  const auto& shapes = header.at("tensors");
  if (shapes.size() != params.tensors().size()) {
    throw std::runtime_error("checkpoint: tensor list does not match config");
  }
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    ModelParams::Tensor& t = params.tensors()[i];
    const auto& s = shapes[i];
    if (s.at("name").get<std::string>() != t.name ||
        s.at("rows").get<std::size_t>() != t.value.rows() ||
        s.at("cols").get<std::size_t>() != t.value.cols()) {
      throw std::runtime_error("checkpoint: tensor " + t.name + " has unexpected shape");
    }
    for (double& v : t.value.flat()) {
      v = read_f64_le(is);
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("checkpoint: trailing bytes after payload");
  }
  return Checkpoint{std::move(params),
                    GlossVocabulary(header.at("vocab").get<std::vector<std::string>>())};
}

}  // namespace cmaug
