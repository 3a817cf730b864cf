// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_MODEL_HPP
#define CMAUG_MODEL_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmaug/core.hpp"
#include "cmaug/tape.hpp"

namespace cmaug {

struct ModelConfig {
  std::size_t input_dim = 16;   // raw frame dimension
  std::size_t embed_dim = 32;   // frame embedding / conv channels / gloss embedding
  std::size_t rnn_hidden = 32;  // per direction
  int vocab_size = 0;           // N; classifier emits N+1 including blank
  std::uint64_t init_seed = 1;

  // Shared output dimension of the video and text encoders (C3).
  std::size_t feature_dim() const { return 2 * rnn_hidden; }
  void validate() const;  // throws std::invalid_argument
};

// All trainable tensors, in a fixed order shared by the optimizer and the
// checkpoint format.
class ModelParams {
 public:
  struct Tensor {
    std::string name;
    Mat value;
  };

  ModelParams() = default;
  explicit ModelParams(const ModelConfig& config);  // seeded uniform init

  const ModelConfig& config() const { return config_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t tensor_index(const std::string& name) const;  // throws on unknown
  Mat& tensor(const std::string& name);
  const Mat& tensor(const std::string& name) const;
  std::size_t parameter_count() const;

 private:
  ModelConfig config_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Parameter tensors registered as tape leaves, parallel to
// ModelParams::tensors(). Gradients are read back through these vars.
struct BoundParams {
  const ModelParams* params = nullptr;
  std::vector<Tape::Var> vars;

  Tape::Var var(const std::string& name) const;
};

BoundParams bind(Tape& tape, const ModelParams& params);

// Graph builders. visual_encode requires T >= 16 (the receptive field);
// output length is floor(floor(T/2)/2).
Tape::Var visual_encode_node(Tape& tape, const BoundParams& p, const Mat& video);
Tape::Var sequential_encode_node(Tape& tape, const BoundParams& p, Tape::Var f);
Tape::Var classify_node(Tape& tape, const BoundParams& p, Tape::Var f_v);
Tape::Var text_encode_node(Tape& tape, const BoundParams& p, const GlossSequence& s);

// Value-level counterparts for inference.
FeatureSequence visual_encode(const ModelParams& params, const FeatureSequence& video);
FeatureSequence sequential_encode(const ModelParams& params, const FeatureSequence& f);
LogProbMatrix classify(const ModelParams& params, const FeatureSequence& f_v);
FeatureSequence text_encode(const ModelParams& params, const GlossSequence& s);

// Full video pipeline down to per-step log posteriors.
LogProbMatrix predict_log_probs(const ModelParams& params, const FeatureSequence& video);

// Checkpoint: one JSON header line (config, vocabulary, tensor shapes)
// followed by the raw little-endian float64 payload. Round-trips bit-exactly.
struct Checkpoint {
  ModelParams params;
  GlossVocabulary vocab;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const GlossVocabulary& vocab);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cmaug

#endif  // CMAUG_MODEL_HPP
