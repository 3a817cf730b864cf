// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_HARNESS_HPP
#define CMAUG_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cmaug/augment.hpp"
#include "cmaug/core.hpp"
#include "cmaug/ctc.hpp"
#include "cmaug/losses.hpp"
#include "cmaug/metrics.hpp"
#include "cmaug/model.hpp"

#include "json.hpp"

namespace cmaug {

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticConfig {
  int vocab_size = 20;                // G
  std::size_t feature_dim = 16;       // d
  std::size_t min_gloss_frames = 8;   // d_min
  std::size_t max_gloss_frames = 14;  // d_max
  double noise_stddev = 0.5;
  std::size_t min_sentence_len = 3;
  std::size_t max_sentence_len = 8;
  std::size_t train_size = 500;
  std::size_t test_size = 100;
  std::uint64_t seed = 7;
  // Prototypes as distinct basis vectors (requires feature_dim >= G)
  // instead of random unit vectors; used by alignment-recovery tests.
  bool orthogonal_prototypes = false;

  void validate() const;  // throws std::invalid_argument
};

void to_json(nlohmann::json& j, const SyntheticConfig& cfg);
void from_json(const nlohmann::json& j, SyntheticConfig& cfg);

struct Dataset {
  GlossVocabulary vocab;
  std::vector<VideoTextPair> train;
  std::vector<VideoTextPair> test;
  Mat prototypes;  // G x d unit rows, row g-1 for gloss g
};

// Sentences are sampled gloss sequences; every gloss occurrence spans a
// uniform duration in [d_min, d_max] of noisy copies of its prototype.
// Test sentences use label combinations never seen in train. Ground-truth
// segmentations are stored on every pair.
Dataset generate_dataset(const SyntheticConfig& cfg);

// JSON-lines dataset files: a header record {"type":"header","vocab":[...]}
// followed by one record per pair: {id, frames, glosses, segments} plus
// is_pseudo / provenance for pseudo pairs.
void write_dataset_jsonl(const std::string& path, const std::vector<VideoTextPair>& pairs,
                         const GlossVocabulary& vocab);

struct LoadedDataset {
  GlossVocabulary vocab;
  std::vector<VideoTextPair> pairs;
};

LoadedDataset read_dataset_jsonl(const std::string& path);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class AblationMode { full, video_only, text_only, baseline };

std::string to_string(AblationMode mode);
AblationMode ablation_mode_from_string(const std::string& name);

struct TrainConfig {
  double lambda = 0.9;
  int k_max = 3;       // maximum edit operations per pseudo pair
  double alpha = 0.3;  // triplet margin, on the per-cell DTW scale
  double gamma = 1.0;  // soft-DTW smoothing
  int beam_width = 10;
  double learning_rate = 5e-3;
  std::size_t batch_size = 3;
  std::size_t epochs = 50;
  std::size_t phase_a_epochs = 15;  // epochs before alignment extraction
  double frame_drop_rate = 0.2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  AblationMode mode = AblationMode::full;
  std::size_t embed_dim = 32;
  std::size_t rnn_hidden = 32;

  void validate() const;  // throws std::invalid_argument
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

struct StepRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based within the epoch
  LossBreakdown loss;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double mean_ctc_real = 0.0;
  double mean_total = 0.0;
  std::size_t pseudo_pairs = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochSummary> epochs;
  bool converged = false;
};

using StepLogger = std::function<void(const StepRecord&)>;
using EpochHook = std::function<void(std::size_t epoch, const ModelParams& params)>;

// Maps a segmentation produced at the encoder's output scale back to raw
// frames: spans scale by `factor`, the last span absorbs the remainder.
AlignmentSegmentation upscale_segmentation(const AlignmentSegmentation& seg,
                                           std::size_t factor, std::size_t raw_len);

// Bernoulli frame dropping; the mask is re-drawn (up to 100 times, then
// the sample is left undropped) until the result stays feasible: at least
// 16 frames and enough encoder steps for the label's shortest CTC path.
Mat drop_frames(const Mat& frames, double rate, const GlossSequence& label,
                rng::Engine& eng);

// Two-phase training. Phase A optimizes the real streams only; after
// `phase_a_epochs`, forced alignments are extracted each epoch, the
// segment bank rebuilt, pseudo pairs regenerated, and their loss terms
// added according to the ablation mode. Deterministic given the seed.
TrainResult train(const TrainConfig& cfg, const GlossVocabulary& vocab,
                  const std::vector<VideoTextPair>& data,
                  const StepLogger& on_step = nullptr, const EpochHook& on_epoch = nullptr);

// ---------------------------------------------------------------------------
// Evaluation / ablation
// ---------------------------------------------------------------------------

struct SampleDecode {
  std::string id;
  GlossSequence reference;
  std::vector<DecodeCandidate> candidates;
};

struct EvaluationResult {
  MetricsReport report;
  std::vector<SampleDecode> decodes;
};

// Beam-decodes every sample and aggregates corpus metrics with Top-K WER
// for K = 1..k_max. Samples are processed in parallel, reduced in order.
EvaluationResult evaluate(const ModelParams& params, const GlossVocabulary& vocab,
                          const std::vector<VideoTextPair>& data, int beam_width,
                          int k_max);

struct AblationRow {
  std::string param;  // "lambda" or "k"
  double value = 0.0;
  MetricsReport metrics;
  bool converged = false;
};

// Trains and evaluates once per grid value, varying `param` over `values`
// on top of `base`.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const GlossVocabulary& vocab,
                                      const std::vector<VideoTextPair>& train_data,
                                      const std::vector<VideoTextPair>& test_data,
                                      const std::string& param,
                                      const std::vector<double>& values,
                                      const StepLogger& on_step = nullptr);

nlohmann::json ablation_json(const std::vector<AblationRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace cmaug

#endif  // CMAUG_HARNESS_HPP
