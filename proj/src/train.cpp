// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "cmaug/harness.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/rng.hpp"
#include "cmaug/tape.hpp"

namespace cmaug {
namespace {

constexpr std::size_t kMinEncoderFrames = 16;
constexpr std::size_t kPoolFactor = 4;  // two stride-2 pools
constexpr int kDropRetries = 100;
constexpr int kPseudoFeasibilityRetries = 20;
// An epoch-level CTC mean must fall below this fraction of the first
// epoch's mean for the run to count as converged.
constexpr double kConvergenceRatio = 0.8;

std::size_t encoder_steps(std::size_t frames) { return frames / 2 / 2; }

bool feasible(std::size_t frames, const GlossSequence& label) {
  return frames >= kMinEncoderFrames && encoder_steps(frames) >= min_path_steps(label);
}

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::size_t t = 0;
};

AdamState make_adam(const ModelParams& params) {
  AdamState s;
  for (const ModelParams::Tensor& tensor : params.tensors()) {
    s.m.emplace_back(tensor.value.rows(), tensor.value.cols());
    s.v.emplace_back(tensor.value.rows(), tensor.value.cols());
  }
  return s;
}

void adam_step(const TrainConfig& cfg, ModelParams& params, AdamState& state,
               const Tape& tape, const BoundParams& bound) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    Mat& w = params.tensors()[i].value;
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    const Mat& g = tape.grad(bound.vars[i]);
    const bool has_grad = g.size() != 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = has_grad ? g.flat()[k] : 0.0;
      m.flat()[k] = cfg.adam_beta1 * m.flat()[k] + (1.0 - cfg.adam_beta1) * gk;
      v.flat()[k] = cfg.adam_beta2 * v.flat()[k] + (1.0 - cfg.adam_beta2) * gk * gk;
      const double m_hat = m.flat()[k] / bc1;
      const double v_hat = v.flat()[k] / bc2;
      w.flat()[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  }
}

struct SampleTerms {
  Tape::Var align;  // ctc_real (+ ctc_pseudo)
  Tape::Var ctc_real;
  Tape::Var disc_v;
  Tape::Var disc_l;
  Tape::Var sem;
};

struct TermFlags {
  bool ctc_pseudo = false;
  bool disc_v = false;
  bool disc_l = false;
  bool sem = false;
};

// Soft-DTW between two feature nodes under the cosine cost, scaled by the
// alignment size. The raw accumulated value grows with sequence length,
// which would let the alignment terms drown out the CTC term on long
// samples; the per-cell average keeps them commensurate.
Tape::Var scaled_dtw(Tape& tape, Tape::Var a, Tape::Var b, double gamma) {
  Tape::Var cost = tape.cosine_cost(a, b);
  const Mat& c = tape.value(cost);
  const double cells = static_cast<double>(c.rows() + c.cols());
  return tape.scale(tape.soft_dtw(cost, gamma), 1.0 / cells);
}

SampleTerms build_sample_graph(Tape& tape, const BoundParams& bound,
                               const TrainConfig& cfg, const VideoTextPair& real,
                               const VideoTextPair* pseudo, const TermFlags& flags,
                               rng::Engine& drop_eng) {
  SampleTerms terms;
  Mat dropped = drop_frames(real.features.frames(), cfg.frame_drop_rate, real.label,
                            drop_eng);
  Tape::Var f = visual_encode_node(tape, bound, dropped);
  Tape::Var f_v = sequential_encode_node(tape, bound, f);
  Tape::Var log_p = classify_node(tape, bound, f_v);
  terms.ctc_real = tape.ctc(log_p, real.label);
  terms.align = terms.ctc_real;

  const bool want_pseudo_video = (flags.ctc_pseudo || flags.disc_l) && pseudo != nullptr;
  Tape::Var f_v_p;
  if (want_pseudo_video) {
    Mat dropped_p = drop_frames(pseudo->features.frames(), cfg.frame_drop_rate,
                                pseudo->label, drop_eng);
    Tape::Var fp = visual_encode_node(tape, bound, dropped_p);
    f_v_p = sequential_encode_node(tape, bound, fp);
    if (flags.ctc_pseudo) {
      Tape::Var ctc_p = tape.ctc(classify_node(tape, bound, f_v_p), pseudo->label);
      terms.align = tape.add(terms.ctc_real, ctc_p);
    }
  }

  // Every cross-modal term trains exactly one encoder against the other's
  // features taken as constants (fresh tape leaves). Coupling both sides of
  // a DTW alignment lets the streams chase each other's noise — early in
  // the augmented phase the text embeddings are still settling, and a
  // two-sided pull degrades the recognition path instead of regularizing
  // it. One-directional terms keep a clean teacher per stream: the
  // semantic term moves text toward the visual geometry, the video triplet
  // separates real from pseudo text targets, and the text triplet
  // separates real from pseudo video targets.
  if (flags.sem || flags.disc_v || flags.disc_l) {
    Tape::Var f_l = text_encode_node(tape, bound, real.label);
    if (flags.sem) {
      Tape::Var f_v_const = tape.leaf(tape.value(f_v));
      terms.sem = scaled_dtw(tape, f_v_const, f_l, cfg.gamma);
    }
    if (flags.disc_v && pseudo != nullptr) {
      Tape::Var f_l_const = tape.leaf(tape.value(f_l));
      Tape::Var f_l_p = text_encode_node(tape, bound, pseudo->label);
      Tape::Var f_l_p_const = tape.leaf(tape.value(f_l_p));
      Tape::Var d_rr = scaled_dtw(tape, f_v, f_l_const, cfg.gamma);
      Tape::Var d_rp = scaled_dtw(tape, f_v, f_l_p_const, cfg.gamma);
      terms.disc_v = tape.hinge(tape.add_scalar(tape.sub(d_rr, d_rp), cfg.alpha));
    }
    if (flags.disc_l && want_pseudo_video) {
      Tape::Var f_v_const = tape.leaf(tape.value(f_v));
      Tape::Var f_v_p_const = tape.leaf(tape.value(f_v_p));
      Tape::Var d_rr = scaled_dtw(tape, f_l, f_v_const, cfg.gamma);
      Tape::Var d_lp = scaled_dtw(tape, f_l, f_v_p_const, cfg.gamma);
      terms.disc_l = tape.hinge(tape.add_scalar(tape.sub(d_rr, d_lp), cfg.alpha));
    }
  }
  return terms;
}

// Mean node over per-sample term vars; invalid when no sample had the term.
Tape::Var mean_term(Tape& tape, const std::vector<Tape::Var>& vars) {
  if (vars.empty()) {
    return {};
  }
  return tape.weighted_sum(vars,
                           std::vector<double>(vars.size(), 1.0 / vars.size()));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, rng::Engine& eng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng::uniform_index(eng, i)]);
  }
  return order;
}

}  // namespace

std::string to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::full:
      return "full";
    case AblationMode::video_only:
      return "video-only";
    case AblationMode::text_only:
      return "text-only";
    case AblationMode::baseline:
      return "baseline";
  }
  throw std::invalid_argument("unknown ablation mode");
}

AblationMode ablation_mode_from_string(const std::string& name) {
  if (name == "full") return AblationMode::full;
  if (name == "video-only") return AblationMode::video_only;
  if (name == "text-only") return AblationMode::text_only;
  if (name == "baseline") return AblationMode::baseline;
  throw std::invalid_argument("unknown ablation mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("train config: lambda must lie in [0,1]");
  }
  if (k_max < 1) {
    throw std::invalid_argument("train config: K must be at least 1");
  }
  if (alpha < 0.0) {
    throw std::invalid_argument("train config: alpha must be nonnegative");
  }
  if (gamma < 0.0) {
    throw std::invalid_argument("train config: gamma must be nonnegative");
  }
  if (beam_width < 1) {
    throw std::invalid_argument("train config: beam width must be at least 1");
  }
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("train config: learning rate must be positive");
  }
  if (batch_size == 0 || epochs == 0) {
    throw std::invalid_argument("train config: batch size and epochs must be positive");
  }
  if (frame_drop_rate < 0.0 || frame_drop_rate >= 1.0) {
    throw std::invalid_argument("train config: frame drop rate must lie in [0,1)");
  }
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0 ||
      adam_epsilon <= 0.0) {
    throw std::invalid_argument("train config: bad optimizer hyperparameters");
  }
  if (embed_dim == 0 || rnn_hidden == 0) {
    throw std::invalid_argument("train config: model dimensions must be positive");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{{"lambda", cfg.lambda},
                     {"k_max", cfg.k_max},
                     {"alpha", cfg.alpha},
                     {"gamma", cfg.gamma},
                     {"beam_width", cfg.beam_width},
                     {"learning_rate", cfg.learning_rate},
                     {"batch_size", cfg.batch_size},
                     {"epochs", cfg.epochs},
                     {"phase_a_epochs", cfg.phase_a_epochs},
                     {"frame_drop_rate", cfg.frame_drop_rate},
                     {"adam_beta1", cfg.adam_beta1},
                     {"adam_beta2", cfg.adam_beta2},
                     {"adam_epsilon", cfg.adam_epsilon},
                     {"seed", cfg.seed},
                     {"mode", to_string(cfg.mode)},
                     {"embed_dim", cfg.embed_dim},
                     {"rnn_hidden", cfg.rnn_hidden}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  static const std::set<std::string> known = {
      "lambda",        "k_max",         "alpha",        "gamma",
      "beam_width",    "learning_rate", "batch_size",   "epochs",
      "phase_a_epochs", "frame_drop_rate", "adam_beta1", "adam_beta2",
      "adam_epsilon",  "seed",          "mode",         "embed_dim",
      "rnn_hidden"};
  if (!j.is_object()) {
    throw std::invalid_argument("train config: expected a JSON object");
  }
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      throw std::invalid_argument("train config: unknown key '" + item.key() + "'");
    }
  }
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.beam_width = j.value("beam_width", cfg.beam_width);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.phase_a_epochs = j.value("phase_a_epochs", cfg.phase_a_epochs);
  cfg.frame_drop_rate = j.value("frame_drop_rate", cfg.frame_drop_rate);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_epsilon = j.value("adam_epsilon", cfg.adam_epsilon);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("mode")) {
    cfg.mode = ablation_mode_from_string(j.at("mode").get<std::string>());
  }
  cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
  cfg.rnn_hidden = j.value("rnn_hidden", cfg.rnn_hidden);
}

AlignmentSegmentation upscale_segmentation(const AlignmentSegmentation& seg,
                                           std::size_t factor, std::size_t raw_len) {
  if (factor == 0) {
    throw std::invalid_argument("upscale_segmentation: factor must be positive");
  }
  AlignmentSegmentation out;
  if (seg.segments.empty()) {
    return out;
  }
  if (raw_len <= seg.segments.back().begin * factor) {
    throw std::invalid_argument("upscale_segmentation: raw length too short");
  }
  for (const auto& s : seg.segments) {
    out.segments.push_back({s.gloss, s.begin * factor, s.end * factor});
  }
  out.segments.back().end = raw_len;
  return out;
}

Mat drop_frames(const Mat& frames, double rate, const GlossSequence& label,
                rng::Engine& eng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("drop_frames: rate must lie in [0,1)");
  }
  if (rate == 0.0) {
    return frames;
  }
  std::vector<std::size_t> keep;
  keep.reserve(frames.rows());
  for (int attempt = 0; attempt < kDropRetries; ++attempt) {
    keep.clear();
    for (std::size_t t = 0; t < frames.rows(); ++t) {
      if (!rng::bernoulli(eng, rate)) {
        keep.push_back(t);
      }
    }
    if (feasible(keep.size(), label)) {
      Mat out(keep.size(), frames.cols());
      for (std::size_t r = 0; r < keep.size(); ++r) {
        auto src = frames.row(keep[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
      }
      return out;
    }
  }
  return frames;
}

TrainResult train(const TrainConfig& cfg, const GlossVocabulary& vocab,
                  const std::vector<VideoTextPair>& data, const StepLogger& on_step,
                  const EpochHook& on_epoch) {
  cfg.validate();
  if (data.empty()) {
    throw std::invalid_argument("train: dataset is empty");
  }
  for (const VideoTextPair& pair : data) {
    if (pair.is_pseudo) {
      throw std::invalid_argument("train: pair " + pair.id +
                                  " is pseudo; training data must be real pairs");
    }
    validate_sequence(pair.label, vocab);
    if (pair.features.dim() != data.front().features.dim()) {
      throw std::invalid_argument("train: inconsistent feature dimensions");
    }
    if (!feasible(pair.features.length(), pair.label)) {
      throw std::invalid_argument("train: pair " + pair.id +
                                  " is too short for its label");
    }
  }

  ModelConfig mc;
  mc.input_dim = data.front().features.dim();
  mc.embed_dim = cfg.embed_dim;
  mc.rnn_hidden = cfg.rnn_hidden;
  mc.vocab_size = vocab.size();
  mc.init_seed = rng::derive_seed(cfg.seed, "init");
  ModelParams params(mc);
  AdamState adam = make_adam(params);

  rng::Engine order_eng(rng::derive_seed(cfg.seed, "order"));
  rng::Engine drop_eng(rng::derive_seed(cfg.seed, "drop"));
  rng::Engine aug_eng(rng::derive_seed(cfg.seed, "augment"));

  // lambda = 1 collapses the objective to the CTC terms alone; the whole
  // augmentation path is skipped so the run matches baseline bit for bit.
  const bool augmented = cfg.mode != AblationMode::baseline && cfg.lambda < 1.0;
  TermFlags phase_b_flags;
  if (augmented) {
    phase_b_flags.sem = true;
    switch (cfg.mode) {
      case AblationMode::full:
        phase_b_flags.ctc_pseudo = true;
        phase_b_flags.disc_v = true;
        phase_b_flags.disc_l = true;
        break;
      case AblationMode::video_only:
        phase_b_flags.ctc_pseudo = true;
        phase_b_flags.disc_l = true;
        break;
      case AblationMode::text_only:
        phase_b_flags.disc_v = true;
        break;
      case AblationMode::baseline:
        break;
    }
  }

  TrainResult result{std::move(params), {}, false};
  std::vector<std::optional<VideoTextPair>> pseudo(data.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const bool phase_b = augmented && epoch > cfg.phase_a_epochs;
    std::size_t pseudo_count = 0;

    if (phase_b) {
      // Re-align with the current model, rebuild the bank, regenerate the
      // pseudo pairs.
      std::vector<VideoTextPair> aligned;
      aligned.reserve(data.size());
      for (const VideoTextPair& pair : data) {
        LogProbMatrix log_p = predict_log_probs(result.params, pair.features);
        ForcedAlignment fa = forced_align(log_p, pair.label);
        VideoTextPair ap = pair;
        ap.segmentation = upscale_segmentation(fa.segmentation, kPoolFactor,
                                               pair.features.length());
        aligned.push_back(std::move(ap));
      }
      SegmentBank bank = build_segment_bank(aligned);
      for (std::size_t i = 0; i < aligned.size(); ++i) {
        pseudo[i].reset();
        for (int attempt = 0; attempt < kPseudoFeasibilityRetries; ++attempt) {
          VideoTextPair candidate =
              generate_pseudo_pair(aligned[i], cfg.k_max, bank, aug_eng);
          if (feasible(candidate.features.length(), candidate.label)) {
            pseudo[i] = std::move(candidate);
            ++pseudo_count;
            break;
          }
        }
      }
    }

    const TermFlags flags = phase_b ? phase_b_flags
                                    : TermFlags{false, false, false, augmented};
    std::vector<std::size_t> order = shuffled_indices(data.size(), order_eng);

    double epoch_ctc_sum = 0.0;
    double epoch_total_sum = 0.0;
    std::size_t epoch_steps = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Tape tape;
      BoundParams bound = bind(tape, result.params);
      std::vector<Tape::Var> align_terms, ctc_real_terms, disc_v_terms, disc_l_terms,
          sem_terms;
      for (std::size_t i = start; i < stop; ++i) {
        const VideoTextPair& sample = data[order[i]];
        const VideoTextPair* ps =
            pseudo[order[i]].has_value() ? &*pseudo[order[i]] : nullptr;
        SampleTerms terms =
            build_sample_graph(tape, bound, cfg, sample, ps, flags, drop_eng);
        align_terms.push_back(terms.align);
        ctc_real_terms.push_back(terms.ctc_real);
        if (terms.disc_v.valid()) disc_v_terms.push_back(terms.disc_v);
        if (terms.disc_l.valid()) disc_l_terms.push_back(terms.disc_l);
        if (terms.sem.valid()) sem_terms.push_back(terms.sem);
      }

      Tape::Var align_mean = mean_term(tape, align_terms);
      Tape::Var disc_v_mean = mean_term(tape, disc_v_terms);
      Tape::Var disc_l_mean = mean_term(tape, disc_l_terms);
      Tape::Var sem_mean = mean_term(tape, sem_terms);

      std::vector<Tape::Var> parts{align_mean};
      std::vector<double> weights{cfg.lambda};
      for (Tape::Var v : {disc_v_mean, disc_l_mean, sem_mean}) {
        if (v.valid()) {
          parts.push_back(v);
          weights.push_back(1.0 - cfg.lambda);
        }
      }
      Tape::Var total = tape.weighted_sum(parts, weights);
      tape.backward(total);
      adam_step(cfg, result.params, adam, tape, bound);

      double ctc_real_mean = 0.0;
      for (Tape::Var v : ctc_real_terms) {
        ctc_real_mean += tape.value(v)(0, 0);
      }
      ctc_real_mean /= static_cast<double>(ctc_real_terms.size());
      LossBreakdown breakdown = total_loss(
          tape.value(align_mean)(0, 0),
          disc_v_mean.valid() ? tape.value(disc_v_mean)(0, 0) : 0.0,
          disc_l_mean.valid() ? tape.value(disc_l_mean)(0, 0) : 0.0,
          sem_mean.valid() ? tape.value(sem_mean)(0, 0) : 0.0, cfg.lambda, cfg.alpha);
      epoch_ctc_sum += ctc_real_mean;
      epoch_total_sum += breakdown.total;
      ++epoch_steps;
      if (on_step) {
        on_step(StepRecord{epoch, epoch_steps, breakdown});
      }
    }

    result.epochs.push_back(EpochSummary{epoch, epoch_ctc_sum / epoch_steps,
                                         epoch_total_sum / epoch_steps, pseudo_count});
    if (on_epoch) {
      on_epoch(epoch, result.params);
    }
  }

  const double first = result.epochs.front().mean_ctc_real;
  const double last = result.epochs.back().mean_ctc_real;
  result.converged = std::isfinite(last) && last <= kConvergenceRatio * first;
  return result;
}

}  // namespace cmaug
