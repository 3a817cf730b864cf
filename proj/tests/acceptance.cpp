// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Each numbered criterion prints exactly one PASS or FAIL
// line with the measured quantities; the exit code is the number of failed
// criteria. Criterion 12 exercises the command-line binary named by the
// CMAUG_CLI environment variable; everything else runs in-process against
// the library. Tolerances are pinned here, next to the checks they govern.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmaug/augment.hpp"
#include "cmaug/core.hpp"
#include "cmaug/ctc.hpp"
#include "cmaug/gradcheck.hpp"
#include "cmaug/harness.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/metrics.hpp"
#include "cmaug/model.hpp"
#include "cmaug/rng.hpp"
#include "cmaug/softdtw.hpp"
#include "oracle.hpp"

using namespace cmaug;

namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned tolerances and thresholds, one per criterion that needs one.
constexpr double kCtcOracleTol = 1e-9;        // criterion 1
constexpr double kCtcOracleBudgetSec = 10.0;  // criterion 1
constexpr double kCtcNormTol = 1e-8;          // criterion 2
constexpr double kDtwOracleTol = 1e-9;        // criterion 4
constexpr double kBeamLogProbTol = 1e-9;      // criterion 8
constexpr double kChiSquareCritical = 9.210;  // criterion 7: df=2, p=0.01
constexpr double kCtcConvergedTarget = 0.01;  // criterion 9
constexpr double kFrameAccuracyTarget = 0.90;  // criterion 9
constexpr double kSeedBudgetSec = 900.0;       // criterion 10
constexpr double kLambdaZeroWorseFactor = 1.25;  // criterion 11

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared instance generators
// ---------------------------------------------------------------------------

LogProbMatrix random_log_probs(std::size_t classes, std::size_t steps, rng::Engine& eng) {
  LogProbMatrix p(classes, steps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < classes; ++k) {
      p.at(static_cast<int>(k), t) = rng::normal(eng);
    }
    const double lse = kern::logsumexp(p.step(t));
    for (double& v : p.step(t)) v -= lse;
  }
  return p;
}

GlossSequence random_label(rng::Engine& eng, std::size_t max_len, int alphabet) {
  GlossSequence s;
  const std::size_t len = rng::uniform_index(eng, max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    s.items.push_back(rng::uniform_int(eng, 1, alphabet));
  }
  return s;
}

// Real pair whose frames are filled with their gloss id, so spliced
// segments stay attributable.
VideoTextPair traceable_pair(std::string id, const std::vector<int>& label,
                             const std::vector<std::size_t>& durations) {
  VideoTextPair p;
  p.id = std::move(id);
  p.label.items = label;
  std::size_t total = 0;
  for (const std::size_t d : durations) total += d;
  Mat frames(total, 3);
  std::size_t at = 0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    p.segmentation.segments.push_back({label[i], at, at + durations[i]});
    for (std::size_t r = 0; r < durations[i]; ++r) {
      for (std::size_t c = 0; c < 3; ++c) frames(at + r, c) = label[i];
    }
    at += durations[i];
  }
  p.features = FeatureSequence(std::move(frames), FeatureRole::raw_video);
  return p;
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: CTC vs exhaustive path enumeration
// ---------------------------------------------------------------------------

Outcome criterion_ctc_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  rng::Engine eng(101);
  double max_diff = 0.0;
  for (int it = 0; it < 200; ++it) {
    const std::size_t steps = 1 + rng::uniform_index(eng, 6);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 3));
    const LogProbMatrix p =
        random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    const GlossSequence s = random_label(eng, steps, glosses);
    const double got = ctc_log_prob(p, s);
    const double want = oracle::ctc_path_sum(p, s.items);
    if (want == 0.0) {
      if (got != -kInf) {
        return {false, fmt("instance %d: oracle sum 0 but log prob %.3g", it, got)};
      }
      continue;
    }
    max_diff = std::max(max_diff, std::abs(got - std::log(want)));
  }
  const double elapsed = seconds_since(t0);
  const bool ok = max_diff < kCtcOracleTol && elapsed < kCtcOracleBudgetSec;
  return {ok, fmt("max |log p - oracle| %.2e over 200 instances, %.2f s", max_diff,
                  elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 2: CTC normalization over all label sequences
// ---------------------------------------------------------------------------

Outcome criterion_ctc_normalization() {
  rng::Engine eng(102);
  double worst = 0.0;
  for (std::size_t steps = 1; steps <= 5; ++steps) {
    for (int glosses = 1; glosses <= 3; ++glosses) {
      const LogProbMatrix p =
          random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
      double total = 0.0;
      for (const auto& seq : oracle::all_sequences(glosses, steps)) {
        const double lp = ctc_log_prob(p, GlossSequence{seq});
        if (lp != -kInf) total += std::exp(lp);
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  return {worst <= kCtcNormTol,
          fmt("max |sum_s p(s) - 1| %.2e over 15 matrices", worst)};
}

// ---------------------------------------------------------------------------
// Criterion 3: gradient checks vs central finite differences
// ---------------------------------------------------------------------------

Outcome criterion_gradients() {
  const std::vector<GradCheckCase> cases = run_gradient_checks(2024, 20);
  double worst = 0.0;
  std::string worst_name = "-";
  bool ok = !cases.empty();
  for (const GradCheckCase& c : cases) {
    ok = ok && c.passed && c.instances >= 20;
    if (c.max_rel_error > worst) {
      worst = c.max_rel_error;
      worst_name = c.name;
    }
  }
  return {ok, fmt("%zu cases x 20 instances, worst rel err %.2e (%s)", cases.size(),
                  worst, worst_name.c_str())};
}

// ---------------------------------------------------------------------------
// Criterion 4: soft-DTW at gamma 0 vs exhaustive minimum
// ---------------------------------------------------------------------------

Outcome criterion_dtw_oracle() {
  rng::Engine eng(104);
  double max_diff = 0.0;
  for (std::size_t rows = 1; rows <= 6; ++rows) {
    for (std::size_t cols = 1; cols <= 6; ++cols) {
      for (int rep = 0; rep < 2; ++rep) {
        Mat c(rows, cols);
        for (double& v : c.flat()) v = rng::uniform01(eng);
        const double hard = soft_dtw(CostMatrix{c, 0.0, 0}).value;
        max_diff = std::max(max_diff, std::abs(hard - oracle::dtw_min(c)));
        for (const double gamma : {0.01, 0.1, 1.0}) {
          const double soft = soft_dtw(CostMatrix{c, gamma, 0}).value;
          if (soft > hard + 1e-12) {
            return {false, fmt("%zux%zu: soft %.6f > hard %.6f at gamma %.2f", rows,
                               cols, soft, hard, gamma)};
          }
        }
      }
    }
  }
  return {max_diff <= kDtwOracleTol,
          fmt("max |gamma=0 - exhaustive min| %.2e over 72 matrices; soft <= hard at "
              "gamma {0.01, 0.1, 1}",
              max_diff)};
}

// ---------------------------------------------------------------------------
// Criterion 5: edit distance vs recursive Levenshtein; metric properties
// ---------------------------------------------------------------------------

Outcome criterion_wer_oracle() {
  rng::Engine eng(105);
  for (int it = 0; it < 500; ++it) {
    const GlossSequence a = random_label(eng, 8, 5);
    const GlossSequence b = random_label(eng, 8, 5);
    const std::size_t got = edit_alignment(a, b).cost();
    const std::size_t want = oracle::levenshtein(a.items, b.items);
    if (got != want) {
      return {false, fmt("pair %d: alignment cost %zu != oracle %zu", it, got, want)};
    }
  }
  for (int it = 0; it < 200; ++it) {
    const GlossSequence a = random_label(eng, 8, 4);
    const GlossSequence b = random_label(eng, 8, 4);
    const GlossSequence c = random_label(eng, 8, 4);
    const std::size_t ab = edit_alignment(a, b).cost();
    const std::size_t ba = edit_alignment(b, a).cost();
    const std::size_t bc = edit_alignment(b, c).cost();
    const std::size_t ac = edit_alignment(a, c).cost();
    if (ab != ba) return {false, fmt("triple %d: d(a,b)=%zu != d(b,a)=%zu", it, ab, ba)};
    if (ac > ab + bc) {
      return {false, fmt("triple %d: d(a,c)=%zu > d(a,b)+d(b,c)=%zu", it, ac, ab + bc)};
    }
  }
  return {true, "500/500 pairs exact; symmetry and triangle hold on 200 triples"};
}

// ---------------------------------------------------------------------------
// Criterion 6: Top-K WER monotone in K on a real evaluation output
// ---------------------------------------------------------------------------

Outcome criterion_topk_monotone() {
  SyntheticConfig sc;
  sc.vocab_size = 6;
  sc.feature_dim = 8;
  sc.train_size = 24;
  sc.test_size = 10;
  sc.min_sentence_len = 2;
  sc.max_sentence_len = 4;
  sc.seed = 13;
  const Dataset ds = generate_dataset(sc);

  TrainConfig tc;
  tc.mode = AblationMode::baseline;
  tc.epochs = 6;
  tc.batch_size = 6;
  tc.embed_dim = 10;
  tc.rnn_hidden = 8;
  tc.seed = 5;
  const TrainResult tr = train(tc, ds.vocab, ds.train);
  const EvaluationResult ev = evaluate(tr.params, ds.vocab, ds.test, 10, 10);

  if (ev.report.top_k.size() != 10) {
    return {false, fmt("expected Top-K for K=1..10, got %zu entries",
                       ev.report.top_k.size())};
  }
  double prev = kInf;
  for (int k = 1; k <= 10; ++k) {
    const auto it = ev.report.top_k.find(k);
    if (it == ev.report.top_k.end()) return {false, fmt("missing K=%d", k)};
    if (it->second > prev) {
      return {false, fmt("Top-%d WER %.6f above Top-%d WER %.6f", k, it->second, k - 1,
                         prev)};
    }
    prev = it->second;
  }
  if (ev.report.top_k.at(1) != ev.report.wer) {
    return {false, fmt("Top-1 WER %.6f != corpus WER %.6f", ev.report.top_k.at(1),
                       ev.report.wer)};
  }
  return {true, fmt("non-increasing over K=1..10, Top-1 %.4f equals corpus WER",
                    ev.report.wer)};
}

// ---------------------------------------------------------------------------
// Criterion 7: pseudo-pair invariants over 1000 draws
// ---------------------------------------------------------------------------

Outcome criterion_augmentation() {
  const std::vector<VideoTextPair> pairs = {
      traceable_pair("p1", {1, 2, 3}, {3, 4, 5}),
      traceable_pair("p2", {2, 4, 1}, {2, 3, 2}),
      traceable_pair("p3", {4, 3}, {4, 2}),
      traceable_pair("p4", {3, 1, 4, 2}, {2, 2, 3, 2}),
  };
  const SegmentBank bank = build_segment_bank(pairs);
  rng::Engine eng(107);
  std::vector<std::size_t> k_counts(3, 0);
  for (int it = 0; it < 1000; ++it) {
    const VideoTextPair& base = pairs[it % pairs.size()];
    const VideoTextPair q = generate_pseudo_pair(base, 3, bank, eng);
    const std::size_t k = q.plan.size();
    if (!q.is_pseudo) return {false, fmt("draw %d: pair not marked pseudo", it)};
    if (k < 1 || k > 3) return {false, fmt("draw %d: k=%zu outside [1,3]", it, k)};
    if (q.label == base.label) return {false, fmt("draw %d: label unchanged", it)};
    const std::size_t dist = oracle::levenshtein(base.label.items, q.label.items);
    if (dist > k) {
      return {false, fmt("draw %d: edit distance %zu exceeds k=%zu", it, dist, k)};
    }
    try {
      validate_total_segmentation(q.segmentation, q.label, q.features.length());
    } catch (const std::exception& e) {
      return {false, fmt("draw %d: invalid segmentation: %s", it, e.what())};
    }
    ++k_counts[k - 1];
  }
  const double chi2 = oracle::chi_square_uniform(k_counts);
  return {chi2 < kChiSquareCritical,
          fmt("1000 draws, k counts {%zu, %zu, %zu}, chi^2 %.2f < %.3f", k_counts[0],
              k_counts[1], k_counts[2], chi2, kChiSquareCritical)};
}

// ---------------------------------------------------------------------------
// Criterion 8: beam search vs exhaustive argmax
// ---------------------------------------------------------------------------

Outcome criterion_beam_exact() {
  rng::Engine eng(108);
  double max_diff = 0.0;
  for (int it = 0; it < 50; ++it) {
    const std::size_t steps = 1 + rng::uniform_index(eng, 4);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 2));
    const LogProbMatrix p =
        random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    const auto sequences = oracle::all_sequences(glosses, steps);
    GlossSequence best;
    double best_lp = -kInf;
    for (const auto& seq : sequences) {
      const double lp = ctc_log_prob(p, GlossSequence{seq});
      const bool better =
          lp > best_lp ||
          (lp == best_lp && (seq.size() < best.items.size() ||
                             (seq.size() == best.items.size() && seq < best.items)));
      if (better) {
        best_lp = lp;
        best = GlossSequence{seq};
      }
    }
    const auto cands = beam_decode(p, static_cast<int>(sequences.size()));
    if (cands.empty() || !(cands[0].sequence == best)) {
      return {false, fmt("instance %d: beam rank 1 differs from exhaustive argmax", it)};
    }
    max_diff = std::max(max_diff, std::abs(cands[0].log_prob - best_lp));
  }
  return {max_diff < kBeamLogProbTol,
          fmt("50/50 argmax matches, max |log p| gap %.2e", max_diff)};
}

// ---------------------------------------------------------------------------
// Criterion 9: forced-alignment recovery on noiseless separable data
// ---------------------------------------------------------------------------

Outcome criterion_alignment_recovery() {
  SyntheticConfig sc;
  sc.vocab_size = 6;
  sc.feature_dim = 8;
  sc.noise_stddev = 0.0;
  sc.orthogonal_prototypes = true;
  sc.train_size = 40;
  sc.test_size = 10;
  sc.min_sentence_len = 2;
  sc.max_sentence_len = 3;
  // Long segments keep the x4 temporal quantization small next to the
  // segment length, so boundary recovery is measured, not pool rounding.
  sc.min_gloss_frames = 16;
  sc.max_gloss_frames = 24;
  sc.seed = 21;
  const Dataset ds = generate_dataset(sc);

  TrainConfig tc;
  tc.mode = AblationMode::baseline;
  tc.frame_drop_rate = 0.0;
  tc.epochs = 120;
  tc.batch_size = 4;
  tc.seed = 9;
  const TrainResult tr = train(tc, ds.vocab, ds.train);

  double train_ctc = 0.0;
  for (const VideoTextPair& pair : ds.train) {
    const LogProbMatrix p = predict_log_probs(tr.params, pair.features);
    train_ctc -= ctc_log_prob(p, pair.label);
  }
  train_ctc /= static_cast<double>(ds.train.size());
  if (!(train_ctc < kCtcConvergedTarget)) {
    return {false, fmt("train CTC %.4f did not reach %.2f", train_ctc,
                       kCtcConvergedTarget)};
  }

  double accuracy_sum = 0.0;
  for (const VideoTextPair& pair : ds.test) {
    const std::size_t frames = pair.features.length();
    const LogProbMatrix p = predict_log_probs(tr.params, pair.features);
    const ForcedAlignment fa = forced_align(p, pair.label);
    const AlignmentSegmentation up = upscale_segmentation(fa.segmentation, 4, frames);
    std::vector<int> pred(frames, 0), truth(frames, 0);
    for (const auto& s : up.segments) {
      for (std::size_t t = s.begin; t < s.end; ++t) pred[t] = s.gloss;
    }
    for (const auto& s : pair.segmentation.segments) {
      for (std::size_t t = s.begin; t < s.end; ++t) truth[t] = s.gloss;
    }
    std::size_t hits = 0;
    for (std::size_t t = 0; t < frames; ++t) {
      if (pred[t] == truth[t]) ++hits;
    }
    accuracy_sum += static_cast<double>(hits) / static_cast<double>(frames);
  }
  const double accuracy = accuracy_sum / static_cast<double>(ds.test.size());
  return {accuracy >= kFrameAccuracyTarget,
          fmt("train CTC %.4f, mean frame accuracy %.3f (target %.2f)", train_ctc,
              accuracy, kFrameAccuracyTarget)};
}

// ---------------------------------------------------------------------------
// Criterion 10: directional end-to-end reproduction over 5 seeds
// ---------------------------------------------------------------------------

Outcome criterion_directional() {
  const Dataset ds = generate_dataset(SyntheticConfig{});
  const std::vector<AblationMode> modes = {AblationMode::baseline,
                                           AblationMode::video_only,
                                           AblationMode::text_only, AblationMode::full};
  std::map<AblationMode, std::vector<double>> wers;
  double slowest_seed = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const AblationMode mode : modes) {
      TrainConfig tc;
      tc.mode = mode;
      tc.seed = seed;
      const TrainResult tr = train(tc, ds.vocab, ds.train);
      const EvaluationResult ev =
          evaluate(tr.params, ds.vocab, ds.test, tc.beam_width, 1);
      wers[mode].push_back(ev.report.wer);
    }
    slowest_seed = std::max(slowest_seed, seconds_since(t0));
  }
  const double b = median5(wers[AblationMode::baseline]);
  const double v = median5(wers[AblationMode::video_only]);
  const double t = median5(wers[AblationMode::text_only]);
  const double f = median5(wers[AblationMode::full]);
  const bool ordered = f <= v && v <= b && f <= t && t <= b && f < b;
  const bool in_budget = slowest_seed < kSeedBudgetSec;
  return {ordered && in_budget,
          fmt("median WER baseline %.4f, video-only %.4f, text-only %.4f, full %.4f; "
              "slowest seed %.0f s",
              b, v, t, f, slowest_seed)};
}

// ---------------------------------------------------------------------------
// Criterion 11: lambda=1 equals baseline bit-exactly; lambda=0 flagged
// ---------------------------------------------------------------------------

Outcome criterion_lambda_sanity() {
  const Dataset ds = generate_dataset(SyntheticConfig{});

  TrainConfig base;
  base.mode = AblationMode::baseline;
  base.lambda = 1.0;
  base.seed = 4;
  TrainConfig full1 = base;
  full1.mode = AblationMode::full;
  TrainConfig full0 = base;
  full0.mode = AblationMode::full;
  full0.lambda = 0.0;

  const TrainResult rb = train(base, ds.vocab, ds.train);
  const TrainResult r1 = train(full1, ds.vocab, ds.train);
  const TrainResult r0 = train(full0, ds.vocab, ds.train);

  bool epochs_equal = rb.epochs.size() == r1.epochs.size();
  for (std::size_t i = 0; epochs_equal && i < rb.epochs.size(); ++i) {
    epochs_equal = rb.epochs[i].mean_ctc_real == r1.epochs[i].mean_ctc_real &&
                   rb.epochs[i].mean_total == r1.epochs[i].mean_total &&
                   rb.epochs[i].pseudo_pairs == r1.epochs[i].pseudo_pairs;
  }
  const std::string jb = evaluate(rb.params, ds.vocab, ds.test, 10, 5).report.to_json();
  const std::string j1 = evaluate(r1.params, ds.vocab, ds.test, 10, 5).report.to_json();
  const bool bit_exact = epochs_equal && jb == j1;

  const double wer_base = evaluate(rb.params, ds.vocab, ds.test, 10, 1).report.wer;
  const double wer_zero = evaluate(r0.params, ds.vocab, ds.test, 10, 1).report.wer;
  const bool flagged = !r0.converged;
  const bool clearly_worse = wer_zero > wer_base * kLambdaZeroWorseFactor;

  return {bit_exact && (flagged || clearly_worse),
          fmt("lambda=1 vs baseline: epochs %s, metrics JSON %s; lambda=0: converged=%s,"
              " WER %.3f vs baseline %.3f",
              epochs_equal ? "equal" : "differ", jb == j1 ? "identical" : "differ",
              r0.converged ? "true" : "false", wer_zero, wer_base)};
}

// ---------------------------------------------------------------------------
// Criterion 12: CLI determinism, byte-for-byte
// ---------------------------------------------------------------------------

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_cli_determinism() {
  const char* cli = std::getenv("CMAUG_CLI");
  if (cli == nullptr || *cli == '\0') {
    return {false, "CMAUG_CLI environment variable not set"};
  }
  const fs::path root = fs::temp_directory_path() / "cmaug_acceptance_cli";
  std::error_code ec;
  fs::remove_all(root, ec);

  const std::string synth_cfg =
      R"({"vocab_size":8,"feature_dim":10,"train_size":16,"test_size":6,)"
      R"("min_sentence_len":2,"max_sentence_len":4,"seed":5})";
  const std::string train_cfg =
      R"({"mode":"full","epochs":4,"phase_a_epochs":2,"batch_size":4,)"
      R"("embed_dim":10,"rnn_hidden":8,"seed":3})";
  const std::string ablate_cfg =
      R"({"mode":"full","epochs":3,"phase_a_epochs":1,"batch_size":6,)"
      R"("embed_dim":10,"rnn_hidden":8,"seed":3})";

  const std::vector<std::string> commands = {
      "gen-data --config synth.json --train-out train.jsonl --test-out test.jsonl"
      " > out_gen.txt 2>&1",
      "train --config train.json --data train.jsonl --checkpoint-out model.ckpt"
      " --log train.log > out_train.txt 2>&1",
      "eval --data test.jsonl --checkpoint model.ckpt --beam 6 --k-max 3"
      " > out_eval.txt 2>&1",
      "decode --checkpoint model.ckpt --data test.jsonl --beam 6 --out decodes.jsonl"
      " > out_decode.txt 2>&1",
      "augment --data train.jsonl --k-max 3 --seed 9 --out pseudo.jsonl"
      " > out_augment.txt 2>&1",
      "gradcheck --seed 5 --instances 3 > out_gradcheck.txt 2>&1",
      "ablate --config ablate.json --train-data train.jsonl --test-data test.jsonl"
      " --param lambda --values 0.5 1.0 --out ablation.json > out_ablate.txt 2>&1",
  };
  const std::vector<std::string> artifacts = {
      "train.jsonl", "test.jsonl",   "out_gen.txt",      "model.ckpt",
      "train.log",   "out_train.txt", "out_eval.txt",     "decodes.jsonl",
      "out_decode.txt", "pseudo.jsonl", "out_augment.txt", "out_gradcheck.txt",
      "ablation.json", "out_ablate.txt",
  };

  for (int run = 1; run <= 2; ++run) {
    const fs::path dir = root / ("run" + std::to_string(run));
    fs::create_directories(dir);
    std::ofstream(dir / "synth.json") << synth_cfg;
    std::ofstream(dir / "train.json") << train_cfg;
    std::ofstream(dir / "ablate.json") << ablate_cfg;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const std::string cmd =
          "cd '" + dir.string() + "' && '" + cli + "' " + commands[i];
      if (std::system(cmd.c_str()) != 0) {
        return {false, fmt("run %d: command %zu exited nonzero (%s...)", run, i + 1,
                           commands[i].substr(0, 24).c_str())};
      }
    }
  }

  for (const std::string& name : artifacts) {
    const auto a = slurp(root / "run1" / name);
    const auto b = slurp(root / "run2" / name);
    if (!a || !b) return {false, fmt("artifact %s missing", name.c_str())};
    if (*a != *b) return {false, fmt("artifact %s differs between runs", name.c_str())};
  }
  fs::remove_all(root, ec);
  return {true, fmt("%zu commands repeated, %zu artifacts byte-identical",
                    commands.size(), artifacts.size())};
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "CTC log-probability matches exhaustive path enumeration",
       criterion_ctc_oracle},
      {2, "CTC probabilities over all label sequences sum to 1",
       criterion_ctc_normalization},
      {3, "analytic gradients match central finite differences", criterion_gradients},
      {4, "soft-DTW at gamma=0 matches the exhaustive path minimum",
       criterion_dtw_oracle},
      {5, "edit alignment matches recursive Levenshtein and is a metric",
       criterion_wer_oracle},
      {6, "Top-K WER is non-increasing in K and anchored at corpus WER",
       criterion_topk_monotone},
      {7, "pseudo pairs satisfy the edit-plan invariants with uniform k",
       criterion_augmentation},
      {8, "beam search returns the exhaustive argmax at full width",
       criterion_beam_exact},
      {9, "forced alignment recovers ground-truth segment boundaries",
       criterion_alignment_recovery},
      {10, "full training beats ablations beats baseline in median WER",
       criterion_directional},
      {11, "lambda=1 reproduces baseline bit-exactly and lambda=0 is flagged",
       criterion_lambda_sanity},
      {12, "repeated CLI runs produce byte-identical outputs",
       criterion_cli_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, fmt("unhandled exception: %s", e.what())};
    }
    std::printf("%s criterion %2d: %s (%s)\n", out.ok ? "PASS" : "FAIL", c.number,
                c.name, out.detail.c_str());
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }
  return failures;
}
