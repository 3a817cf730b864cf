// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cmaug/harness.hpp"

namespace cmaug {
namespace {

std::size_t worker_count(std::size_t jobs) {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max<std::size_t>(1, std::min<std::size_t>(jobs, hw == 0 ? 1 : hw));
}

}  // namespace

EvaluationResult evaluate(const ModelParams& params, const GlossVocabulary& vocab,
                          const std::vector<VideoTextPair>& data, int beam_width,
                          int k_max) {
  if (beam_width < 1 || k_max < 1) {
    throw std::invalid_argument("evaluate: beam width and K must be at least 1");
  }
  if (data.empty()) {
    throw std::invalid_argument("evaluate: dataset is empty");
  }
  for (const VideoTextPair& pair : data) {
    validate_sequence(pair.label, vocab);
    if (pair.features.dim() != params.config().input_dim) {
      throw std::invalid_argument("evaluate: pair " + pair.id +
                                  " does not match the model input dimension");
    }
  }

  EvaluationResult out;
  out.decodes.resize(data.size());

  // Samples decode independently; the reduction below walks them in order.
  const std::size_t workers = worker_count(data.size());
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&](std::size_t offset) {
    try {
      for (std::size_t i = offset; i < data.size(); i += workers) {
        LogProbMatrix log_p = predict_log_probs(params, data[i].features);
        out.decodes[i] =
            SampleDecode{data[i].id, data[i].label, beam_decode(log_p, beam_width)};
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) {
        failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(run, w);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<RankedSample> ranked;
  ranked.reserve(data.size());
  for (const SampleDecode& d : out.decodes) {
    RankedSample r;
    r.reference = d.reference;
    for (const DecodeCandidate& c : d.candidates) {
      r.candidates.push_back(c.sequence);
    }
    ranked.push_back(std::move(r));
  }
  out.report = corpus_metrics(ranked, k_max);
  return out;
}

std::vector<AblationRow> run_ablation(const TrainConfig& base, const GlossVocabulary& vocab,
                                      const std::vector<VideoTextPair>& train_data,
                                      const std::vector<VideoTextPair>& test_data,
                                      const std::string& param,
                                      const std::vector<double>& values,
                                      const StepLogger& on_step) {
  if (param != "lambda" && param != "k") {
    throw std::invalid_argument("run_ablation: param must be 'lambda' or 'k'");
  }
  if (values.empty()) {
    throw std::invalid_argument("run_ablation: empty grid");
  }
  std::vector<AblationRow> rows;
  for (double value : values) {
    TrainConfig cfg = base;
    if (param == "lambda") {
      cfg.lambda = value;
    } else {
      cfg.k_max = static_cast<int>(std::llround(value));
    }
    TrainResult tr = train(cfg, vocab, train_data, on_step);
    EvaluationResult ev = evaluate(tr.params, vocab, test_data, base.beam_width,
                                   std::min(base.beam_width, 5));
    rows.push_back(AblationRow{param, value, ev.report, tr.converged});
  }
  return rows;
}

nlohmann::json ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const AblationRow& row : rows) {
    nlohmann::json j;
    j["param"] = row.param;
    j["value"] = row.value;
    j["converged"] = row.converged;
    j["metrics"] = nlohmann::json::parse(row.metrics.to_json());
    out.push_back(std::move(j));
  }
  return out;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(10) << (rows.empty() ? "param" : rows.front().param)
     << std::right << std::setw(10) << "wer" << std::setw(10) << "acc_w" << std::setw(8)
     << "del" << std::setw(8) << "ins" << std::setw(8) << "sub" << std::setw(12)
     << "converged" << '\n';
  for (const AblationRow& row : rows) {
    os << std::left << std::setw(10) << std::setprecision(4) << row.value << std::right
       << std::fixed << std::setprecision(4) << std::setw(10) << row.metrics.wer
       << std::setw(10) << row.metrics.acc_w << std::setw(8) << row.metrics.n_del
       << std::setw(8) << row.metrics.n_ins << std::setw(8) << row.metrics.n_sub
       << std::setw(12) << (row.converged ? "yes" : "no") << '\n';
    os.unsetf(std::ios::fixed);
  }
  return os.str();
}

}  // namespace cmaug
