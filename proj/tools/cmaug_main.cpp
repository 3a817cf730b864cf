// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmaug/gradcheck.hpp"
#include "cmaug/harness.hpp"
#include "cmaug/kernels.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open config file " + path);
  }
  return json::parse(is);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  return os;
}

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) {
    s.insert(0, width - s.size(), '0');
  }
  return s;
}

std::vector<std::string> gloss_names(const cmaug::GlossSequence& s,
                                     const cmaug::GlossVocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(s.length());
  for (int g : s.items) {
    out.push_back(vocab.name(g));
  }
  return out;
}

int cmd_gen_data(const std::string& config_path, const std::string& train_out,
                 const std::string& test_out, std::optional<std::uint64_t> seed) {
  cmaug::SyntheticConfig cfg;
  if (!config_path.empty()) {
    cfg = read_json_file(config_path).get<cmaug::SyntheticConfig>();
  }
  if (seed) {
    cfg.seed = *seed;
  }
  cmaug::Dataset ds = cmaug::generate_dataset(cfg);
  cmaug::write_dataset_jsonl(train_out, ds.train, ds.vocab);
  cmaug::write_dataset_jsonl(test_out, ds.test, ds.vocab);
  json summary;
  summary["train"] = {{"path", train_out}, {"pairs", ds.train.size()}};
  summary["test"] = {{"path", test_out}, {"pairs", ds.test.size()}};
  summary["vocab_size"] = ds.vocab.size();
  summary["config"] = cfg;
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& checkpoint_out, const std::string& checkpoint_dir,
              const std::string& log_path, std::optional<std::uint64_t> seed) {
  cmaug::TrainConfig cfg;
  if (!config_path.empty()) {
    cfg = read_json_file(config_path).get<cmaug::TrainConfig>();
  }
  if (seed) {
    cfg.seed = *seed;
  }
  cmaug::LoadedDataset data = cmaug::read_dataset_jsonl(data_path);

  std::ofstream log_os;
  cmaug::StepLogger on_step;
  if (!log_path.empty()) {
    log_os = open_output(log_path);
    on_step = [&log_os](const cmaug::StepRecord& rec) {
      json j = json::parse(rec.loss.to_json());
      j["epoch"] = rec.epoch;
      j["step"] = rec.step;
      log_os << j.dump() << '\n';
    };
  }
  cmaug::EpochHook on_epoch;
  if (!checkpoint_dir.empty()) {
    std::filesystem::create_directories(checkpoint_dir);
    on_epoch = [&](std::size_t epoch, const cmaug::ModelParams& params) {
      const std::string path =
          (std::filesystem::path(checkpoint_dir) / ("epoch-" + padded(epoch, 4) + ".ckpt"))
              .string();
      cmaug::save_checkpoint(path, params, data.vocab);
    };
  }

  cmaug::TrainResult result = cmaug::train(cfg, data.vocab, data.pairs, on_step, on_epoch);
  cmaug::save_checkpoint(checkpoint_out, result.params, data.vocab);

  for (const cmaug::EpochSummary& e : result.epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["mean_ctc_real"] = e.mean_ctc_real;
    j["mean_total"] = e.mean_total;
    j["pseudo_pairs"] = e.pseudo_pairs;
    std::cout << j.dump() << '\n';
  }
  json done;
  done["converged"] = result.converged;
  done["checkpoint"] = checkpoint_out;
  done["mode"] = cmaug::to_string(cfg.mode);
  std::cout << done.dump() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             int beam_width, int k_max, const std::string& out_path) {
  cmaug::Checkpoint ckpt = cmaug::load_checkpoint(checkpoint_path);
  cmaug::LoadedDataset data = cmaug::read_dataset_jsonl(data_path);
  cmaug::EvaluationResult res =
      cmaug::evaluate(ckpt.params, ckpt.vocab, data.pairs, beam_width, k_max);
  const std::string payload = res.report.to_json() + "\n";
  if (out_path.empty()) {
    std::cout << payload;
  } else {
    open_output(out_path) << payload;
  }
  return 0;
}

int cmd_decode(const std::string& checkpoint_path, const std::string& data_path,
               int beam_width, const std::string& out_path) {
  cmaug::Checkpoint ckpt = cmaug::load_checkpoint(checkpoint_path);
  cmaug::LoadedDataset data = cmaug::read_dataset_jsonl(data_path);
  cmaug::EvaluationResult res =
      cmaug::evaluate(ckpt.params, ckpt.vocab, data.pairs, beam_width, 1);
  std::ostringstream payload;
  for (const cmaug::SampleDecode& d : res.decodes) {
    json j;
    j["id"] = d.id;
    j["reference"] = gloss_names(d.reference, ckpt.vocab);
    json cands = json::array();
    for (std::size_t rank = 0; rank < d.candidates.size(); ++rank) {
      cands.push_back({{"rank", rank + 1},
                       {"log_prob", d.candidates[rank].log_prob},
                       {"glosses", gloss_names(d.candidates[rank].sequence, ckpt.vocab)}});
    }
    j["candidates"] = std::move(cands);
    payload << j.dump() << '\n';
  }
  if (out_path.empty()) {
    std::cout << payload.str();
  } else {
    open_output(out_path) << payload.str();
  }
  return 0;
}

int cmd_augment(const std::string& data_path, int k_max, std::uint64_t seed,
                const std::string& out_path) {
  cmaug::LoadedDataset data = cmaug::read_dataset_jsonl(data_path);
  cmaug::SegmentBank bank = cmaug::build_segment_bank(data.pairs);
  cmaug::rng::Engine eng(cmaug::rng::derive_seed(seed, "augment-cli"));
  std::vector<cmaug::VideoTextPair> pseudo;
  pseudo.reserve(data.pairs.size());
  for (const cmaug::VideoTextPair& pair : data.pairs) {
    pseudo.push_back(cmaug::generate_pseudo_pair(pair, k_max, bank, eng));
  }
  cmaug::write_dataset_jsonl(out_path, pseudo, data.vocab);
  json summary;
  summary["pairs"] = pseudo.size();
  summary["out"] = out_path;
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t instances) {
  const std::vector<cmaug::GradCheckCase> cases =
      cmaug::run_gradient_checks(seed, instances);
  for (const cmaug::GradCheckCase& c : cases) {
    json j;
    j["name"] = c.name;
    j["instances"] = c.instances;
    j["entries_checked"] = c.entries_checked;
    j["max_rel_error"] = c.max_rel_error;
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    std::cout << j.dump() << '\n';
  }
  if (!cmaug::all_passed(cases)) {
    json err;
    err["error"] = {{"type", "gradcheck_failed"},
                    {"message", "at least one gradient check exceeded its tolerance"}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  json ok;
  ok["all_passed"] = true;
  std::cout << ok.dump() << '\n';
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& train_path,
               const std::string& test_path, const std::string& param,
               const std::vector<double>& values, const std::string& out_path) {
  cmaug::TrainConfig base;
  if (!config_path.empty()) {
    base = read_json_file(config_path).get<cmaug::TrainConfig>();
  }
  cmaug::LoadedDataset train_data = cmaug::read_dataset_jsonl(train_path);
  cmaug::LoadedDataset test_data = cmaug::read_dataset_jsonl(test_path);
  if (train_data.vocab.glosses() != test_data.vocab.glosses()) {
    throw std::invalid_argument("ablate: train and test vocabularies differ");
  }
  const std::vector<cmaug::AblationRow> rows = cmaug::run_ablation(
      base, train_data.vocab, train_data.pairs, test_data.pairs, param, values);
  if (!out_path.empty()) {
    open_output(out_path) << cmaug::ablation_json(rows).dump() << '\n';
  }
  std::cout << cmaug::ablation_table(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-modality augmented continuous sequence recognition"};
  app.require_subcommand(1);

  std::string backend;
  app.add_option("--kernels", backend, "numeric kernel backend: scalar or avx2");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  std::string gen_config, gen_train_out = "train.jsonl", gen_test_out = "test.jsonl";
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "synthetic config JSON file");
  gen->add_option("--train-out", gen_train_out, "train split output path");
  gen->add_option("--test-out", gen_test_out, "test split output path");
  gen->add_option("--seed", gen_seed, "override the config seed");

  auto* train = app.add_subcommand("train", "train a model");
  std::string train_config, train_data, train_ckpt = "model.ckpt", train_ckpt_dir,
                            train_log;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--config", train_config, "train config JSON file");
  train->add_option("--data", train_data, "training dataset JSONL")->required();
  train->add_option("--checkpoint-out", train_ckpt, "final checkpoint path");
  train->add_option("--checkpoint-dir", train_ckpt_dir, "per-epoch checkpoint directory");
  train->add_option("--log", train_log, "per-step loss log (JSON lines)");
  train->add_option("--seed", train_seed, "override the config seed");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_data, eval_out;
  int eval_beam = 10, eval_k = 10;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval->add_option("--data", eval_data, "dataset JSONL")->required();
  eval->add_option("--beam", eval_beam, "beam width");
  eval->add_option("--k-max", eval_k, "largest K for Top-K WER");
  eval->add_option("--out", eval_out, "metrics output path (default stdout)");

  auto* decode = app.add_subcommand("decode", "decode a dataset");
  std::string dec_ckpt, dec_data, dec_out;
  int dec_beam = 10;
  decode->add_option("--checkpoint", dec_ckpt, "checkpoint path")->required();
  decode->add_option("--data", dec_data, "dataset JSONL")->required();
  decode->add_option("--beam", dec_beam, "beam width");
  decode->add_option("--out", dec_out, "decode output path (default stdout)");

  auto* augment = app.add_subcommand("augment", "generate pseudo pairs");
  std::string aug_data, aug_out = "pseudo.jsonl";
  int aug_k = 3;
  std::uint64_t aug_seed = 1;
  augment->add_option("--data", aug_data, "real dataset JSONL with segmentations")
      ->required();
  augment->add_option("--k-max", aug_k, "maximum edit operations per plan");
  augment->add_option("--seed", aug_seed, "random seed");
  augment->add_option("--out", aug_out, "pseudo dataset output path");

  auto* gradcheck = app.add_subcommand("gradcheck", "run the gradient-check suites");
  std::uint64_t gc_seed = 1;
  std::size_t gc_instances = 20;
  gradcheck->add_option("--seed", gc_seed, "random seed");
  gradcheck->add_option("--instances", gc_instances, "instances per case");

  auto* ablate = app.add_subcommand("ablate", "train/evaluate over a parameter grid");
  std::string ab_config, ab_train, ab_test, ab_param = "lambda", ab_out;
  std::vector<double> ab_values;
  ablate->add_option("--config", ab_config, "base train config JSON file");
  ablate->add_option("--train-data", ab_train, "training dataset JSONL")->required();
  ablate->add_option("--test-data", ab_test, "test dataset JSONL")->required();
  ablate->add_option("--param", ab_param, "grid parameter: lambda or k");
  ablate->add_option("--values", ab_values, "grid values")->required()->expected(-1);
  ablate->add_option("--out", ab_out, "JSON results output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!backend.empty()) {
      if (backend == "scalar") {
        cmaug::kern::set_backend(cmaug::kern::Backend::scalar);
      } else if (backend == "avx2") {
        cmaug::kern::set_backend(cmaug::kern::Backend::avx2);
      } else {
        throw std::invalid_argument("unknown kernel backend '" + backend + "'");
      }
    }
    if (gen->parsed()) {
      return cmd_gen_data(gen_config, gen_train_out, gen_test_out, gen_seed);
    }
    if (train->parsed()) {
      return cmd_train(train_config, train_data, train_ckpt, train_ckpt_dir, train_log,
                       train_seed);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_ckpt, eval_data, eval_beam, eval_k, eval_out);
    }
    if (decode->parsed()) {
      return cmd_decode(dec_ckpt, dec_data, dec_beam, dec_out);
    }
    if (augment->parsed()) {
      return cmd_augment(aug_data, aug_k, aug_seed, aug_out);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(gc_seed, gc_instances);
    }
    if (ablate->parsed()) {
      return cmd_ablate(ab_config, ab_train, ab_test, ab_param, ab_values, ab_out);
    }
  } catch (const std::invalid_argument& e) {
    json err;
    err["error"] = {{"type", "invalid_argument"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    json err;
    err["error"] = {{"type", "domain_error"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"type", "runtime_error"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
