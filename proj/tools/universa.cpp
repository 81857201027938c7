// universa: train and run the multi-metric speech quality profiler.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "universa/data/manifest.hpp"
#include "universa/data/synth.hpp"
#include "universa/eval/report.hpp"
#include "universa/metrics/annotate.hpp"
#include "universa/text/bpe.hpp"
#include "universa/train/predict.hpp"
#include "universa/train/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace universa;

struct ConfigFile {
  ModelConfig model;
  TrainConfig train;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(s);
  while (std::getline(iss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flat "key = value" (or "key value") text; keys mirror ModelConfig and
// TrainConfig. Unknown keys are rejected.
ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  ConfigFile cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream iss(line);
    std::string key, eq, value;
    if (!(iss >> key)) continue;
    if (!(iss >> eq)) throw ValidationError(path + ":" + std::to_string(line_no) + ": missing value");
    if (eq == "=") {
      if (!(iss >> value)) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": missing value");
      }
    } else {
      value = eq.starts_with('=') ? eq.substr(1) : eq;
    }
    try {
      if (key == "d_model") cfg.model.d_model = std::stoi(value);
      else if (key == "heads") cfg.model.heads = std::stoi(value);
      else if (key == "layers") cfg.model.layers = std::stoi(value);
      else if (key == "ffn_dim") cfg.model.ffn_dim = std::stoi(value);
      else if (key == "dropout") cfg.model.dropout = std::stod(value);
      else if (key == "use_ref_audio") cfg.model.use_ref_audio = value == "1" || value == "true";
      else if (key == "use_ref_text") cfg.model.use_ref_text = value == "1" || value == "true";
      else if (key == "feature_dim") cfg.model.feature_dim = std::stoi(value);
      else if (key == "metrics") cfg.model.metric_ids = split_csv(value);
      else if (key == "epochs") cfg.train.epochs = std::stoi(value);
      else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
      else if (key == "peak_lr") cfg.train.peak_lr = std::stod(value);
      else if (key == "warmup_steps") cfg.train.warmup_steps = std::stoll(value);
      else if (key == "lr_decay") cfg.train.lr_decay = value;
      else if (key == "decay_steps") cfg.train.decay_steps = std::stoll(value);
      else if (key == "weight_decay") cfg.train.weight_decay = std::stod(value);
      else if (key == "grad_clip_norm") cfg.train.grad_clip_norm = std::stod(value);
      else if (key == "seed") cfg.train.seed = std::stoull(value);
      else if (key == "norm_order") cfg.train.norm_order = std::stoi(value);
      else if (key == "threads") cfg.train.threads = std::stoi(value);
      else if (key == "max_steps") cfg.train.max_steps = std::stoll(value);
      else if (key == "log_every") cfg.train.log_every = std::stoi(value);
      else throw ValidationError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

std::vector<std::string> corpus_from_manifest(const Manifest& m) {
  std::vector<std::string> corpus;
  for (const auto& rec : m.records) {
    if (rec.text) corpus.push_back(*rec.text);
    if (rec.pseudo_text) corpus.push_back(*rec.pseudo_text);
  }
  if (corpus.empty()) throw ValidationError("manifest has no text fields");
  return corpus;
}

int run(int argc, char** argv) {
  CLI::App app{"universa: unified multi-metric speech quality profiler"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  SynthConfig synth_cfg;
  synth->add_option("--out", synth_cfg.out_dir, "output directory")->required();
  synth->add_option("--count", synth_cfg.count, "number of utterances");
  uint64_t synth_seed = 0;
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--snr-lo", synth_cfg.snr_lo_db, "minimum mixing SNR (dB)");
  synth->add_option("--snr-hi", synth_cfg.snr_hi_db, "maximum mixing SNR (dB)");
  synth->callback([&] {
    synth_cfg.seed = synth_seed;
    Manifest m = synth_corpus(synth_cfg);
    std::cout << "wrote " << m.size() << " records to " << synth_cfg.out_dir
              << "/manifest.jsonl\n";
  });

  // split
  auto* split = app.add_subcommand("split", "split a manifest into train/dev/test");
  std::string split_manifest_path, split_out_dir, split_ratios = "85,5,10";
  uint64_t split_seed = 0;
  split->add_option("--manifest", split_manifest_path, "input manifest")->required();
  split->add_option("--out-dir", split_out_dir, "output directory")->required();
  split->add_option("--ratios", split_ratios, "train,dev,test percentages");
  split->add_option("--seed", split_seed, "shuffle seed");
  split->callback([&] {
    const auto parts = split_csv(split_ratios);
    if (parts.size() != 3) throw ValidationError("--ratios needs three values");
    SplitRatios ratios{std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])};
    Manifest m = load_manifest(split_manifest_path);
    SplitResult result = split_manifest(m, ratios, split_seed);
    fs::create_directories(split_out_dir);
    save_manifest(result.train, (fs::path(split_out_dir) / "train.jsonl").string());
    save_manifest(result.dev, (fs::path(split_out_dir) / "dev.jsonl").string());
    save_manifest(result.test, (fs::path(split_out_dir) / "test.jsonl").string());
    std::cout << "split " << m.size() << " -> " << result.train.size() << "/"
              << result.dev.size() << "/" << result.test.size() << "\n";
  });

  // annotate
  auto* annotate_cmd = app.add_subcommand(
      "annotate", "compute si_snr/stoi/f0_corr labels for (audio, ref_audio) pairs");
  std::string ann_manifest, ann_out;
  int ann_threads = 0;
  annotate_cmd->add_option("--manifest", ann_manifest, "input manifest")->required();
  annotate_cmd->add_option("--out", ann_out, "output manifest")->required();
  annotate_cmd->add_option("--threads", ann_threads, "worker threads");
  annotate_cmd->callback([&] {
    Manifest m = load_manifest(ann_manifest);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<size_t> pair_index;
    for (size_t i = 0; i < m.records.size(); ++i) {
      if (m.records[i].ref_audio) {
        pairs.emplace_back(m.records[i].audio, *m.records[i].ref_audio);
        pair_index.push_back(i);
      } else {
        std::cerr << "annotate: " << m.records[i].id
                  << ": no ref_audio, labels absent\n";
      }
    }
    const auto results = annotate(pairs, ann_threads);
    for (size_t p = 0; p < results.size(); ++p) {
      auto& rec = m.records[pair_index[p]];
      for (const auto& [id, value] : results[p].labels) rec.metrics[id] = value;
      for (const auto& issue : results[p].issues) {
        std::cerr << "annotate: " << rec.id << ": " << issue << "\n";
      }
    }
    save_manifest(m, ann_out);
    std::cout << "annotated " << pairs.size() << " of " << m.size() << " records\n";
  });

  // train-bpe
  auto* train_bpe = app.add_subcommand("train-bpe", "train the BPE tokenizer");
  std::string bpe_manifest, bpe_out;
  int bpe_vocab = 500;
  train_bpe->add_option("--manifest", bpe_manifest, "manifest with text fields")->required();
  train_bpe->add_option("--out", bpe_out, "output model file")->required();
  train_bpe->add_option("--vocab-size", bpe_vocab, "target vocabulary size");
  train_bpe->callback([&] {
    Manifest m = load_manifest(bpe_manifest);
    BpeModel model = BpeModel::train(corpus_from_manifest(m), bpe_vocab);
    model.save(bpe_out);
    std::cout << "trained bpe model: vocab " << model.vocab_size() << " ("
              << model.merges().size() << " merges)\n";
  });

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string train_path, dev_path, train_out, config_path, bpe_path;
  std::string metrics_csv;
  bool no_ref_audio = false, no_ref_text = false;
  int64_t max_steps = -1;
  int64_t seed = -1;
  int epochs = -1, threads = -1;
  train->add_option("--train", train_path, "training manifest")->required();
  train->add_option("--dev", dev_path, "dev manifest");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--config", config_path, "key-value config file");
  train->add_option("--bpe", bpe_path, "pre-trained BPE model");
  train->add_option("--metrics", metrics_csv, "comma-separated metric subset");
  train->add_flag("--no-ref-audio", no_ref_audio, "drop the reference-audio encoder");
  train->add_flag("--no-ref-text", no_ref_text, "drop the reference-text encoder");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--max-steps", max_steps, "stop after N optimizer steps");
  train->add_option("--epochs", epochs, "override epochs");
  train->add_option("--threads", threads, "worker threads");
  train->callback([&] {
    ConfigFile cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (no_ref_audio) cfg.model.use_ref_audio = false;
    if (no_ref_text) cfg.model.use_ref_text = false;
    if (!metrics_csv.empty()) cfg.model.metric_ids = split_csv(metrics_csv);
    if (seed >= 0) cfg.train.seed = static_cast<uint64_t>(seed);
    if (max_steps >= 0) cfg.train.max_steps = max_steps;
    if (epochs > 0) cfg.train.epochs = epochs;
    if (threads > 0) cfg.train.threads = threads;

    Manifest train_m = load_manifest(train_path);
    Manifest dev_m;
    if (!dev_path.empty()) dev_m = load_manifest(dev_path);
    std::optional<BpeModel> bpe;
    if (!bpe_path.empty()) bpe = BpeModel::load(bpe_path);

    fs::create_directories(train_out);
    std::ofstream log((fs::path(train_out) / "train.log").string());
    TrainResult result = train_model(train_m, dev_m, cfg.model, cfg.train,
                                     std::move(bpe), train_out, log);
    std::cout << "trained " << result.steps_run << " steps; checkpoints: "
              << result.best_path << ", " << result.final_path << "\n";
  });

  // predict
  auto* predict = app.add_subcommand("predict", "run inference over a manifest");
  std::string pr_ckpt, pr_manifest, pr_out;
  int pr_threads = 0;
  predict->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
  predict->add_option("--manifest", pr_manifest, "input manifest")->required();
  predict->add_option("--out", pr_out, "output predictions manifest")->required();
  predict->add_option("--threads", pr_threads, "worker threads");
  predict->callback([&] {
    const Checkpoint ckpt = Checkpoint::load(pr_ckpt);
    Manifest input = load_manifest(pr_manifest);
    Manifest out = predict_manifest(ckpt, input, pr_threads);
    save_manifest(out, pr_out);
    std::cout << "predicted " << out.size() << " records -> " << pr_out << "\n";
  });

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "per-metric LCC/SRCC report");
  std::string ev_pred, ev_truth, ev_out;
  evaluate_cmd->add_option("--pred", ev_pred, "predictions manifest")->required();
  evaluate_cmd->add_option("--truth", ev_truth, "ground-truth manifest")->required();
  evaluate_cmd->add_option("--out", ev_out, "machine-readable rows file");
  evaluate_cmd->callback([&] {
    const EvaluationReport report =
        evaluate(load_manifest(ev_pred), load_manifest(ev_truth));
    std::cout << report.to_table();
    if (!ev_out.empty()) {
      std::ofstream out(ev_out, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write report: " + ev_out);
      out << report.to_rows();
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a validation error
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const universa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
