// Command-line harness: dataset generation, training, evaluation, the
// calibration study, the digit-count sweep, and repeated-run significance.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ranklab/datagen.hpp"
#include "ranklab/experiments.hpp"
#include "ranklab/synth_digits.hpp"
#include "ranklab/util.hpp"

namespace fs = std::filesystem;
using namespace ranklab;

namespace {

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  for (const std::string& item : split(csv, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<LossKind> parse_methods(const std::string& csv) {
  std::vector<LossKind> out;
  for (const std::string& name : parse_list(csv)) out.push_back(loss_kind_from_name(name));
  if (out.empty()) throw std::invalid_argument("empty method list");
  return out;
}

uint64_t pool_seed(uint64_t seed, uint64_t which) {
  return splitmix64(seed ^ (0x706f6f6cull + which));
}

struct PoolOpts {
  std::string mnist_dir;
  int pool_count = 256;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--mnist", mnist_dir,
                    "directory holding the MNIST IDX files; when omitted a deterministic "
                    "synthetic digit pool is used instead");
    cmd->add_option("--pool-count", pool_count, "synthetic images per class")
        ->check(CLI::PositiveNumber);
  }

  DigitPool train_pool(uint64_t seed) const {
    if (!mnist_dir.empty())
      return load_digit_pool((fs::path(mnist_dir) / "train-images-idx3-ubyte").string(),
                             (fs::path(mnist_dir) / "train-labels-idx1-ubyte").string(), "train");
    return make_synthetic_pool(pool_count, pool_seed(seed, 0), "synthetic-train");
  }
  DigitPool eval_pool(uint64_t seed) const {
    if (!mnist_dir.empty())
      return load_digit_pool((fs::path(mnist_dir) / "t10k-images-idx3-ubyte").string(),
                             (fs::path(mnist_dir) / "t10k-labels-idx1-ubyte").string(), "t10k");
    return make_synthetic_pool(pool_count, pool_seed(seed, 1), "synthetic-eval");
  }
};

struct TrainOpts {
  TrainConfig cfg;
  std::string loss_name = "rlsep";
  std::string arch_name = "conv";

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--loss", loss_name, "loss kind")
        ->check(CLI::IsMember({"ce", "lsep", "rlsep"}));
    cmd->add_option("--arch", arch_name, "scoring backbone")
        ->check(CLI::IsMember({"dense", "conv"}));
    cmd->add_option("--epochs", cfg.max_epochs, "epoch budget");
    cmd->add_option("--patience", cfg.patience, "early-stopping patience");
    cmd->add_option("--batch", cfg.batch_size, "minibatch size");
    cmd->add_option("--pair-budget", cfg.pair_budget, "sampled pairs per instance");
    cmd->add_option("--lr", cfg.learning_rate, "learning rate");
    cmd->add_option("--momentum", cfg.momentum, "SGD momentum");
    cmd->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
    cmd->add_option("--input", cfg.input_size, "model input side in pixels");
  }

  TrainConfig config(uint64_t seed) const {
    TrainConfig out = cfg;
    out.loss = loss_kind_from_name(loss_name);
    out.arch = arch_kind_from_name(arch_name);
    out.seed = seed;
    out.validate();
    return out;
  }
};

std::string manifest_digest(const std::string& dataset_dir) {
  std::string bytes = read_file_text((fs::path(dataset_dir) / "manifest.tsv").string());
  return hex64(fnv1a64(bytes));
}

void write_or_print(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(out_dir);
  write_file_text((fs::path(out_dir) / name).string(), text);
}

// ---- generate ----

struct GenerateOpts {
  std::string out;
  std::string preset = "desk";
  uint64_t seed = 0;
  bool calibration = false;
  bool force = false;
  PoolOpts pools;
  int canvas = 0;
  int digits_min = 0, digits_max = 0;
  double scale_low = 0, scale_high = 0;
  int train_count = -1, val_count = -1, test_count = -1;
  int count = -1;
  std::string scales_csv;
  CLI::App* cmd = nullptr;
};

int cmd_generate(const GenerateOpts& o) {
  if (fs::exists(o.out) && !fs::is_empty(o.out) && !o.force)
    throw std::runtime_error("output directory exists: " + o.out + " (use --force to overwrite)");

  const auto has = [&](const char* flag) { return o.cmd->count(flag) > 0; };

  RankedDataset data{LabelSpace(10), {}, {}, {}, {}};
  std::string config_str;
  if (o.calibration) {
    CalibConfig cfg = (o.preset == "paper") ? CalibConfig::paper() : CalibConfig::desk();
    cfg.seed = o.seed;
    if (has("--canvas")) cfg.canvas_size = o.canvas;
    if (has("--count")) cfg.count = o.count;
    if (has("--scales")) {
      cfg.scales.clear();
      for (const std::string& s : parse_list(o.scales_csv)) cfg.scales.push_back(std::stod(s));
    }
    cfg.validate();
    config_str = cfg.canonical_string();
    data = generate_calibration_set(o.pools.eval_pool(o.seed), cfg);
  } else {
    GenConfig cfg = (o.preset == "paper") ? GenConfig::paper() : GenConfig::desk();
    cfg.seed = o.seed;
    if (has("--canvas")) cfg.canvas_size = o.canvas;
    if (has("--digits-min")) cfg.digits_min = o.digits_min;
    if (has("--digits-max")) cfg.digits_max = o.digits_max;
    if (has("--scale-low")) cfg.scale_low = o.scale_low;
    if (has("--scale-high")) cfg.scale_high = o.scale_high;
    if (has("--train-count")) cfg.train_count = o.train_count;
    if (has("--val-count")) cfg.val_count = o.val_count;
    if (has("--test-count")) cfg.test_count = o.test_count;
    cfg.validate();
    config_str = cfg.canonical_string();
    data = generate_ranked_mnist(cfg, o.pools.train_pool(o.seed), o.pools.eval_pool(o.seed));
  }

  save_dataset(data, o.out);
  std::cout << "config\t" << config_str << '\n'
            << "config_digest\t" << data.provenance.config_digest << '\n'
            << "train\t" << data.train.size() << '\n'
            << "val\t" << data.val.size() << '\n'
            << "test\t" << data.test.size() << '\n'
            << "manifest_fnv\t" << manifest_digest(o.out) << '\n';
  return 0;
}

// ---- train ----

struct TrainCmdOpts {
  std::string dataset;
  std::string out;
  uint64_t seed = 0;
  TrainOpts train;
};

int cmd_train(const TrainCmdOpts& o) {
  RankedDataset data = load_dataset(o.dataset);
  TrainConfig cfg = o.train.config(o.seed);
  std::string digest = manifest_digest(o.dataset);

  TrainedModel model = train_model(data, cfg);

  fs::create_directories(o.out);
  save_checkpoint(model.scoring, (fs::path(o.out) / "scoring.ckpt").string());
  save_checkpoint(model.threshold, (fs::path(o.out) / "threshold.ckpt").string());
  write_file_text((fs::path(o.out) / "history.csv").string(),
                  history_csv(model.scoring_history, cfg, digest));
  write_file_text((fs::path(o.out) / "threshold_history.csv").string(),
                  history_csv(model.threshold_history, cfg, digest));

  std::cout << "config\t" << cfg.canonical_string() << '\n'
            << "dataset_fnv\t" << digest << '\n'
            << "epochs_run\t" << model.scoring_history.epochs.size() << '\n'
            << "best_epoch\t" << model.scoring_history.best_epoch << '\n'
            << "skipped_instances\t" << model.scoring_history.skipped_instances << '\n';
  if (!model.scoring_history.epochs.empty()) {
    const EpochStats& best =
        model.scoring_history.epochs[model.scoring_history.best_epoch - 1];
    std::cout << "best_val_loss\t" << format_full(best.val_loss) << '\n'
              << "best_val_ranked_accuracy\t" << format_full(best.val_ranked_accuracy) << '\n';
  }
  return 0;
}

// ---- eval ----

struct EvalOpts {
  std::string dataset;
  std::string split = "test";
  std::string scoring_path;
  std::string threshold_path;
  std::string method = "model";
  std::string out;
  bool oracle = false;
};

int cmd_eval(const EvalOpts& o) {
  RankedDataset data = load_dataset(o.dataset);
  const std::vector<Instance>& instances = data.split(split_from_name(o.split));
  if (instances.empty()) throw std::runtime_error("split '" + o.split + "' is empty");

  MetricReport report;
  if (o.oracle) {
    report = evaluate_oracle(instances);
  } else {
    if (o.scoring_path.empty() || o.threshold_path.empty())
      throw std::runtime_error("eval needs --scoring and --threshold (or --oracle)");
    Mlp scoring = load_checkpoint(o.scoring_path);
    Mlp threshold = load_checkpoint(o.threshold_path);
    report = evaluate_model(scoring, threshold, instances);
  }

  std::cout << report.to_kv();
  std::string csv = MetricReport::csv_header() + report.to_csv_rows(o.method);
  if (!o.out.empty()) {
    write_or_print(o.out, "eval.csv", csv);
    write_or_print(o.out, "eval.kv", report.to_kv());
  } else {
    std::cout << csv;
  }
  return 0;
}

// ---- calibrate ----

struct CalibrateOpts {
  std::string dataset;
  std::string scoring_path;
  std::string out;
};

int cmd_calibrate(const CalibrateOpts& o) {
  RankedDataset data = load_dataset(o.dataset);
  Mlp scoring = load_checkpoint(o.scoring_path);
  const std::vector<Instance>& instances = data.test.empty() ? data.train : data.test;
  CalibrationTable table = calibrate_model(scoring, instances);

  bool increasing = true;
  for (size_t i = 1; i < table.per_scale.size(); ++i)
    increasing = increasing && table.per_scale[i].mean > table.per_scale[i - 1].mean;
  bool above = !table.per_scale.empty() && table.per_scale.front().mean > table.negatives.mean;

  std::cout << table.fit_text();
  std::cout << "strictly_increasing\t" << (increasing ? 1 : 0) << '\n'
            << "above_negatives\t" << (above ? 1 : 0) << '\n';
  if (!o.out.empty()) {
    write_or_print(o.out, "calibration.csv", table.csv());
    write_or_print(o.out, "calibration_fits.txt", table.fit_text());
  }
  return 0;
}

// ---- significance ----

struct SignificanceOpts {
  std::string dataset;
  std::string methods = "rlsep,lsep";
  int runs = 5;
  uint64_t seed = 1;
  std::string out;
  TrainOpts train;
};

int cmd_significance(const SignificanceOpts& o) {
  RankedDataset data = load_dataset(o.dataset);
  TrainConfig base = o.train.config(o.seed);
  SignificanceReport report =
      run_significance(data, parse_methods(o.methods), o.runs, o.seed, base);
  std::cout << report.table_text();
  if (!o.out.empty()) {
    write_or_print(o.out, "significance.csv", report.csv());
    write_or_print(o.out, "significance.txt", report.table_text());
  }
  return 0;
}

// ---- sweep ----

struct SweepOpts {
  std::string root;
  std::string digits = "3,4,5";
  std::string mode = "full";
  std::string methods = "rlsep,lsep";
  uint64_t seed = 0;
  std::string out;
  PoolOpts pools;
  TrainOpts train;
  int canvas = 112;
  double scale_low = 1.0, scale_high = 3.0;
  int train_count = 2000, val_count = 300, test_count = 300;
};

int cmd_sweep(const SweepOpts& o) {
  std::vector<int> ds;
  for (const std::string& d : parse_list(o.digits)) ds.push_back(std::stoi(d));
  if (ds.empty()) throw std::invalid_argument("empty digit list");

  std::vector<RankedDataset> owned;
  owned.reserve(ds.size());
  for (int d : ds) {
    fs::path dir = fs::path(o.root) / ("d" + std::to_string(d));
    if (fs::exists(dir / "manifest.tsv")) {
      owned.push_back(load_dataset(dir.string()));
      continue;
    }
    GenConfig cfg;
    cfg.canvas_size = o.canvas;
    cfg.digits_min = cfg.digits_max = d;
    cfg.scale_low = o.scale_low;
    cfg.scale_high = o.scale_high;
    cfg.train_count = o.train_count;
    cfg.val_count = o.val_count;
    cfg.test_count = o.test_count;
    cfg.seed = o.seed + static_cast<uint64_t>(d);
    cfg.validate();
    RankedDataset data =
        generate_ranked_mnist(cfg, o.pools.train_pool(cfg.seed), o.pools.eval_pool(cfg.seed));
    save_dataset(data, dir.string());
    owned.push_back(std::move(data));
  }

  std::vector<std::pair<int, const RankedDataset*>> datasets;
  for (size_t i = 0; i < ds.size(); ++i) datasets.emplace_back(ds[i], &owned[i]);

  TrainConfig base = o.train.config(o.seed);
  SweepMode mode = (o.mode == "partial") ? SweepMode::partial : SweepMode::full;
  SweepReport report = run_sweep(datasets, mode, parse_methods(o.methods), base);
  std::cout << report.csv();
  if (!o.out.empty()) write_or_print(o.out, "sweep.csv", report.csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranklab: ranked multi-label learning experiments"};
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App* generate = app.add_subcommand("generate", "generate a ranked digit dataset");
  gen.cmd = generate;
  generate->add_option("--out", gen.out, "output dataset directory")->required();
  generate->add_option("--preset", gen.preset, "config preset")
      ->check(CLI::IsMember({"paper", "desk"}));
  generate->add_option("--seed", gen.seed, "master seed");
  generate->add_flag("--calibration", gen.calibration, "build the fixed-scale calibration set");
  generate->add_flag("--force", gen.force, "overwrite an existing output directory");
  gen.pools.add_flags(generate);
  generate->add_option("--canvas", gen.canvas, "canvas side in pixels");
  generate->add_option("--digits-min", gen.digits_min, "min digits per image");
  generate->add_option("--digits-max", gen.digits_max, "max digits per image");
  generate->add_option("--scale-low", gen.scale_low, "scale range low end");
  generate->add_option("--scale-high", gen.scale_high, "scale range high end");
  generate->add_option("--train-count", gen.train_count, "training instances");
  generate->add_option("--val-count", gen.val_count, "validation instances");
  generate->add_option("--test-count", gen.test_count, "test instances");
  generate->add_option("--count", gen.count, "calibration instances");
  generate->add_option("--scales", gen.scales_csv, "calibration scales, comma separated");

  TrainCmdOpts tr;
  CLI::App* train = app.add_subcommand("train", "train scoring and threshold networks");
  train->add_option("--dataset", tr.dataset, "dataset directory")->required();
  train->add_option("--out", tr.out, "output directory for checkpoints and history")->required();
  train->add_option("--seed", tr.seed, "training seed");
  tr.train.add_flags(train);

  EvalOpts ev;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model");
  eval->add_option("--dataset", ev.dataset, "dataset directory")->required();
  eval->add_option("--split", ev.split, "split to evaluate")
      ->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--scoring", ev.scoring_path, "scoring checkpoint");
  eval->add_option("--threshold", ev.threshold_path, "threshold checkpoint");
  eval->add_option("--method", ev.method, "method label for the CSV rows");
  eval->add_option("--out", ev.out, "directory for eval.csv / eval.kv");
  eval->add_flag("--oracle", ev.oracle, "score with the ground-truth oracle instead");

  CalibrateOpts cal;
  CLI::App* calibrate = app.add_subcommand("calibrate", "per-scale score study");
  calibrate->add_option("--dataset", cal.dataset, "calibration dataset directory")->required();
  calibrate->add_option("--scoring", cal.scoring_path, "scoring checkpoint")->required();
  calibrate->add_option("--out", cal.out, "directory for calibration.csv");

  SignificanceOpts sig;
  CLI::App* significance =
      app.add_subcommand("significance", "repeated-run method comparison");
  significance->add_option("--dataset", sig.dataset, "dataset directory")->required();
  significance->add_option("--methods", sig.methods, "comma-separated losses");
  significance->add_option("--runs", sig.runs, "runs per method")->check(CLI::Range(2, 1000));
  significance->add_option("--seed", sig.seed, "base seed (run r uses seed+r)");
  significance->add_option("--out", sig.out, "directory for significance.csv");
  sig.train.add_flags(significance);

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand("sweep", "accuracy vs digit count");
  sweep->add_option("--dataset-root", sw.root, "directory holding/receiving d<N> datasets")
      ->required();
  sweep->add_option("--digits", sw.digits, "comma-separated digit counts");
  sweep->add_option("--mode", sw.mode, "full retrains per d; partial trains on d=3 only")
      ->check(CLI::IsMember({"full", "partial"}));
  sweep->add_option("--methods", sw.methods, "comma-separated losses");
  sweep->add_option("--seed", sw.seed, "master seed");
  sweep->add_option("--out", sw.out, "directory for sweep.csv");
  sw.pools.add_flags(sweep);
  sweep->add_option("--canvas", sw.canvas, "canvas side for generated sets");
  sweep->add_option("--scale-low", sw.scale_low, "scale range low end");
  sweep->add_option("--scale-high", sw.scale_high, "scale range high end");
  sweep->add_option("--train-count", sw.train_count, "training instances per d");
  sweep->add_option("--val-count", sw.val_count, "validation instances per d");
  sweep->add_option("--test-count", sw.test_count, "test instances per d");
  sw.train.add_flags(sweep);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(generate)) return cmd_generate(gen);
    if (app.got_subcommand(train)) return cmd_train(tr);
    if (app.got_subcommand(eval)) return cmd_eval(ev);
    if (app.got_subcommand(calibrate)) return cmd_calibrate(cal);
    if (app.got_subcommand(significance)) return cmd_significance(sig);
    if (app.got_subcommand(sweep)) return cmd_sweep(sw);
    throw std::runtime_error("no subcommand selected");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
