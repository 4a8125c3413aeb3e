#include "ranklab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "ranklab/losses.hpp"
#include "ranklab/metrics.hpp"
#include "ranklab/optim.hpp"
#include "ranklab/rng.hpp"
#include "ranklab/util.hpp"

namespace ranklab {

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::cross_entropy: return "ce";
    case LossKind::lsep: return "lsep";
    case LossKind::rlsep: return "rlsep";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "ce") return LossKind::cross_entropy;
  if (name == "lsep") return LossKind::lsep;
  if (name == "rlsep") return LossKind::rlsep;
  throw std::invalid_argument("unknown loss kind: " + name);
}

bool loss_binarizes(LossKind kind) { return kind != LossKind::rlsep; }

const char* arch_kind_name(ArchKind kind) {
  return kind == ArchKind::conv ? "conv" : "dense";
}

ArchKind arch_kind_from_name(const std::string& name) {
  if (name == "dense") return ArchKind::dense;
  if (name == "conv") return ArchKind::conv;
  throw std::invalid_argument("unknown architecture kind: " + name);
}

Architecture TrainConfig::scoring_architecture(int label_count) const {
  return arch == ArchKind::conv ? Architecture::conv_scoring(input_size, input_size, label_count)
                                : Architecture::scoring(input_size, input_size, label_count);
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (max_epochs < 0) throw std::invalid_argument("train config: max_epochs must be >= 0");
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (pair_budget < 1) throw std::invalid_argument("train config: pair_budget must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("train config: learning_rate must be > 0");
  if (momentum < 0.0 || weight_decay < 0.0)
    throw std::invalid_argument("train config: momentum/weight_decay must be >= 0");
  if (input_size < 4) throw std::invalid_argument("train config: input_size too small");
}

std::string TrainConfig::canonical_string() const {
  std::ostringstream out;
  out << "loss=" << loss_kind_name(loss) << " arch=" << arch_kind_name(arch)
      << " batch=" << batch_size << " max_epochs=" << max_epochs
      << " patience=" << patience << " pair_budget=" << pair_budget
      << " lr=" << format_full(learning_rate) << " momentum=" << format_full(momentum)
      << " weight_decay=" << format_full(weight_decay) << " input=" << input_size
      << " seed=" << seed;
  return out.str();
}

std::string history_csv(const TrainHistory& history, const TrainConfig& cfg,
                        const std::string& dataset_digest) {
  std::ostringstream out;
  out << "# " << cfg.canonical_string() << " binarized=" << (loss_binarizes(cfg.loss) ? 1 : 0)
      << " dataset=" << dataset_digest << " best_epoch=" << history.best_epoch
      << " skipped=" << history.skipped_instances << '\n';
  out << "epoch,train_loss,val_loss,val_ranked_accuracy,best\n";
  for (size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& s = history.epochs[e];
    out << (e + 1) << ',' << format_full(s.train_loss) << ',' << format_full(s.val_loss) << ','
        << format_full(s.val_ranked_accuracy) << ','
        << (static_cast<int>(e + 1) == history.best_epoch ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

// rng stream tags within a training run
constexpr uint64_t kStreamShuffle = 1;
constexpr uint64_t kStreamPairs = 2;
constexpr uint64_t kStreamValPairs = 3;

struct PreparedSplit {
  std::vector<double> inputs;        // n rows of input_dim
  std::vector<RankVector> ranks;     // training targets (binarized for CE/LSEP)
  std::vector<RankVector> raw_ranks; // original dataset ranks (for accuracy)
  std::vector<PositiveSet> positives;
  int count = 0;
  int input_dim = 0;
};

PreparedSplit prepare_split(const std::vector<Instance>& instances, const TrainConfig& cfg) {
  PreparedSplit out;
  out.count = static_cast<int>(instances.size());
  out.input_dim = cfg.input_size * cfg.input_size;
  out.inputs.resize(static_cast<size_t>(out.count) * out.input_dim);
  out.ranks.reserve(instances.size());
  out.raw_ranks.reserve(instances.size());
  out.positives.reserve(instances.size());
  const bool binarized = loss_binarizes(cfg.loss);
  for (int n = 0; n < out.count; ++n) {
    std::vector<double> row = ingest_image(instances[n].image, cfg.input_size, cfg.input_size);
    std::memcpy(out.inputs.data() + static_cast<size_t>(n) * out.input_dim, row.data(),
                row.size() * sizeof(double));
    out.raw_ranks.push_back(instances[n].ranks);
    out.ranks.push_back(binarized ? binary_ranks(instances[n].ranks) : instances[n].ranks);
    out.positives.push_back(binarize(instances[n].ranks));
  }
  return out;
}

LossResult instance_loss(const TrainConfig& cfg, const PreparedSplit& split, int index,
                         const double* scores, int label_count, Rng& pair_rng) {
  ScoreVector s(scores, scores + label_count);
  if (cfg.loss == LossKind::cross_entropy)
    return cross_entropy_loss(s, split.positives[index]);
  PairBatch batch = sample_rank_pairs(split.ranks[index], cfg.pair_budget, pair_rng);
  return lse_pairwise_loss(s, batch);
}

}  // namespace

ScoringTrainResult train_scoring(const RankedDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty() || data.val.empty())
    throw std::invalid_argument("train_scoring: train and val splits must be non-empty");
  const int label_count = data.space.size;

  PreparedSplit train = prepare_split(data.train, cfg);
  PreparedSplit val = prepare_split(data.val, cfg);

  // CE cannot score an all-negative instance (the uniform target is
  // undefined); those are dropped with a warning.
  std::vector<int> train_order;
  int skipped = 0;
  for (int n = 0; n < train.count; ++n) {
    if (cfg.loss == LossKind::cross_entropy && train.positives[n].empty()) {
      ++skipped;
      continue;
    }
    train_order.push_back(n);
  }
  if (skipped > 0)
    std::cerr << "warning: skipping " << skipped
              << " all-negative training instance(s) for cross entropy\n";
  if (train_order.empty()) throw std::invalid_argument("train_scoring: no usable training instances");

  std::vector<int> val_usable;
  for (int n = 0; n < val.count; ++n) {
    if (cfg.loss == LossKind::cross_entropy && val.positives[n].empty()) continue;
    val_usable.push_back(n);
  }
  if (val_usable.empty()) throw std::invalid_argument("train_scoring: no usable validation instances");

  Mlp net = Mlp::init(cfg.scoring_architecture(label_count), NetworkKind::scoring, cfg.seed);
  OptimizerState opt =
      OptimizerState::make(net.params().size(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);
  Rng shuffle_rng = Rng::derive(cfg.seed, {kStreamShuffle});
  Rng pair_rng = Rng::derive(cfg.seed, {kStreamPairs});

  TrainHistory history;
  history.skipped_instances = skipped;
  std::vector<double> best_params = net.params();
  double best_val = HUGE_VAL;
  int epochs_since_best = 0;

  std::vector<double> batch_inputs;
  std::vector<double> dscores;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Fisher-Yates reshuffle of the training order each epoch.
    for (int i = static_cast<int>(train_order.size()) - 1; i > 0; --i) {
      int j = shuffle_rng.uniform_int(0, i);
      std::swap(train_order[i], train_order[j]);
    }

    KahanSum epoch_loss;
    for (size_t start = 0; start < train_order.size(); start += cfg.batch_size) {
      const int b = static_cast<int>(std::min<size_t>(cfg.batch_size, train_order.size() - start));
      batch_inputs.resize(static_cast<size_t>(b) * train.input_dim);
      for (int n = 0; n < b; ++n)
        std::memcpy(batch_inputs.data() + static_cast<size_t>(n) * train.input_dim,
                    train.inputs.data() +
                        static_cast<size_t>(train_order[start + n]) * train.input_dim,
                    static_cast<size_t>(train.input_dim) * sizeof(double));
      net.forward(batch_inputs, b);
      const std::vector<double>& scores = net.outputs();
      dscores.assign(static_cast<size_t>(b) * label_count, 0.0);
      for (int n = 0; n < b; ++n) {
        LossResult r = instance_loss(cfg, train, train_order[start + n],
                                     scores.data() + static_cast<size_t>(n) * label_count,
                                     label_count, pair_rng);
        epoch_loss.add(r.value);
        // Batch loss is the mean of per-instance losses.
        for (int j = 0; j < label_count; ++j)
          dscores[static_cast<size_t>(n) * label_count + j] = r.grad[j] / b;
      }
      std::vector<double> grads = net.backward(dscores);
      sgd_step(net.params(), grads, opt);
    }

    // Validation pass: loss on the training targets, ranked accuracy on the
    // original ranks.
    std::vector<double> val_scores;
    net.infer_batch(val.inputs, val.count, nullptr, &val_scores);
    Rng val_rng = Rng::derive(cfg.seed, {kStreamValPairs, static_cast<uint64_t>(epoch)});
    KahanSum val_loss;
    for (int idx : val_usable) {
      LossResult r = instance_loss(cfg, val, idx,
                                   val_scores.data() + static_cast<size_t>(idx) * label_count,
                                   label_count, val_rng);
      val_loss.add(r.value);
    }
    KahanSum val_acc;
    int val_acc_n = 0;
    for (int n = 0; n < val.count; ++n) {
      if (!has_eligible_pairs(val.raw_ranks[n])) continue;
      ScoreVector s(val_scores.begin() + static_cast<size_t>(n) * label_count,
                    val_scores.begin() + static_cast<size_t>(n + 1) * label_count);
      val_acc.add(ranked_instance_metrics(val.raw_ranks[n], s).accuracy);
      ++val_acc_n;
    }

    EpochStats stats;
    stats.train_loss = epoch_loss.value() / static_cast<double>(train_order.size());
    stats.val_loss = val_loss.value() / static_cast<double>(val_usable.size());
    stats.val_ranked_accuracy = val_acc_n > 0 ? val_acc.value() / val_acc_n : 0.0;
    history.epochs.push_back(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best_params = net.params();
      history.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }

  net.params() = best_params;
  return ScoringTrainResult{std::move(net), std::move(history)};
}

namespace {

// Numerically safe binary cross entropy on the logit z = score - threshold.
double stable_bce(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

struct FrozenFeatures {
  std::vector<double> features;  // n x q
  std::vector<double> scores;    // n x K
};

FrozenFeatures freeze(const Mlp& scoring, const PreparedSplit& split) {
  FrozenFeatures out;
  const int q = scoring.arch().feature_dim();
  const int k = scoring.arch().output_dim();
  out.features.resize(static_cast<size_t>(split.count) * q);
  out.scores.resize(static_cast<size_t>(split.count) * k);
  // Chunked so the activation buffers stay small.
  const int chunk = 256;
  std::vector<double> buf;
  for (int start = 0; start < split.count; start += chunk) {
    int b = std::min(chunk, split.count - start);
    buf.assign(split.inputs.begin() + static_cast<size_t>(start) * split.input_dim,
               split.inputs.begin() + static_cast<size_t>(start + b) * split.input_dim);
    std::vector<double> feats, scores;
    scoring.infer_batch(buf, b, &feats, &scores);
    std::memcpy(out.features.data() + static_cast<size_t>(start) * q, feats.data(),
                feats.size() * sizeof(double));
    std::memcpy(out.scores.data() + static_cast<size_t>(start) * k, scores.data(),
                scores.size() * sizeof(double));
  }
  return out;
}

}  // namespace

ThresholdTrainResult train_threshold(const Mlp& scoring, const RankedDataset& data,
                                     const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty() || data.val.empty())
    throw std::invalid_argument("train_threshold: train and val splits must be non-empty");
  const int label_count = data.space.size;
  if (scoring.arch().output_dim() != label_count)
    throw std::invalid_argument("train_threshold: scoring network K does not match dataset");
  const int q = scoring.arch().feature_dim();

  PreparedSplit train = prepare_split(data.train, cfg);
  PreparedSplit val = prepare_split(data.val, cfg);
  FrozenFeatures train_f = freeze(scoring, train);
  FrozenFeatures val_f = freeze(scoring, val);

  Mlp net = Mlp::init(Architecture::threshold(q, label_count), NetworkKind::threshold, cfg.seed);
  TrainHistory history;
  if (cfg.max_epochs == 0) return ThresholdTrainResult{std::move(net), std::move(history)};

  OptimizerState opt =
      OptimizerState::make(net.params().size(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);
  Rng shuffle_rng = Rng::derive(cfg.seed, {kStreamShuffle, 0x7468ull});

  std::vector<int> order(train.count);
  for (int i = 0; i < train.count; ++i) order[i] = i;

  std::vector<double> best_params = net.params();
  double best_val = HUGE_VAL;
  int epochs_since_best = 0;

  std::vector<double> batch_features, dthresholds;

  auto instance_bce = [&](const PreparedSplit& split, const FrozenFeatures& frozen, int index,
                          const double* thresholds, double* dthr) {
    double loss = 0.0;
    const double* f = frozen.scores.data() + static_cast<size_t>(index) * label_count;
    for (int j = 0; j < label_count; ++j) {
      double y = split.positives[index].contains(j) ? 1.0 : 0.0;
      double z = f[j] - thresholds[j];
      loss += stable_bce(z, y);
      if (dthr) dthr[j] = y - sigmoid(z);  // d(loss)/d(threshold_j)
    }
    return loss;
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (int i = train.count - 1; i > 0; --i) {
      int j = shuffle_rng.uniform_int(0, i);
      std::swap(order[i], order[j]);
    }
    KahanSum epoch_loss;
    for (int start = 0; start < train.count; start += cfg.batch_size) {
      const int b = std::min(cfg.batch_size, train.count - start);
      batch_features.resize(static_cast<size_t>(b) * q);
      for (int n = 0; n < b; ++n)
        std::memcpy(batch_features.data() + static_cast<size_t>(n) * q,
                    train_f.features.data() + static_cast<size_t>(order[start + n]) * q,
                    static_cast<size_t>(q) * sizeof(double));
      net.forward(batch_features, b);
      const std::vector<double>& thresholds = net.outputs();
      dthresholds.assign(static_cast<size_t>(b) * label_count, 0.0);
      std::vector<double> row(label_count);
      for (int n = 0; n < b; ++n) {
        double loss = instance_bce(train, train_f, order[start + n],
                                   thresholds.data() + static_cast<size_t>(n) * label_count,
                                   row.data());
        epoch_loss.add(loss);
        for (int j = 0; j < label_count; ++j)
          dthresholds[static_cast<size_t>(n) * label_count + j] = row[j] / b;
      }
      std::vector<double> grads = net.backward(dthresholds);
      sgd_step(net.params(), grads, opt);
    }

    std::vector<double> val_thresholds;
    net.infer_batch(val_f.features, val.count, nullptr, &val_thresholds);
    KahanSum val_loss;
    for (int n = 0; n < val.count; ++n)
      val_loss.add(instance_bce(val, val_f, n,
                                val_thresholds.data() + static_cast<size_t>(n) * label_count,
                                nullptr));

    EpochStats stats;
    stats.train_loss = epoch_loss.value() / train.count;
    stats.val_loss = val_loss.value() / val.count;
    stats.val_ranked_accuracy = 0.0;  // not meaningful for the threshold head
    history.epochs.push_back(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best_params = net.params();
      history.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }

  net.params() = best_params;
  return ThresholdTrainResult{std::move(net), std::move(history)};
}

std::vector<Prediction> predict(const Mlp& scoring, const Mlp& threshold, const Image8& image) {
  if (threshold.arch().input_dim() != scoring.arch().feature_dim())
    throw std::invalid_argument("predict: threshold network does not match scoring features");
  std::vector<double> input =
      ingest_image(image, scoring.arch().input_h, scoring.arch().input_w);
  std::vector<double> features, scores, cuts;
  scoring.infer(input, &features, &scores);
  threshold.infer(features, nullptr, &cuts);
  std::vector<Prediction> out;
  for (size_t j = 0; j < scores.size(); ++j)
    if (scores[j] > cuts[j]) out.push_back({static_cast<int>(j), scores[j]});
  std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.label < b.label;
  });
  return out;
}

}  // namespace ranklab
