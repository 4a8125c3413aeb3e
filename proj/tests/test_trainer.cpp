#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ranklab/metrics.hpp"
#include "ranklab/trainer.hpp"
#include "support/oracles.hpp"

using namespace ranklab;

namespace {

Image8 noise_image(int h, int w, std::mt19937_64& gen) {
  Image8 img(h, w);
  for (uint8_t& p : img.pixels) p = static_cast<uint8_t>(gen() % 256);
  return img;
}

// Small random dataset: K=3, 6x6 noise images, dense ranks with at least one
// eligible pair, val split == train split (memorization fixtures).
RankedDataset toy_dataset(int count, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Instance> instances;
  for (int i = 0; i < count; ++i) {
    std::vector<int> ranks;
    do {
      ranks = oracles::random_dense_ranks(3, gen);
    } while (!has_eligible_pairs(RankVector(ranks)));
    instances.emplace_back(i, noise_image(6, 6, gen), RankVector(ranks));
  }
  RankedDataset ds{LabelSpace(3), instances, instances, instances, {}};
  return ds;
}

TrainConfig toy_config(LossKind loss, uint64_t seed) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.arch = ArchKind::dense;
  cfg.batch_size = 8;
  cfg.max_epochs = 12;
  cfg.patience = 20;
  cfg.learning_rate = 0.01;
  cfg.input_size = 6;
  cfg.seed = seed;
  return cfg;
}

// Scoring network that reads label j's score straight from pixel j (as a
// [0,1] intensity); the input itself is the feature vector.
Mlp pixel_scoring_net(int label_count) {
  Architecture arch;
  arch.input_h = 4;
  arch.input_w = 4;
  arch.layers = {{16, label_count, false}};
  Mlp net(arch, NetworkKind::scoring);
  for (int o = 0; o < label_count; ++o) net.params()[static_cast<size_t>(o) * 16 + o] = 1.0;
  return net;
}

// Constant-threshold head over those 16 features.
Mlp constant_threshold_net(const std::vector<double>& cuts) {
  Architecture arch;
  arch.input_h = 1;
  arch.input_w = 16;
  arch.layers = {{16, static_cast<int>(cuts.size()), false}};
  Mlp net(arch, NetworkKind::threshold);
  size_t bias_base = 16 * cuts.size();
  for (size_t j = 0; j < cuts.size(); ++j) net.params()[bias_base + j] = cuts[j];
  return net;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("loss kind names round trip") {
  for (LossKind k : {LossKind::cross_entropy, LossKind::lsep, LossKind::rlsep})
    CHECK(loss_kind_from_name(loss_kind_name(k)) == k);
  CHECK_THROWS_AS(loss_kind_from_name("hinge"), std::invalid_argument);
  CHECK(loss_binarizes(LossKind::cross_entropy));
  CHECK(loss_binarizes(LossKind::lsep));
  CHECK_FALSE(loss_binarizes(LossKind::rlsep));
}

TEST_CASE("train config validation") {
  TrainConfig ok;
  ok.validate();

  auto broken = [](auto mutate) {
    TrainConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.batch_size = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.max_epochs = -1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.patience = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.pair_budget = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.learning_rate = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.momentum = -0.1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.weight_decay = -1.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.input_size = 3; }).validate(),
                  std::invalid_argument);
}

TEST_CASE("canonical config string pins every field") {
  TrainConfig cfg;
  cfg.seed = 42;
  CHECK(cfg.canonical_string() ==
        "loss=rlsep arch=conv batch=64 max_epochs=300 patience=20 pair_budget=1000 lr=0.001 "
        "momentum=0.90000"
        "000000000002 weight_decay=1.0000000000000001e-05 input=56 seed=42");
}

TEST_CASE("history csv layout") {
  TrainHistory h;
  h.epochs = {{0.5, 0.6, 0.7}, {0.25, 0.5, 0.75}};
  h.best_epoch = 2;
  TrainConfig cfg = toy_config(LossKind::lsep, 9);
  std::string csv = history_csv(h, cfg, "d1gest");
  CHECK(csv.find("# loss=lsep") == 0);
  CHECK(csv.find("binarized=1") != std::string::npos);
  CHECK(csv.find("dataset=d1gest") != std::string::npos);
  CHECK(csv.find("best_epoch=2") != std::string::npos);
  CHECK(csv.find("skipped=0") != std::string::npos);
  CHECK(csv.find("epoch,train_loss,val_loss,val_ranked_accuracy,best\n") != std::string::npos);
  CHECK(csv.find("1,0.5,0.59999999999999998,0.69999999999999996,0\n") != std::string::npos);
  CHECK(csv.find("2,0.25,0.5,0.75,1\n") != std::string::npos);

  cfg.loss = LossKind::rlsep;
  CHECK(history_csv(h, cfg, "d").find("binarized=0") != std::string::npos);
}

TEST_CASE("training is deterministic per seed") {
  RankedDataset data = toy_dataset(8, 101);
  TrainConfig cfg = toy_config(LossKind::rlsep, 5);

  ScoringTrainResult a = train_scoring(data, cfg);
  ScoringTrainResult b = train_scoring(data, cfg);
  CHECK(a.net.params() == b.net.params());
  CHECK(history_csv(a.history, cfg, "x") == history_csv(b.history, cfg, "x"));

  TrainConfig other = cfg;
  other.seed = 6;
  ScoringTrainResult c = train_scoring(data, other);
  CHECK(a.net.params() != c.net.params());
}

TEST_CASE("zero-epoch scoring run returns the initialized network") {
  RankedDataset data = toy_dataset(4, 102);
  TrainConfig cfg = toy_config(LossKind::rlsep, 7);
  cfg.max_epochs = 0;
  ScoringTrainResult r = train_scoring(data, cfg);
  CHECK(r.history.epochs.empty());
  CHECK(r.history.best_epoch == 0);
  Mlp fresh = Mlp::init(Architecture::scoring(6, 6, 3), NetworkKind::scoring, 7);
  CHECK(r.net.params() == fresh.params());
}

TEST_CASE("early stopping accounting") {
  RankedDataset data = toy_dataset(8, 103);
  for (int patience : {1, 3}) {
    TrainConfig cfg = toy_config(LossKind::rlsep, 11);
    cfg.max_epochs = 60;
    cfg.patience = patience;
    ScoringTrainResult r = train_scoring(data, cfg);
    int ran = static_cast<int>(r.history.epochs.size());
    REQUIRE(ran >= 1);
    REQUIRE(r.history.best_epoch >= 1);
    // either the budget ran out, or exactly `patience` non-improving epochs
    // follow the best one
    CHECK(((ran == cfg.max_epochs) || (ran - r.history.best_epoch == patience)));
    // best epoch is the strict argmin of validation loss
    double best = r.history.epochs[r.history.best_epoch - 1].val_loss;
    for (int e = 0; e < ran; ++e) {
      if (e + 1 < r.history.best_epoch) CHECK(r.history.epochs[e].val_loss > best);
      if (e + 1 > r.history.best_epoch) CHECK(r.history.epochs[e].val_loss >= best);
    }
  }
}

TEST_CASE("a small rlsep run memorizes its training set") {
  RankedDataset data = toy_dataset(10, 104);
  TrainConfig cfg = toy_config(LossKind::rlsep, 13);
  cfg.max_epochs = 600;
  cfg.patience = 600;
  cfg.batch_size = 10;
  cfg.learning_rate = 0.05;
  cfg.weight_decay = 0.0;
  ScoringTrainResult r = train_scoring(data, cfg);

  double accuracy_sum = 0.0;
  for (const Instance& inst : data.train) {
    std::vector<double> scores;
    r.net.infer(ingest_image(inst.image, 6, 6), nullptr, &scores);
    accuracy_sum += ranked_instance_metrics(inst.ranks, scores).accuracy;
  }
  CHECK(accuracy_sum / data.train.size() == doctest::Approx(1.0));
  CHECK(r.history.epochs.back().train_loss < r.history.epochs.front().train_loss);
}

TEST_CASE("cross entropy drops all-negative instances and reports them") {
  RankedDataset data = toy_dataset(5, 105);
  data.train.emplace_back(99, Image8(6, 6, 7), RankVector({0, 0, 0}));
  TrainConfig cfg = toy_config(LossKind::cross_entropy, 17);
  cfg.max_epochs = 2;
  ScoringTrainResult r = train_scoring(data, cfg);
  CHECK(r.history.skipped_instances == 1);
  std::string csv = history_csv(r.history, cfg, "d");
  CHECK(csv.find("skipped=1") != std::string::npos);
  CHECK(csv.find("binarized=1") != std::string::npos);

  // rlsep keeps the all-negative instance (it just yields an empty pair batch)
  TrainConfig rcfg = toy_config(LossKind::rlsep, 17);
  rcfg.max_epochs = 2;
  ScoringTrainResult rr = train_scoring(data, rcfg);
  CHECK(rr.history.skipped_instances == 0);
}

TEST_CASE("scoring training rejects empty splits") {
  RankedDataset data = toy_dataset(4, 106);
  RankedDataset no_train = data;
  no_train.train.clear();
  CHECK_THROWS_AS(train_scoring(no_train, toy_config(LossKind::rlsep, 1)),
                  std::invalid_argument);
  RankedDataset no_val = data;
  no_val.val.clear();
  CHECK_THROWS_AS(train_scoring(no_val, toy_config(LossKind::rlsep, 1)), std::invalid_argument);
}

TEST_CASE("zero-epoch threshold run returns the initialized head") {
  RankedDataset data = toy_dataset(4, 107);
  TrainConfig cfg = toy_config(LossKind::rlsep, 19);
  ScoringTrainResult scoring = train_scoring(data, cfg);
  cfg.max_epochs = 0;
  ThresholdTrainResult thr = train_threshold(scoring.net, data, cfg);
  Mlp fresh = Mlp::init(Architecture::threshold(128, 3), NetworkKind::threshold, 19);
  CHECK(thr.net.params() == fresh.params());
  CHECK(thr.history.epochs.empty());
}

TEST_CASE("threshold head separates a separable fixture perfectly") {
  // Pixel j encodes label j: 255 = positive, 0 = negative. The handcrafted
  // scoring net forwards pixels to scores, so thresholds near 0.5 are ideal.
  Mlp scoring = pixel_scoring_net(4);
  std::mt19937_64 gen(61);
  std::vector<Instance> instances;
  for (int i = 0; i < 12; ++i) {
    Image8 img(4, 4, 0);
    std::vector<int> ranks(4, 0);
    int positives = 0;
    for (int j = 0; j < 4; ++j) {
      bool on = (gen() % 2) == 0;
      img.pixels[j] = on ? 255 : 0;
      ranks[j] = on ? 1 : 0;
      positives += on;
    }
    if (positives == 0) {
      img.pixels[0] = 255;  // keep at least one positive per instance
      ranks[0] = 1;
    }
    instances.emplace_back(i, img, RankVector(ranks));
  }
  RankedDataset data{LabelSpace(4), instances, instances, instances, {}};

  TrainConfig cfg;
  cfg.loss = LossKind::rlsep;
  cfg.arch = ArchKind::dense;
  cfg.batch_size = 12;
  cfg.max_epochs = 300;
  cfg.patience = 300;
  cfg.learning_rate = 0.05;
  cfg.weight_decay = 0.0;
  cfg.input_size = 4;
  cfg.seed = 23;
  ThresholdTrainResult thr = train_threshold(scoring, data, cfg);

  for (const Instance& inst : data.train) {
    std::vector<Prediction> preds = predict(scoring, thr.net, inst.image);
    PositiveSet got;
    for (const Prediction& p : preds) got.members.push_back(p.label);
    std::sort(got.members.begin(), got.members.end());
    InstanceMetrics m = unranked_instance_metrics(binarize(inst.ranks), got, 4);
    CHECK(m.f1 == doctest::Approx(1.0));
  }
}

TEST_CASE("threshold training rejects a mismatched scoring head") {
  RankedDataset data = toy_dataset(4, 108);
  Mlp wrong_k = Mlp::init(Architecture::scoring(6, 6, 5), NetworkKind::scoring, 1);
  CHECK_THROWS_AS(train_threshold(wrong_k, data, toy_config(LossKind::rlsep, 1)),
                  std::invalid_argument);
}

TEST_CASE("predict applies a strict threshold and orders by score") {
  Mlp scoring = pixel_scoring_net(4);
  Mlp threshold = constant_threshold_net({1.0, 0.5, 0.5, 0.5});

  Image8 img(4, 4, 0);
  img.pixels[0] = 255;  // score 1.0, threshold 1.0: excluded (strict >)
  img.pixels[1] = 0;    // score 0.0: excluded
  img.pixels[2] = 204;  // score 0.8: included
  img.pixels[3] = 128;  // score ~0.502: included, just above 0.5
  std::vector<Prediction> preds = predict(scoring, threshold, img);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].label == 2);
  CHECK(preds[0].score == doctest::Approx(0.8));
  CHECK(preds[1].label == 3);
  CHECK(preds[1].score == doctest::Approx(128.0 / 255.0));

  // ties resolve by ascending label
  Mlp flat = constant_threshold_net({0.5, 0.5, 0.5, 0.5});
  Image8 tie(4, 4, 0);
  tie.pixels[0] = 255;
  tie.pixels[1] = 204;
  tie.pixels[2] = 204;
  std::vector<Prediction> tied = predict(scoring, flat, tie);
  REQUIRE(tied.size() == 3);
  CHECK(tied[0].label == 0);
  CHECK(tied[1].label == 1);
  CHECK(tied[2].label == 2);
  CHECK(tied[1].score == tied[2].score);

  // feature-width mismatch is rejected
  Mlp narrow = Mlp::init(Architecture::threshold(8, 4), NetworkKind::threshold, 3);
  CHECK_THROWS_AS(predict(scoring, narrow, img), std::invalid_argument);
}

}  // TEST_SUITE
