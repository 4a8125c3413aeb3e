#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ranklab/datagen.hpp"
#include "ranklab/metrics.hpp"
#include "ranklab/stats.hpp"
#include "ranklab/trainer.hpp"

namespace ranklab {

/// Scores every instance with the scoring/threshold pair and aggregates the
/// full metric suite (ranked metrics from raw scores, unranked from
/// thresholded predictions). Images are resampled to the scoring network's
/// input grid.
MetricReport evaluate_model(const Mlp& scoring, const Mlp& threshold,
                            const std::vector<Instance>& instances);

/// Ground-truth scorer (score := rank plus a tiny index tiebreak, predictions
/// := the true positive set); ranked metrics are 1 by construction, which
/// pins the upper end of the reporting pipeline.
MetricReport evaluate_oracle(const std::vector<Instance>& instances);

/// The per-run scalars reports are compared on: name -> per-instance mean.
std::vector<std::pair<std::string, double>> report_scalars(const MetricReport& report);

struct TrainedModel {
  Mlp scoring;
  Mlp threshold;
  TrainHistory scoring_history;
  TrainHistory threshold_history;
};

/// Scoring network first, threshold head on its frozen features second.
TrainedModel train_model(const RankedDataset& data, const TrainConfig& cfg);

struct CalibrationRow {
  int64_t id = 0;
  std::vector<double> scores;  // one per scale column, ascending scale
  double negatives_mean = 0.0;
};

struct CalibrationTable {
  std::vector<double> scales;  // ascending
  std::vector<CalibrationRow> rows;
  std::vector<GaussianFit> per_scale;
  GaussianFit negatives;

  std::string csv() const;     // id, score@<scale>..., negatives_mean
  std::string fit_text() const;  // per-scale and negatives Gaussian fits
};

/// Reads the scale layout from the instances' importances; every instance
/// must carry exactly the same scale set. Throws std::invalid_argument
/// otherwise.
CalibrationTable calibrate_model(const Mlp& scoring, const std::vector<Instance>& instances);

struct MethodRuns {
  LossKind loss = LossKind::rlsep;
  std::vector<uint64_t> seeds;
  std::vector<MetricReport> runs;  // successful runs only
  int failures = 0;
};

struct PairwiseTest {
  LossKind method_a;
  LossKind method_b;
  std::string metric;
  WelchResult welch;
};

struct SignificanceReport {
  std::vector<MethodRuns> methods;
  std::vector<PairwiseTest> tests;

  std::string table_text() const;  // per-method mean +- std per metric
  std::string csv() const;         // tests, one row per (pair, metric)
};

/// Trains `runs` models per method with seeds base_seed .. base_seed+runs-1,
/// evaluates each on the test split, and Welch-tests every method pair on
/// every reported metric.
SignificanceReport run_significance(const RankedDataset& data, const std::vector<LossKind>& methods,
                                    int runs, uint64_t base_seed, const TrainConfig& base);

struct SweepRow {
  LossKind loss = LossKind::rlsep;
  int digits = 0;
  double ranked_accuracy = 0.0;
  double ranked_exact = 0.0;
};

enum class SweepMode { full, partial };

struct SweepReport {
  SweepMode mode = SweepMode::full;
  std::vector<SweepRow> rows;

  std::string csv() const;
};

/// `datasets` maps digit count d to its dataset. Full mode trains one model
/// per (method, d); partial mode trains each method once on the 3-digit set
/// and evaluates it on every d's test split.
SweepReport run_sweep(const std::vector<std::pair<int, const RankedDataset*>>& datasets,
                      SweepMode mode, const std::vector<LossKind>& methods,
                      const TrainConfig& base);

}  // namespace ranklab
