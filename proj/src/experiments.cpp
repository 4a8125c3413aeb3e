#include "ranklab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ranklab/util.hpp"

namespace ranklab {

namespace {

InstanceRecord record_from_scores(const Instance& inst, const ScoreVector& scores,
                                  const PositiveSet& predicted, int label_count) {
  InstanceRecord rec;
  if (has_eligible_pairs(inst.ranks)) rec.ranked = ranked_instance_metrics(inst.ranks, scores);
  if (inst.ranks.max_rank() > 0)
    rec.average_precision = ranked_average_precision(inst.ranks, scores);
  rec.unranked = unranked_instance_metrics(binarize(inst.ranks), predicted, label_count);
  return rec;
}

}  // namespace

MetricReport evaluate_model(const Mlp& scoring, const Mlp& threshold,
                            const std::vector<Instance>& instances) {
  const int label_count = scoring.arch().output_dim();
  if (threshold.arch().output_dim() != label_count ||
      threshold.arch().input_dim() != scoring.arch().feature_dim())
    throw std::invalid_argument("evaluate_model: mismatched scoring/threshold networks");

  std::vector<InstanceRecord> records;
  records.reserve(instances.size());
  for (const Instance& inst : instances) {
    if (inst.ranks.size() != label_count)
      throw std::invalid_argument("evaluate_model: dataset label count does not match checkpoint");
    std::vector<double> input =
        ingest_image(inst.image, scoring.arch().input_h, scoring.arch().input_w);
    std::vector<double> features, scores, cuts;
    scoring.infer(input, &features, &scores);
    threshold.infer(features, nullptr, &cuts);
    PositiveSet predicted;
    for (int j = 0; j < label_count; ++j)
      if (scores[j] > cuts[j]) predicted.members.push_back(j);
    records.push_back(record_from_scores(inst, scores, predicted, label_count));
  }
  return aggregate_report(records);
}

MetricReport evaluate_oracle(const std::vector<Instance>& instances) {
  std::vector<InstanceRecord> records;
  records.reserve(instances.size());
  for (const Instance& inst : instances) {
    const int k = inst.ranks.size();
    ScoreVector scores(k);
    for (int j = 0; j < k; ++j)
      scores[j] = static_cast<double>(inst.ranks.rank(j)) + 1e-9 * j;
    records.push_back(record_from_scores(inst, scores, binarize(inst.ranks), k));
  }
  return aggregate_report(records);
}

std::vector<std::pair<std::string, double>> report_scalars(const MetricReport& r) {
  return {
      {"ranked_precision", r.ranked_precision.mean},
      {"ranked_recall", r.ranked_recall.mean},
      {"ranked_f1", r.ranked_f1.mean},
      {"ranked_accuracy", r.ranked_accuracy.mean},
      {"ranked_exact", r.ranked_exact.mean},
      {"ranked_map", r.ranked_map.mean},
      {"unranked_precision", r.unranked_precision.mean},
      {"unranked_recall", r.unranked_recall.mean},
      {"unranked_f1", r.unranked_f1.mean},
      {"unranked_accuracy", r.unranked_accuracy.mean},
      {"unranked_exact", r.unranked_exact.mean},
  };
}

TrainedModel train_model(const RankedDataset& data, const TrainConfig& cfg) {
  ScoringTrainResult scoring = train_scoring(data, cfg);
  ThresholdTrainResult threshold = train_threshold(scoring.net, data, cfg);
  return TrainedModel{std::move(scoring.net), std::move(threshold.net),
                      std::move(scoring.history), std::move(threshold.history)};
}

namespace {

std::string scale_label(double s) {
  std::ostringstream out;
  out << s;
  return out.str();
}

}  // namespace

std::string CalibrationTable::csv() const {
  std::ostringstream out;
  out << "id";
  for (double s : scales) out << ",score@" << scale_label(s);
  out << ",negatives_mean\n";
  for (const CalibrationRow& row : rows) {
    out << row.id;
    for (double v : row.scores) out << ',' << format_full(v);
    out << ',' << format_full(row.negatives_mean) << '\n';
  }
  return out.str();
}

std::string CalibrationTable::fit_text() const {
  std::ostringstream out;
  for (size_t i = 0; i < scales.size(); ++i)
    out << "scale@" << scale_label(scales[i]) << '\t' << format_full(per_scale[i].mean) << '\t'
        << format_full(per_scale[i].stddev) << '\n';
  out << "negatives\t" << format_full(negatives.mean) << '\t' << format_full(negatives.stddev)
      << '\n';
  return out.str();
}

CalibrationTable calibrate_model(const Mlp& scoring, const std::vector<Instance>& instances) {
  if (instances.empty()) throw std::invalid_argument("calibrate: empty dataset");
  const int label_count = scoring.arch().output_dim();

  // The scale layout comes from the first instance; every other instance
  // must present exactly the same set.
  std::vector<double> scales;
  for (const auto& imp : instances.front().importances)
    if (imp) scales.push_back(*imp);
  std::sort(scales.begin(), scales.end());
  if (scales.empty()) throw std::invalid_argument("calibrate: instances carry no importances");
  if (std::adjacent_find(scales.begin(), scales.end()) != scales.end())
    throw std::invalid_argument("calibrate: duplicate scales in an instance");

  CalibrationTable table;
  table.scales = scales;
  std::vector<std::vector<double>> per_scale(scales.size());
  std::vector<double> negatives_means;

  for (const Instance& inst : instances) {
    if (inst.ranks.size() != label_count)
      throw std::invalid_argument("calibrate: dataset label count does not match checkpoint");
    std::vector<int> label_at_scale(scales.size(), -1);
    int positives = 0;
    for (int j = 0; j < label_count; ++j) {
      if (j >= static_cast<int>(inst.importances.size()) || !inst.importances[j]) continue;
      ++positives;
      auto it = std::lower_bound(scales.begin(), scales.end(), *inst.importances[j]);
      if (it == scales.end() || *it != *inst.importances[j])
        throw std::invalid_argument("calibrate: instance " + std::to_string(inst.id) +
                                    " has a scale outside the common set");
      label_at_scale[it - scales.begin()] = j;
    }
    if (positives != static_cast<int>(scales.size()) ||
        std::count(label_at_scale.begin(), label_at_scale.end(), -1) != 0)
      throw std::invalid_argument("calibrate: instance " + std::to_string(inst.id) +
                                  " does not carry exactly the common scale set");

    std::vector<double> input =
        ingest_image(inst.image, scoring.arch().input_h, scoring.arch().input_w);
    std::vector<double> scores;
    scoring.infer(input, nullptr, &scores);

    CalibrationRow row;
    row.id = inst.id;
    for (size_t s = 0; s < scales.size(); ++s) {
      row.scores.push_back(scores[label_at_scale[s]]);
      per_scale[s].push_back(scores[label_at_scale[s]]);
    }
    KahanSum neg;
    int neg_n = 0;
    for (int j = 0; j < label_count; ++j) {
      if (j < static_cast<int>(inst.importances.size()) && inst.importances[j]) continue;
      neg.add(scores[j]);
      ++neg_n;
    }
    if (neg_n == 0) throw std::invalid_argument("calibrate: instance has no negative labels");
    row.negatives_mean = neg.value() / neg_n;
    negatives_means.push_back(row.negatives_mean);
    table.rows.push_back(std::move(row));
  }

  for (auto& column : per_scale) table.per_scale.push_back(fit_gaussian(column));
  table.negatives = fit_gaussian(negatives_means);
  return table;
}

std::string SignificanceReport::table_text() const {
  std::ostringstream out;
  for (const MethodRuns& m : methods) {
    out << loss_kind_name(m.loss) << " runs=" << m.runs.size() << " failures=" << m.failures
        << '\n';
    if (m.runs.empty()) continue;
    std::vector<std::vector<double>> columns(report_scalars(m.runs.front()).size());
    for (const MetricReport& r : m.runs) {
      auto scalars = report_scalars(r);
      for (size_t i = 0; i < scalars.size(); ++i) columns[i].push_back(scalars[i].second);
    }
    auto names = report_scalars(m.runs.front());
    for (size_t i = 0; i < names.size(); ++i) {
      GaussianFit fit = fit_gaussian(columns[i]);
      out << "  " << names[i].first << '\t' << format_full(fit.mean) << '\t'
          << format_full(fit.stddev) << '\n';
    }
  }
  for (const PairwiseTest& t : tests)
    out << loss_kind_name(t.method_a) << " vs " << loss_kind_name(t.method_b) << '\t' << t.metric
        << "\tp=" << format_full(t.welch.p_two_sided) << '\n';
  return out.str();
}

std::string SignificanceReport::csv() const {
  std::ostringstream out;
  out << "method_a,method_b,metric,t,dof,p\n";
  for (const PairwiseTest& t : tests)
    out << loss_kind_name(t.method_a) << ',' << loss_kind_name(t.method_b) << ',' << t.metric
        << ',' << format_full(t.welch.t) << ',' << format_full(t.welch.dof) << ','
        << format_full(t.welch.p_two_sided) << '\n';
  return out.str();
}

SignificanceReport run_significance(const RankedDataset& data, const std::vector<LossKind>& methods,
                                    int runs, uint64_t base_seed, const TrainConfig& base) {
  if (runs < 2) throw std::invalid_argument("significance: need at least 2 runs");
  if (methods.size() < 2) throw std::invalid_argument("significance: need at least 2 methods");

  SignificanceReport report;
  for (LossKind loss : methods) {
    MethodRuns mr;
    mr.loss = loss;
    for (int r = 0; r < runs; ++r) {
      uint64_t seed = base_seed + static_cast<uint64_t>(r);
      mr.seeds.push_back(seed);
      TrainConfig cfg = base;
      cfg.loss = loss;
      cfg.seed = seed;
      try {
        TrainedModel model = train_model(data, cfg);
        mr.runs.push_back(
            evaluate_model(model.scoring, model.threshold, data.test));
      } catch (const std::exception& e) {
        ++mr.failures;
        std::cerr << "warning: run failed (" << loss_kind_name(loss) << ", seed " << seed
                  << "): " << e.what() << '\n';
      }
    }
    report.methods.push_back(std::move(mr));
  }

  for (size_t a = 0; a < report.methods.size(); ++a)
    for (size_t b = a + 1; b < report.methods.size(); ++b) {
      const MethodRuns& ma = report.methods[a];
      const MethodRuns& mb = report.methods[b];
      if (ma.runs.size() < 2 || mb.runs.size() < 2) continue;
      auto names = report_scalars(ma.runs.front());
      for (size_t i = 0; i < names.size(); ++i) {
        std::vector<double> xs, ys;
        for (const MetricReport& r : ma.runs) xs.push_back(report_scalars(r)[i].second);
        for (const MetricReport& r : mb.runs) ys.push_back(report_scalars(r)[i].second);
        report.tests.push_back(PairwiseTest{ma.loss, mb.loss, names[i].first,
                                            welch_t_test(xs, ys)});
      }
    }
  return report;
}

std::string SweepReport::csv() const {
  std::ostringstream out;
  out << "method,mode,digits,ranked_accuracy,ranked_exact\n";
  for (const SweepRow& row : rows)
    out << loss_kind_name(row.loss) << ',' << (mode == SweepMode::full ? "full" : "partial") << ','
        << row.digits << ',' << format_full(row.ranked_accuracy) << ','
        << format_full(row.ranked_exact) << '\n';
  return out.str();
}

SweepReport run_sweep(const std::vector<std::pair<int, const RankedDataset*>>& datasets,
                      SweepMode mode, const std::vector<LossKind>& methods,
                      const TrainConfig& base) {
  if (datasets.empty()) throw std::invalid_argument("sweep: no datasets");
  for (const auto& [d, set] : datasets)
    if (d < 1 || d > 10) throw std::invalid_argument("sweep: digit count must be 1..10");

  SweepReport report;
  report.mode = mode;
  for (LossKind loss : methods) {
    TrainConfig cfg = base;
    cfg.loss = loss;
    if (mode == SweepMode::partial) {
      auto it = std::find_if(datasets.begin(), datasets.end(),
                             [](const auto& p) { return p.first == 3; });
      if (it == datasets.end())
        throw std::invalid_argument("sweep: partial mode needs the 3-digit dataset");
      TrainedModel model = train_model(*it->second, cfg);
      for (const auto& [d, set] : datasets) {
        MetricReport r = evaluate_model(model.scoring, model.threshold, set->test);
        report.rows.push_back(SweepRow{loss, d, r.ranked_accuracy.mean, r.ranked_exact.mean});
      }
    } else {
      for (const auto& [d, set] : datasets) {
        TrainedModel model = train_model(*set, cfg);
        MetricReport r = evaluate_model(model.scoring, model.threshold, set->test);
        report.rows.push_back(SweepRow{loss, d, r.ranked_accuracy.mean, r.ranked_exact.mean});
      }
    }
  }
  return report;
}

}  // namespace ranklab
