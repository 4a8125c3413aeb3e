#include "ranklab/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ranklab/util.hpp"

namespace ranklab {

PairConfusion pair_confusion(const RankVector& ranks, const ScoreVector& scores) {
  if (static_cast<size_t>(ranks.size()) != scores.size())
    throw std::invalid_argument("pair_confusion: rank/score length mismatch");
  PairConfusion c;
  const int k = ranks.size();
  for (int u = 0; u < k; ++u) {
    for (int v = u + 1; v < k; ++v) {
      if (ranks.rank(u) == ranks.rank(v)) continue;
      bool truth = ranks.rank(u) > ranks.rank(v);
      bool predicted = scores[u] > scores[v];
      if (truth && predicted) ++c.tp;
      else if (!truth && predicted) ++c.fp;
      else if (truth && !predicted) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

namespace {

// tp+fp = 0 has no predicted positives: precision is 1 when there is also
// nothing to find, else 0.
double safe_precision(long tp, long fp, long fn) {
  if (tp + fp == 0) return (tp + fn == 0) ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double safe_recall(long tp, long fn, long fp) {
  if (tp + fn == 0) return (tp + fp == 0) ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

}  // namespace

InstanceMetrics metrics_from_confusion(const PairConfusion& c) {
  InstanceMetrics m;
  m.precision = safe_precision(c.tp, c.fp, c.fn);
  m.recall = safe_recall(c.tp, c.fn, c.fp);
  m.f1 = (m.precision + m.recall > 0.0)
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = c.total() > 0 ? static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()) : 1.0;
  m.exact = (c.fp == 0 && c.fn == 0);
  return m;
}

bool has_eligible_pairs(const RankVector& ranks) {
  for (int j = 1; j < ranks.size(); ++j)
    if (ranks.rank(j) != ranks.rank(0)) return true;
  return false;
}

InstanceMetrics ranked_instance_metrics(const RankVector& ranks, const ScoreVector& scores) {
  if (!has_eligible_pairs(ranks))
    throw std::invalid_argument("ranked_instance_metrics: no eligible pairs (all ranks equal)");
  return metrics_from_confusion(pair_confusion(ranks, scores));
}

namespace {

// Ranked precision over a raw rank array; reduction states need not satisfy
// the RankVector density rule, so this works on plain values.
double raw_ranked_precision(const std::vector<int>& ranks, const ScoreVector& scores) {
  long tp = 0, fp = 0, fn = 0;
  const int k = static_cast<int>(ranks.size());
  for (int u = 0; u < k; ++u) {
    for (int v = u + 1; v < k; ++v) {
      if (ranks[u] == ranks[v]) continue;
      bool truth = ranks[u] > ranks[v];
      bool predicted = scores[u] > scores[v];
      if (truth && predicted) ++tp;
      else if (!truth && predicted) ++fp;
      else if (truth) ++fn;
    }
  }
  return safe_precision(tp, fp, fn);
}

}  // namespace

double ranked_average_precision(const RankVector& ranks, const ScoreVector& scores) {
  if (static_cast<size_t>(ranks.size()) != scores.size())
    throw std::invalid_argument("ranked_average_precision: rank/score length mismatch");
  if (ranks.max_rank() == 0)
    throw std::invalid_argument("ranked_average_precision: all-zero rank vector");
  std::vector<int> state = ranks.values();
  KahanSum sum;
  int evaluations = 0;
  while (true) {
    sum.add(raw_ranked_precision(state, scores));
    ++evaluations;
    // Stop once a single non-zero tier remains; otherwise zero out the
    // smallest tier and re-evaluate.
    int smallest = 0;
    for (int r : state)
      if (r > 0 && (smallest == 0 || r < smallest)) smallest = r;
    bool more_than_one_tier = false;
    for (int r : state)
      if (r > smallest) { more_than_one_tier = true; break; }
    if (!more_than_one_tier) break;
    for (int& r : state)
      if (r == smallest) r = 0;
  }
  return sum.value() / evaluations;
}

InstanceMetrics unranked_instance_metrics(const PositiveSet& truth, const PositiveSet& predicted,
                                          int label_count) {
  long tp = 0, fp = 0, fn = 0;
  for (int j : predicted.members) {
    if (j < 0 || j >= label_count)
      throw std::invalid_argument("unranked_instance_metrics: index out of range");
    if (truth.contains(j)) ++tp;
    else ++fp;
  }
  for (int j : truth.members) {
    if (j < 0 || j >= label_count)
      throw std::invalid_argument("unranked_instance_metrics: index out of range");
    if (!predicted.contains(j)) ++fn;
  }
  long tn = label_count - tp - fp - fn;
  PairConfusion c{tp, fp, tn, fn};
  return metrics_from_confusion(c);
}

namespace {

class StatAccumulator {
 public:
  void add(double x) {
    sum_.add(x);
    sumsq_.add(x * x);
    ++n_;
  }
  MetricStat finish() const {
    MetricStat s;
    s.count = n_;
    if (n_ == 0) return s;
    s.mean = sum_.value() / n_;
    if (n_ >= 2) {
      double var = (sumsq_.value() - n_ * s.mean * s.mean) / (n_ - 1);
      s.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return s;
  }

 private:
  KahanSum sum_, sumsq_;
  int n_ = 0;
};

void kv_line(std::ostringstream& out, const char* name, const MetricStat& s) {
  out << name << '\t' << format_full(s.mean) << '\t' << format_full(s.stddev) << '\t' << s.count
      << '\n';
}

std::string pct1(const MetricStat& s) {
  if (s.count == 0) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", s.mean * 100.0);
  return buf;
}

}  // namespace

MetricReport aggregate_report(const std::vector<InstanceRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate_report: no instances");
  StatAccumulator rp, rr, rf, ra, rx, rm, up, ur, uf, ua, ux;
  MetricReport report;
  report.instances = static_cast<int>(records.size());
  for (const auto& rec : records) {
    if (rec.ranked) {
      rp.add(rec.ranked->precision);
      rr.add(rec.ranked->recall);
      rf.add(rec.ranked->f1);
      ra.add(rec.ranked->accuracy);
      rx.add(rec.ranked->exact ? 1.0 : 0.0);
    } else {
      ++report.ranked_excluded;
    }
    if (rec.average_precision) rm.add(*rec.average_precision);
    else ++report.map_excluded;
    if (rec.unranked) {
      up.add(rec.unranked->precision);
      ur.add(rec.unranked->recall);
      uf.add(rec.unranked->f1);
      ua.add(rec.unranked->accuracy);
      ux.add(rec.unranked->exact ? 1.0 : 0.0);
    }
  }
  report.ranked_precision = rp.finish();
  report.ranked_recall = rr.finish();
  report.ranked_f1 = rf.finish();
  report.ranked_accuracy = ra.finish();
  report.ranked_exact = rx.finish();
  report.ranked_map = rm.finish();
  report.unranked_precision = up.finish();
  report.unranked_recall = ur.finish();
  report.unranked_f1 = uf.finish();
  report.unranked_accuracy = ua.finish();
  report.unranked_exact = ux.finish();
  return report;
}

std::string MetricReport::to_kv() const {
  std::ostringstream out;
  out << "instances\t" << instances << '\n';
  out << "ranked_excluded\t" << ranked_excluded << '\n';
  out << "map_excluded\t" << map_excluded << '\n';
  kv_line(out, "ranked_precision", ranked_precision);
  kv_line(out, "ranked_recall", ranked_recall);
  kv_line(out, "ranked_f1", ranked_f1);
  kv_line(out, "ranked_accuracy", ranked_accuracy);
  kv_line(out, "ranked_exact_match", ranked_exact);
  kv_line(out, "ranked_map", ranked_map);
  kv_line(out, "unranked_precision", unranked_precision);
  kv_line(out, "unranked_recall", unranked_recall);
  kv_line(out, "unranked_f1", unranked_f1);
  kv_line(out, "unranked_accuracy", unranked_accuracy);
  kv_line(out, "unranked_exact_match", unranked_exact);
  return out.str();
}

std::string MetricReport::csv_header() {
  return "method,scope,precision,recall,f1,accuracy,exact_match,map\n";
}

std::string MetricReport::to_csv_rows(const std::string& method) const {
  std::ostringstream out;
  out << method << ",R," << pct1(ranked_precision) << ',' << pct1(ranked_recall) << ','
      << pct1(ranked_f1) << ',' << pct1(ranked_accuracy) << ',' << pct1(ranked_exact) << ','
      << pct1(ranked_map) << '\n';
  out << method << ",U," << pct1(unranked_precision) << ',' << pct1(unranked_recall) << ','
      << pct1(unranked_f1) << ',' << pct1(unranked_accuracy) << ',' << pct1(unranked_exact)
      << ",\n";
  return out.str();
}

}  // namespace ranklab
