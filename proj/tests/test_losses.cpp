#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "ranklab/losses.hpp"
#include "ranklab/rng.hpp"
#include "support/oracles.hpp"

using namespace ranklab;

namespace {

std::set<std::pair<int, int>> as_set(const PairBatch& batch) {
  std::set<std::pair<int, int>> out;
  for (const LabelPair& p : batch.pairs) out.insert({p.high, p.low});
  return out;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("sampler returns the full eligible set when the budget covers it") {
  Rng rng(1);
  PairBatch batch = sample_rank_pairs(RankVector({2, 1, 0, 0}), 10, rng);
  CHECK(as_set(batch) == std::set<std::pair<int, int>>{
                             {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
}

TEST_CASE("sampler trivial and empty cases") {
  Rng rng(2);
  CHECK(as_set(sample_rank_pairs(RankVector({1, 0}), 1, rng)) ==
        std::set<std::pair<int, int>>{{0, 1}});
  CHECK(sample_rank_pairs(RankVector({1, 1, 1}), 50, rng).pairs.empty());
  CHECK(sample_rank_pairs(RankVector({0, 0}), 3, rng).pairs.empty());
  CHECK_THROWS_AS(sample_rank_pairs(RankVector({1, 0}), 0, rng), std::invalid_argument);
}

TEST_CASE("sampled subsets are unique, eligible, and budget-sized") {
  Rng rng(3);
  RankVector ranks({3, 2, 1, 0, 0, 1});
  // eligible pairs: count them via the exhaustive enumerator
  const int eligible = static_cast<int>(enumerate_rank_pairs(ranks).size());
  REQUIRE(eligible > 4);
  for (int t = 1; t <= eligible + 3; ++t) {
    PairBatch batch = sample_rank_pairs(ranks, t, rng);
    CHECK(static_cast<int>(batch.pairs.size()) == std::min(t, eligible));
    auto set = as_set(batch);
    CHECK(set.size() == batch.pairs.size());  // no duplicates
    for (const auto& [u, v] : set) CHECK(ranks.rank(u) > ranks.rank(v));
  }
}

TEST_CASE("sampling is uniform enough over eligible pairs") {
  Rng rng(4);
  RankVector ranks({2, 1, 0, 0});  // 5 eligible pairs
  std::map<std::pair<int, int>, int> hits;
  const int trials = 5000;
  for (int i = 0; i < trials; ++i)
    for (const LabelPair& p : sample_rank_pairs(ranks, 2, rng).pairs) ++hits[{p.high, p.low}];
  // each pair should be hit about trials * 2/5 times
  for (const auto& [pair, n] : hits) {
    CHECK(n > trials * 2 / 5 - 300);
    CHECK(n < trials * 2 / 5 + 300);
  }
  CHECK(hits.size() == 5);
}

TEST_CASE("lse loss empty batch") {
  LossResult r = lse_pairwise_loss({1.0, -2.0}, PairBatch{});
  CHECK(r.value == 0.0);
  CHECK(r.grad == ScoreVector{0.0, 0.0});
}

TEST_CASE("lse loss equal scores gives log 2") {
  PairBatch batch;
  batch.pairs = {{0, 1}};
  LossResult r = lse_pairwise_loss({0.7, 0.7}, batch);
  CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("lse loss pinned example: scores [2,0], one pair") {
  PairBatch batch;
  batch.pairs = {{0, 1}};
  LossResult r = lse_pairwise_loss({2.0, 0.0}, batch);
  CHECK(r.value == doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(0.126928).epsilon(1e-5));
  CHECK(r.grad[0] == doctest::Approx(-0.119203).epsilon(1e-5));
  CHECK(r.grad[1] == doctest::Approx(+0.119203).epsilon(1e-5));
}

TEST_CASE("lse loss is overflow-safe at score gaps of 500") {
  PairBatch batch;
  batch.pairs = {{0, 1}};
  LossResult wrong_way = lse_pairwise_loss({-250.0, 250.0}, batch);
  CHECK(std::isfinite(wrong_way.value));
  CHECK(wrong_way.value == doctest::Approx(500.0).epsilon(1e-10));
  CHECK(wrong_way.grad[0] == doctest::Approx(-1.0).epsilon(1e-10));
  LossResult right_way = lse_pairwise_loss({250.0, -250.0}, batch);
  CHECK(right_way.value >= 0.0);
  CHECK(right_way.value < 1e-200);
}

TEST_CASE("lse loss rejects bad indices and non-finite scores") {
  PairBatch batch;
  batch.pairs = {{0, 2}};
  CHECK_THROWS_AS(lse_pairwise_loss({1.0, 0.0}, batch), std::invalid_argument);
  PairBatch ok;
  ok.pairs = {{0, 1}};
  CHECK_THROWS_AS(lse_pairwise_loss({std::nan(""), 0.0}, ok), std::invalid_argument);
}

TEST_CASE("lse gradient sums to zero") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    int k = 3 + static_cast<int>(gen() % 8);
    std::vector<int> raw = oracles::random_dense_ranks(k, gen);
    ScoreVector scores(k);
    for (double& s : scores) s = score(gen);
    PairBatch batch = sample_rank_pairs(RankVector(raw), 4, rng);
    LossResult r = lse_pairwise_loss(scores, batch);
    double sum = 0.0;
    for (double g : r.grad) sum += g;
    CHECK(std::fabs(sum) < 1e-12);
  }
}

TEST_CASE("lse analytic gradient matches central differences") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  Rng rng(8);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    int k = 3 + static_cast<int>(gen() % 8);
    std::vector<int> raw = oracles::random_dense_ranks(k, gen);
    PairBatch batch = sample_rank_pairs(RankVector(raw), 1000, rng);
    if (batch.pairs.empty()) continue;
    ScoreVector scores(k);
    for (double& s : scores) s = score(gen);
    LossResult r = lse_pairwise_loss(scores, batch);
    auto f = [&](const std::vector<double>& x) { return lse_pairwise_loss(x, batch).value; };
    std::vector<double> fd = oracles::fd_gradient(f, scores, 1e-6);
    for (int j = 0; j < k; ++j) CHECK(oracles::close_rel(r.grad[j], fd[j], 1e-5));
    ++checked;
  }
  CHECK(checked > 60);
}

TEST_CASE("lse monotonicity: raising an always-high score lowers the loss") {
  PairBatch batch;
  batch.pairs = {{0, 1}, {0, 2}};
  ScoreVector s{0.5, 0.2, -0.1};
  double before = lse_pairwise_loss(s, batch).value;
  s[0] += 0.25;
  CHECK(lse_pairwise_loss(s, batch).value < before);
}

TEST_CASE("lse descent: a small step along -grad never increases the loss") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    int k = 3 + static_cast<int>(gen() % 8);
    PairBatch batch = sample_rank_pairs(RankVector(oracles::random_dense_ranks(k, gen)), 1000, rng);
    if (batch.pairs.empty()) continue;
    ScoreVector s(k);
    for (double& x : s) x = score(gen);
    LossResult r = lse_pairwise_loss(s, batch);
    ScoreVector stepped = s;
    for (int j = 0; j < k; ++j) stepped[j] -= 1e-3 * r.grad[j];
    CHECK(lse_pairwise_loss(stepped, batch).value <= r.value + 1e-12);
  }
}

TEST_CASE("cross entropy pinned examples") {
  LossResult sym = cross_entropy_loss({0.0, 0.0}, PositiveSet{{0}});
  CHECK(sym.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  LossResult ex = cross_entropy_loss({1.0, 0.0, 0.0}, PositiveSet{{0, 1}});
  CHECK(ex.value == doctest::Approx(1.051444).epsilon(1e-5));

  LossResult saturated = cross_entropy_loss({50.0, 0.0}, PositiveSet{{0}});
  CHECK(saturated.value >= 0.0);
  CHECK(saturated.value < 1e-20);
}

TEST_CASE("cross entropy gradient is softmax minus target") {
  ScoreVector s{0.3, -1.2, 2.0, 0.0};
  PositiveSet pos{{1, 2}};
  LossResult r = cross_entropy_loss(s, pos);
  // independent softmax with long double accumulation
  long double z = 0;
  for (double x : s) z += expl((long double)x);
  for (int j = 0; j < 4; ++j) {
    long double p = expl((long double)s[j]) / z;
    double target = pos.contains(j) ? 0.5 : 0.0;
    CHECK(oracles::close_rel(r.grad[j], (double)p - target, 1e-12, 1e-15));
  }
}

TEST_CASE("cross entropy rejects an empty positive set") {
  CHECK_THROWS_AS(cross_entropy_loss({1.0, 2.0}, PositiveSet{}), std::invalid_argument);
}

TEST_CASE("cross entropy analytic gradient matches central differences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    int k = 3 + static_cast<int>(gen() % 8);
    ScoreVector s(k);
    for (double& x : s) x = score(gen);
    PositiveSet pos;
    for (int j = 0; j < k; ++j)
      if (gen() % 3 == 0) pos.members.push_back(j);
    if (pos.empty()) pos.members.push_back(static_cast<int>(gen() % k));
    LossResult r = cross_entropy_loss(s, pos);
    auto f = [&](const std::vector<double>& x) { return cross_entropy_loss(x, pos).value; };
    std::vector<double> fd = oracles::fd_gradient(f, s, 1e-6);
    for (int j = 0; j < k; ++j) CHECK(oracles::close_rel(r.grad[j], fd[j], 1e-5));
  }
}

TEST_CASE("rlsep equals lsep on binary ranks, bit for bit") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    int k = 3 + static_cast<int>(gen() % 8);
    std::vector<int> raw(k);
    for (int& r : raw) r = static_cast<int>(gen() % 2);
    RankVector ranks(raw);
    ScoreVector s(k);
    for (double& x : s) x = score(gen);

    // identical rng state on both sides
    Rng rng_a(trial), rng_b(trial);
    PairBatch za = sample_rank_pairs(ranks, 6, rng_a);
    PairBatch phi = sample_rank_pairs(binary_ranks(ranks), 6, rng_b);
    REQUIRE(za.pairs.size() == phi.pairs.size());
    for (size_t i = 0; i < za.pairs.size(); ++i) {
      CHECK(za.pairs[i].high == phi.pairs[i].high);
      CHECK(za.pairs[i].low == phi.pairs[i].low);
    }
    LossResult a = lse_pairwise_loss(s, za);
    LossResult b = lse_pairwise_loss(s, phi);
    CHECK(a.value == b.value);
    for (int j = 0; j < k; ++j) CHECK(a.grad[j] == b.grad[j]);
  }
}

}  // TEST_SUITE
