#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "alebk/eval/metrics.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace alebk::eval;

TEST_SUITE("metrics") {
  TEST_CASE("harmonic mean of the reported precision and recall") {
    const auto f = f1_score(0.7533, 0.9339);
    REQUIRE(f);
    CHECK(std::abs(*f - 0.8339) <= 1e-4);
    CHECK(!f1_score(0.0, 0.0));
  }

  TEST_CASE("counts to precision, recall and F1") {
    const auto m = prf1({3, 1, 0, 2});
    CHECK(*m.precision == doctest::Approx(0.75));
    CHECK(*m.recall == doctest::Approx(0.6));
    CHECK(*m.f1 == doctest::Approx(2.0 / 3.0));

    const auto no_pred = prf1({0, 0, 5, 3});
    CHECK(!no_pred.precision);
    CHECK(*no_pred.recall == 0.0);
    CHECK(!no_pred.f1);
    const auto no_pos = prf1({0, 2, 5, 0});
    CHECK(*no_pos.precision == 0.0);
    CHECK(!no_pos.recall);
    CHECK(!no_pos.f1);
    CHECK(!prf1({0, 0, 4, 0}).f1);
    CHECK(accuracy({3, 1, 4, 2}) == doctest::Approx(0.7));
    CHECK_THROWS(accuracy({}));
  }

  TEST_CASE("ratios do not depend on scale") {
    const ConfusionCounts a{3, 1, 7, 2}, b{3000, 1000, 7000, 2000};
    CHECK(*prf1(a).f1 == doctest::Approx(*prf1(b).f1).epsilon(1e-14));
    CHECK(accuracy(a) == doctest::Approx(accuracy(b)).epsilon(1e-14));
  }

  TEST_CASE("confusion at a threshold") {
    const std::vector<double> s{0.1, 0.5, 0.7, 0.4};
    const std::vector<int> l{0, 1, 0, 1};
    CHECK(confusion_at(s, l, 0.5) == ConfusionCounts{1, 1, 1, 1});
    CHECK_THROWS(confusion_at(s, std::vector<int>{0, 1}, 0.5));
  }

  TEST_CASE("DET curve is monotone and spans both ends") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> s(300);
    std::vector<int> l(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
      l[i] = static_cast<int>(gen() % 2);
      s[i] = std::round((u(gen) + 0.3 * l[i]) * 50) / 50;  // plenty of ties
    }
    const auto c = det_curve(s, l);
    REQUIRE(c.points.size() == std::set<double>(s.begin(), s.end()).size() + 1);
    CHECK(c.points.front().far == 1.0);
    CHECK(c.points.front().frr == 0.0);
    CHECK(c.points.back().far == 0.0);
    CHECK(c.points.back().frr == 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].threshold > c.points[i - 1].threshold);
      CHECK(c.points[i].far <= c.points[i - 1].far);
      CHECK(c.points[i].frr >= c.points[i - 1].frr);
    }
    CHECK_THROWS(det_curve(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}));
    CHECK_THROWS(det_curve(std::vector<double>{0.1, std::nan("")}, std::vector<int>{0, 1}));
  }

  TEST_CASE("random scores give an EER near one half") {
    std::mt19937_64 gen(32);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> s(10000);
    std::vector<int> l(10000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = u(gen);
      l[i] = static_cast<int>(gen() % 2);
    }
    const auto e = eer(det_curve(s, l));
    CHECK(std::abs(e.eer - 0.5) <= 0.05);
  }

  TEST_CASE("sort-and-sweep agrees with the exhaustive sweep") {
    std::mt19937_64 gen(33);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 2 + gen() % 60;
      std::vector<double> s(n);
      std::vector<int> l(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(gen() % 20) / 4.0;
        l[i] = static_cast<int>(gen() % 2);
      }
      l[0] = 0;
      l[1] = 1;
      const auto c = det_curve(s, l);
      const auto e = eer(c);
      const auto m = max_accuracy(c);
      const auto want = oracle::exhaustive_sweep(s, l);
      CHECK(e.threshold == want.eer.threshold);
      CHECK(e.far == want.eer.far);
      CHECK(e.frr == want.eer.frr);
      CHECK(m.threshold == want.max_acc.threshold);
      CHECK(m.accuracy == doctest::Approx(want.max_acc.accuracy).epsilon(1e-15));
      CHECK(c.points[e.index].threshold == e.threshold);
      CHECK(c.points[m.index].threshold == m.threshold);
    }
  }

  TEST_CASE("leave-one-subject-out folds partition the samples") {
    std::vector<std::string> ids;
    for (int i = 0; i < 38 * 3; ++i) ids.push_back("u" + std::to_string(i % 38));
    const auto folds = loso_folds(ids);
    REQUIRE(folds.size() == 38);
    std::vector<int> tested(ids.size(), 0);
    for (const auto& f : folds) {
      CHECK(f.train.size() + f.test.size() == ids.size());
      for (auto i : f.test) {
        CHECK(ids[i] == f.subject);
        ++tested[i];
      }
      for (auto i : f.train) CHECK(ids[i] != f.subject);
    }
    CHECK(std::all_of(tested.begin(), tested.end(), [](int t) { return t == 1; }));

    const std::vector<std::string> two{"a", "b", "a", "b", "b"};
    const auto f2 = loso_folds(two);
    REQUIRE(f2.size() == 2);
    CHECK(f2[0].test == f2[1].train);
    CHECK(f2[1].test == f2[0].train);

    CHECK_THROWS(loso_folds(std::vector<std::string>{"a", "a"}));
    CHECK_THROWS(loso_folds(std::vector<std::string>{}));
  }
}
