#include <doctest.h>

#include <cmath>
#include <numbers>

#include "twincalib/objective.hpp"
#include "twincalib/rng.hpp"

using namespace twincalib;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Plain-loop oracles, independent of the Eigen implementations.
double mape_oracle(const std::vector<double>& sim, const std::vector<double>& y, double floor) {
  double s = 0.0;
  int m = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (std::fabs(y[t]) < floor) continue;
    s += std::fabs(sim[t] - y[t]) / std::fabs(y[t]);
    ++m;
  }
  return 100.0 * s / m;
}

double jain_oracle(const std::vector<double>& t) {
  double a = 0.0, b = 0.0;
  for (double x : t) {
    a += x;
    b += x * x;
  }
  return a * a / (static_cast<double>(t.size()) * b);
}

Eigen::Vector3d random_simplex(SeededRng& r) {
  Eigen::Vector3d w(r.uniform(0.01, 1.0), r.uniform(0.01, 1.0), r.uniform(0.01, 1.0));
  return w / w.sum();
}

}  // namespace

TEST_CASE("mape examples") {
  CHECK(mape(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mape(vec({2}), vec({1})) == 100.0);
  CHECK(mape(vec({1, 3}), vec({2, 2})) == 50.0);
}

TEST_CASE("mape excludes targets below the floor") {
  CHECK(mape(vec({5, 2}), vec({0, 1})) == 100.0);
  CHECK_THROWS_AS(mape(vec({1, 2}), vec({0, 1e-9})), UndefinedTargetError);
  CHECK_THROWS_AS(mape(vec({1, 2}), vec({1})), DimensionError);
  CHECK_THROWS_AS(mape(Eigen::VectorXd(), Eigen::VectorXd()), DimensionError);
}

TEST_CASE("property: mape matches a loop oracle, is non-negative and zero only on equality") {
  SeededRng r(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = r.uniform_int(1, 40);
    std::vector<double> s, y;
    Eigen::VectorXd es(n), ey(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      y.push_back(r.uniform() < 0.1 ? 0.0 : r.uniform(-5.0, 5.0));
      s.push_back(r.uniform() < 0.3 ? y.back() : r.uniform(-5.0, 5.0));
      es(t) = s.back();
      ey(t) = y.back();
    }
    bool any = false;
    for (double v : y) any = any || std::fabs(v) >= 1e-6;
    if (!any) continue;
    const double m = mape(es, ey);
    CHECK(m >= 0.0);
    CHECK(m == doctest::Approx(mape_oracle(s, y, 1e-6)).epsilon(1e-12));
    CHECK(mape(ey, ey) == 0.0);
  }
}

TEST_CASE("kpi error vector examples") {
  KpiSeries target(3);
  target.active_ues << 1, 2, 3;
  target.cell_load << 0.1, 0.2, 0.3;
  target.dl_volume << 10, 20, 30;
  CHECK(kpi_error_vector(target, target).isZero());
  KpiSeries twice = target;
  for (std::size_t i = 0; i < kNumKpis; ++i) twice.kpi(i) *= 2.0;
  twice.cell_load = target.cell_load * 2.0;
  CHECK(kpi_error_vector(twice, target).isApprox(Eigen::Vector3d::Constant(100.0)));
  KpiSeries only_active = target;
  only_active.active_ues(0) = 5;
  const auto g = kpi_error_vector(only_active, target);
  CHECK(g(0) > 0.0);
  CHECK(g(1) == 0.0);
  CHECK(g(2) == 0.0);
  CHECK_THROWS_AS(kpi_error_vector(KpiSeries(2), target), DimensionError);
}

TEST_CASE("kpi series validation") {
  KpiSeries s(2);
  CHECK_NOTHROW(s.validate());
  s.cell_load(0) = 1.5;
  CHECK_THROWS_AS(s.validate(), DomainError);
  KpiSeries t(2);
  t.dl_volume.resize(3);
  CHECK_THROWS_AS(t.validate(), DimensionError);
}

TEST_CASE("preference vector invariants") {
  CHECK_NOTHROW(PreferenceVector(Eigen::Vector3d(0.8, 0.1, 0.1)));
  CHECK_THROWS_AS(PreferenceVector(Eigen::Vector3d(0.8, 0.2, 0.0)), DomainError);
  CHECK_THROWS_AS(PreferenceVector(Eigen::Vector3d(0.5, 0.5, 0.5)), DomainError);
  CHECK(PreferenceVector::uniform().weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("weighted errors and scalarization examples") {
  const Eigen::Vector3d p(0.8, 0.1, 0.1), g(10, 20, 30);
  const Eigen::Vector3d t = weighted_errors(p, g);
  CHECK(t(0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(t(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t(2) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(weighted_errors(p, Eigen::Vector3d::Zero().eval()).isZero());
  const auto u = PreferenceVector::uniform();
  const Eigen::Vector3d eq = weighted_errors(u, Eigen::Vector3d::Constant(4.0));
  CHECK(eq(0) == eq(1));
  CHECK(eq(1) == eq(2));
  CHECK(scalarized_objective(p, g) == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(scalarized_objective(p, Eigen::Vector3d::Zero().eval()) == 0.0);
  const Eigen::Vector3d pp(0.1, 0.8, 0.1), gp(20, 10, 30);
  CHECK(scalarized_objective(pp, gp) == doctest::Approx(scalarized_objective(p, g)).epsilon(1e-15));
  CHECK_THROWS_AS(weighted_errors(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("alpha utility examples") {
  CHECK(alpha_utility(FairnessConfig{1.0, 1e-6}, 1.0) == 0.0);
  CHECK(alpha_utility(FairnessConfig{0.0, 1e-6}, 7.0) == 7.0);
  CHECK(alpha_utility(FairnessConfig{2.0, 1e-6}, 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(alpha_utility(FairnessConfig{1.0, 1e-6}, 0.0) == doctest::Approx(std::log(1e-6)));
  CHECK(std::isfinite(alpha_utility(FairnessConfig{3.0, 1e-6}, 0.0)));
}

TEST_CASE("fairness objective examples") {
  const FairnessConfig pf{1.0, 1e-6};
  CHECK(fairness_objective(pf, Eigen::Vector3d::Ones().eval(), Eigen::Vector3d::Ones().eval()) == 0.0);
  const double e = std::numbers::e;
  CHECK(fairness_objective(pf, Eigen::Vector3d::Ones().eval(), Eigen::Vector3d(e, e, 1.0)) ==
        doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("property: alpha utility strictly increasing above the floor") {
  SeededRng r(41);
  for (int trial = 0; trial < 2000; ++trial) {
    const FairnessConfig cfg{r.uniform(0.0, 5.0), 1e-6};
    const double a = r.uniform(1e-6, 100.0);
    const double b = a * (1.0 + r.uniform(1e-6, 1.0));
    CHECK(alpha_utility(cfg, a) < alpha_utility(cfg, b));
  }
}

TEST_CASE("property: alpha = 0 reduces to the scalarized objective") {
  SeededRng r(42);
  for (int trial = 0; trial < 500; ++trial) {
    const PreferenceVector p(random_simplex(r));
    const Eigen::Vector3d g(r.uniform(0.01, 200.0), r.uniform(0.01, 200.0), r.uniform(0.01, 200.0));
    CHECK(fairness_objective(FairnessConfig{0.0, 1e-6}, p, g) ==
          doctest::Approx(scalarized_objective(p, g)).epsilon(1e-12));
  }
}

TEST_CASE("property: fairness objective invariant under joint permutation") {
  SeededRng r(43);
  for (int trial = 0; trial < 500; ++trial) {
    const FairnessConfig cfg{r.uniform(0.0, 4.0), 1e-6};
    const Eigen::Vector3d p = random_simplex(r);
    const Eigen::Vector3d g(r.uniform(0.0, 100.0), r.uniform(0.0, 100.0), r.uniform(0.0, 100.0));
    const Eigen::Vector3d pp(p(2), p(0), p(1)), gp(g(2), g(0), g(1));
    CHECK(fairness_objective(cfg, p, g) == doctest::Approx(fairness_objective(cfg, pp, gp)).epsilon(1e-12));
  }
}

TEST_CASE("jain examples") {
  CHECK(jains_index(Eigen::Vector3d::Constant(2.5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(jains_index(Eigen::Vector3d(1, 0, 0)) - 1.0 / 3.0) <= 1e-12);
  CHECK(std::abs(jains_index(Eigen::Vector3d(1, 2, 3)) - 6.0 / 7.0) <= 1e-12);
  CHECK(jains_index(Eigen::Vector3d::Zero()) == 1.0);
  CHECK_THROWS_AS(jains_index(Eigen::VectorXd()), DimensionError);
}

TEST_CASE("property: jain bounds, scale invariance and loop oracle") {
  SeededRng r(44);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = r.uniform_int(1, 8);
    Eigen::VectorXd t(n);
    std::vector<double> tv;
    for (Eigen::Index i = 0; i < n; ++i) {
      t(i) = r.uniform() < 0.2 ? 0.0 : r.uniform(0.0, 100.0);
      tv.push_back(t(i));
    }
    if (t.sum() == 0.0) t(0) = 1.0, tv[0] = 1.0;
    const double j = jains_index(t);
    CHECK(j >= 1.0 / static_cast<double>(n) - 1e-12);
    CHECK(j <= 1.0 + 1e-12);
    CHECK(j == doctest::Approx(jain_oracle(tv)).epsilon(1e-12));
    const double c = r.uniform(1e-3, 1e3);
    CHECK(jains_index((c * t).eval()) == doctest::Approx(j).epsilon(1e-12));
  }
}
