#include <cmath>
#include <random>

#include "doctest.h"
#include "mchjm/spline_ops.hpp"
#include "oracles.hpp"

using namespace mchjm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd samples(const BucketGrid& g, double (*f)(double)) {
  VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v(static_cast<Eigen::Index>(i)) = f(g[i]);
  return v;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(BucketGrid({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(BucketGrid({1.0, 1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(BucketGrid({0.0, 1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(BucketGrid({2.0, 1.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(SplineOperators(BucketGrid({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("tenor labels") {
  CHECK(parse_tenor_label("1m") == doctest::Approx(1.0 / 12).epsilon(1e-15));
  CHECK(parse_tenor_label("30y") == 30.0);
  CHECK(parse_tenor_label("1y6m") == doctest::Approx(1.5));
  CHECK(parse_tenor_label("7d") == doctest::Approx(7.0 / 365));
  CHECK_THROWS_AS(parse_tenor_label("3q"), std::invalid_argument);
  CHECK(format_tenor_label(0.25) == "3m");
  CHECK(format_tenor_label(10.0) == "10y");
  const std::vector<std::string> labels{"1m", "2m", "3m", "6m", "9m", "1y", "5y", "10y", "15y", "20y", "25y", "30y"};
  const BucketGrid g = BucketGrid::from_labels(labels);
  REQUIRE(g.size() == 12);
  CHECK(g.front() == doctest::Approx(1.0 / 12));
  CHECK(g.back() == 30.0);
  CHECK(g.label(5) == "1y");
}

TEST_CASE("derivative of constants and linears") {
  const SplineOperators ops(BucketGrid({1.0, 2.0, 3.0}));
  const VectorXd flat = VectorXd::Constant(3, 5.0);
  CHECK((ops.derivative() * flat).cwiseAbs().maxCoeff() < 1e-14);
  const VectorXd lin = (VectorXd(3) << 1, 2, 3).finished();
  CHECK(((ops.derivative() * lin).array() - 1.0).abs().maxCoeff() < 1e-14);

  const SplineOperators ops4(BucketGrid({1.0, 2.0, 3.0, 4.0}));
  const VectorXd lin4 = (VectorXd(4) << 1, 2, 3, 4).finished();
  CHECK((ops4.quadratic() * lin4).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((ops4.cubic() * lin4).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("derivative matches secant-slope closed forms on x^2") {
  const BucketGrid g({0.25, 1.0, 5.0, 10.0});
  const VectorXd v = samples(g, [](double x) { return x * x; });
  const VectorXd got = build_derivative_matrix(g) * v;
  const VectorXd want = oracle::closed_form_slopes(g, v);
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(std::abs(got(i) - want(i)) <= 1e-12 * std::abs(want(i)));
  // Three-point slopes are exact on quadratics.
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(got(static_cast<Eigen::Index>(i)) == doctest::Approx(2 * g[i]).epsilon(1e-12));
}

TEST_CASE("structure of the operators") {
  std::mt19937_64 rng(11);
  const BucketGrid g = oracle::random_grid(rng, 9);
  const SplineOperators ops(g);
  const auto k = static_cast<Eigen::Index>(g.size());
  const MatrixXd& m = ops.derivative();
  for (Eigen::Index i = 1; i + 1 < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::abs(i - j) > 1) CHECK(m(i, j) == 0.0);
    }
  }
  for (Eigen::Index j = 3; j < k; ++j) CHECK(m(0, j) == 0.0);
  for (Eigen::Index j = 0; j + 3 < k; ++j) CHECK(m(k - 1, j) == 0.0);
  CHECK(ops.cubic().row(0).isZero());
  CHECK(ops.cubic().row(k - 2).isZero());
  CHECK(ops.quadratic().row(k - 1).isZero());
  const MatrixXd& p = ops.integral();
  CHECK(p(0, 0) == g[0]);
  CHECK(p.row(0).tail(k - 1).isZero());
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 2; j < k; ++j) CHECK(p(i, j) == 0.0);
  }
  const auto [mp, mpp] = build_c_d_matrices(g);
  CHECK(mp == ops.quadratic());
  CHECK(mpp == ops.cubic());
  CHECK(build_integral_matrix(g) == p);
}

TEST_CASE("spline interpolates nodes and is continuous") {
  const BucketGrid g({0.5, 1.0, 2.0, 4.0, 8.0});
  const SplineOperators ops(g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  VectorXd v(5);
  for (auto& x : v) x = n(rng);
  const oracle::Piecewise pw(ops, v);
  for (std::size_t h = 0; h + 1 < g.size(); ++h) {
    CHECK(pw(g[h]) == doctest::Approx(v(static_cast<Eigen::Index>(h))).epsilon(1e-12));
    CHECK(std::abs(pw.right_end(h) - v(static_cast<Eigen::Index>(h + 1))) < 1e-12);
  }
  // Value weights agree with the assembled polynomial off the nodes.
  for (double x : {0.1, 0.7, 1.5, 3.3, 7.9, 8.0}) CHECK(ops.value_weights(x).dot(v) == doctest::Approx(pw(x)).epsilon(1e-12));
  CHECK_THROWS(ops.value_weights(8.5));
}

TEST_CASE("integral operator") {
  const SplineOperators ops(BucketGrid({1.0, 2.0, 3.0}));
  const VectorXd flat = VectorXd::Constant(3, 0.7);
  const VectorXd got = ops.integral() * flat;
  CHECK(got(0) == doctest::Approx(0.7));
  CHECK(got(1) == doctest::Approx(1.4));
  CHECK(got(2) == doctest::Approx(2.1));

  const BucketGrid g({0.25, 0.5, 1.0, 2.0, 5.0});
  const SplineOperators sops(g);
  const VectorXd v = samples(g, [](double x) { return std::sin(x); });
  const oracle::Piecewise pw(sops, v);
  const VectorXd pv = sops.integral() * v;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double want = pw.integral(g[i]);
    CHECK(std::abs(pv(static_cast<Eigen::Index>(i)) - want) <= 1e-10 * std::abs(want));
  }
}

TEST_CASE("cross integral") {
  const BucketGrid f({1.0, 2.0, 3.0});
  const MatrixXd c = build_cross_integral_matrix(f, BucketGrid({1.5, 2.0, 3.0}));
  const VectorXd flat = VectorXd::Constant(3, 2.0);
  CHECK((c * flat)(1) == doctest::Approx(4.0));
  CHECK((c * flat)(2) == doctest::Approx(6.0));
  CHECK(build_cross_integral_matrix(f, f).isApprox(build_integral_matrix(f), 1e-15));

  const BucketGrid gf({0.25, 0.5, 1.0, 5.0, 10.0});
  const BucketGrid gd({0.5, 1.0, 5.0});
  const SplineOperators ops(gf);
  const VectorXd v = samples(gf, [](double x) { return std::exp(-x); });
  const oracle::Piecewise pw(ops, v);
  const VectorXd got = build_cross_integral_matrix(gf, gd) * v;
  for (std::size_t i = 0; i < gd.size(); ++i) {
    CHECK(std::abs(got(static_cast<Eigen::Index>(i)) - pw.integral(gd[i])) <= 1e-10 * pw.integral(gd[i]));
  }
}

TEST_CASE("operators are linear") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const SplineOperators ops(oracle::random_grid(rng, 7));
  VectorXd a(7), b(7);
  for (auto& x : a) x = n(rng);
  for (auto& x : b) x = n(rng);
  const double al = 1.7, be = -0.4;
  for (const MatrixXd* op : {&ops.derivative(), &ops.quadratic(), &ops.cubic(), &ops.integral()}) {
    const VectorXd lhs = *op * (al * a + be * b);
    const VectorXd rhs = al * (*op * a) + be * (*op * b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}
