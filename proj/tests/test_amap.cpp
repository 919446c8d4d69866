#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crossdiff/amap.hpp"

using namespace crossdiff;

namespace {

ModelSpec make_model(Vec d, Mat m, Vec s) {
  ModelSpec model;
  model.pressure.d = std::move(d);
  model.pressure.interaction = std::move(m);
  model.pressure.exponents = std::move(s);
  const int I = model.pressure.species();
  model.reaction.rho = Vec::Zero(I);
  model.reaction.c = Mat::Zero(I, I);
  model.reaction.alpha = Mat::Zero(I, I);
  return model;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("zero maps to zero") {
  ModelSpec m = make_model(vec2(1, 1), mat2(1, 1, 1, 1), vec2(1, 1));
  const Vec X = invert_A(m, Vec::Zero(2));
  CHECK(X.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("scalar quadratic inverse") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1));
  Vec W(1);
  W << 6.0;
  const Vec X = invert_A(m, W);
  CHECK(X[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("round trip over random interior states") {
  std::vector<ModelSpec> corpus;
  corpus.push_back(make_model(vec2(1, 1), mat2(1, 1, 1, 1), vec2(1, 1)));
  corpus.push_back(make_model(vec2(1, 2), mat2(0, 1, 2, 0), vec2(2, 0.5)));
  corpus.push_back(make_model(vec2(0.5, 3), mat2(2, 0.5, 1, 4), vec2(0.7, 1.3)));
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(1e-4, 10.0);
  for (const ModelSpec& m : corpus) {
    for (int t = 0; t < 1000; ++t) {
      const Vec X = vec2(unif(gen), unif(gen));
      const Vec back = invert_A(m, eval_A(m, X));
      CHECK((back - X).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
  }
}

TEST_CASE("support of the preimage equals the support of the target") {
  ModelSpec m = make_model(vec2(1, 2), mat2(1, 1, 1, 1), vec2(1, 0.5));
  Vec W = vec2(0.0, 3.0);
  const Vec X = invert_A(m, W);
  CHECK(X[0] == 0.0);
  CHECK(X[1] > 0.0);
  CHECK(eval_A(m, X)[1] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("negative targets are rejected") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1));
  Vec W(1);
  W << -1.0;
  CHECK_THROWS_AS(invert_A(m, W), DomainError);
}

TEST_CASE("scalar inversion is strictly increasing in the target") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Constant(1, 1.5));
  double prev = -1.0;
  for (double w = 0.1; w < 50.0; w *= 1.5) {
    Vec W(1);
    W << w;
    const double x = invert_A(m, W)[0];
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("preimages of a compact box stay in the predicted box") {
  ModelSpec m = make_model(vec2(1, 2), mat2(1, 0.5, 0.5, 1), vec2(1, 1));
  const double alpha = m.pressure.d.minCoeff();
  const double Wmax = 20.0;
  // x_i <= W_i / d_i <= Wmax/alpha =: M, and p_i <= C_i := sup over [0,M]^2.
  const double box = Wmax / alpha;
  Vec top = vec2(box, box);
  const Vec pC = eval_pressure(m, top);
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> unif(1e-3, Wmax);
  for (int t = 0; t < 300; ++t) {
    const Vec W = vec2(unif(gen), unif(gen));
    const Vec X = invert_A(m, W);
    for (int i = 0; i < 2; ++i) {
      CHECK(X[i] <= W[i] / m.pressure.d[i] + 1e-9);
      CHECK(X[i] >= W[i] / pC[i] - 1e-9);
    }
  }
}

TEST_CASE("identical targets give bit-identical preimages") {
  ModelSpec m = make_model(vec2(1, 2), mat2(0, 1, 2, 0), vec2(2, 0.5));
  const Vec W = vec2(3.7, 0.42);
  const Vec a = invert_A(m, W);
  const Vec b = invert_A(m, W);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
}

TEST_CASE("log-coordinate jacobian, scalar chain rule") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1));
  const Mat J = jacobian_logA(m, Vec::Zero(1));
  CHECK(J(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("log-coordinate jacobian of a decoupled model is the identity") {
  ModelSpec m = make_model(vec2(2, 3), Mat::Zero(2, 2), vec2(1, 1));
  const Mat J = jacobian_logA(m, vec2(0.3, -1.2));
  CHECK((J - Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("log-coordinate jacobian matches finite differences") {
  ModelSpec m = make_model(vec2(1, 2), mat2(1, 2, 3, 4), vec2(2, 0.5));
  auto phi = [&](const Vec& Y) {
    const Vec A = eval_A(m, Y.array().exp().matrix());
    return Vec(A.array().log().matrix());
  };
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const Vec Y = vec2(unif(gen), unif(gen));
    const Mat J = jacobian_logA(m, Y);
    Mat Jfd(2, 2);
    const double eps = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vec Yp = Y, Ym = Y;
      Yp[j] += eps;
      Ym[j] -= eps;
      Jfd.col(j) = (phi(Yp) - phi(Ym)) / (2 * eps);
    }
    CHECK((J - Jfd).norm() <= 1e-6 * (1.0 + J.norm()));
  }
}

TEST_CASE("log coordinates beyond the overflow guard are rejected") {
  ModelSpec m = make_model(Vec::Ones(1), Mat::Ones(1, 1), Vec::Ones(1));
  Vec Y(1);
  Y << 701.0;
  CHECK_THROWS_AS(jacobian_logA(m, Y), DomainError);
}
