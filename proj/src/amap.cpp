#include "crossdiff/amap.hpp"

#include <algorithm>
#include <cmath>

namespace crossdiff {

namespace {

// Pressure at a point that may sit on the boundary of the orthant.
Vec pressure_closed(const ModelSpec& model, const Vec& X) {
  const int I = model.species();
  const PressureLaw& p = model.pressure;
  Vec qx(I);
  for (int j = 0; j < I; ++j) qx[j] = p.q(j, X[j]);
  return p.d + p.interaction * qx;
}

}  // namespace

Mat jacobian_logA(const ModelSpec& model, const Vec& Y) {
  for (Index i = 0; i < Y.size(); ++i) {
    if (!(std::abs(Y[i]) <= 700.0))
      throw DomainError("jacobian_logA: component out of [-700, 700]");
  }
  const Vec X = Y.array().exp().matrix();
  const Vec A = eval_A(model, X);
  const Mat DA = eval_DA(model, X);
  return A.cwiseInverse().asDiagonal() * DA * X.asDiagonal();
}

Vec invert_A(const ModelSpec& model, const Vec& W,
             const InversionSettings& settings) {
  const int I = model.species();
  if (W.size() != I) throw DomainError("invert_A: size mismatch");
  for (int i = 0; i < I; ++i) {
    if (!(W[i] >= 0.0)) throw DomainError("invert_A: negative component");
  }

  std::vector<int> pos;  // stratum: indices with W_i > 0
  pos.reserve(I);
  for (int i = 0; i < I; ++i) {
    if (W[i] > 0.0) pos.push_back(i);
  }
  Vec X = Vec::Zero(I);
  if (pos.empty()) return X;

  const int P = static_cast<int>(pos.size());
  const double target = settings.tol * (1.0 + W.lpNorm<Eigen::Infinity>());

  // log coordinates on the stratum, started from the uncoupled guess
  Vec Y(P);
  for (int a = 0; a < P; ++a) {
    const int i = pos[a];
    Y[a] = std::clamp(std::log(W[i] / model.pressure.d[i]), -700.0, 700.0);
  }

  auto unpack = [&](const Vec& y, Vec& x) {
    x.setZero();
    for (int a = 0; a < P; ++a) x[pos[a]] = std::exp(y[a]);
  };
  auto log_residual = [&](const Vec& y, Vec& x) {
    unpack(y, x);
    const Vec press = pressure_closed(model, x);
    Vec F(P);
    for (int a = 0; a < P; ++a) {
      const int i = pos[a];
      F[a] = std::log(press[i] * x[i]) - std::log(W[i]);
    }
    return F;
  };

  Vec F = log_residual(Y, X);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  Mat J(P, P);
  Vec Xtrial = Vec::Zero(I);

  for (int iter = 0; iter < settings.max_iters; ++iter) {
    // residual check in the original coordinates
    const Vec press = pressure_closed(model, X);
    double res = 0.0;
    for (int i = 0; i < I; ++i)
      res = std::max(res, std::abs(press[i] * X[i] - W[i]));
    if (res <= target) return X;

    // Jacobian of Y -> ln A(exp Y) restricted to the stratum
    for (int a = 0; a < P; ++a) {
      const int i = pos[a];
      const double Ai = press[i] * X[i];
      for (int b = 0; b < P; ++b) {
        const int j = pos[b];
        double DAij = model.pressure.interaction(i, j) * X[i] *
                      model.pressure.dq(j, X[j]);
        if (i == j) DAij += press[i];
        J(a, b) = DAij * X[j] / Ai;
      }
    }
    const Vec delta = J.partialPivLu().solve(-F);

    double lambda = settings.damping;
    constexpr double kLambdaFloor = 1.0 / (1 << 20);
    while (true) {
      Vec Ytrial = (Y + lambda * delta).cwiseMin(700.0).cwiseMax(-700.0);
      Vec Ftrial = log_residual(Ytrial, Xtrial);
      const double ftrial = Ftrial.lpNorm<Eigen::Infinity>();
      if (ftrial < fnorm || lambda <= kLambdaFloor) {
        Y = Ytrial;
        F = std::move(Ftrial);
        fnorm = ftrial;
        X = Xtrial;
        break;
      }
      lambda *= 0.5;
    }
  }

  const Vec press = pressure_closed(model, X);
  double res = 0.0;
  for (int i = 0; i < I; ++i)
    res = std::max(res, std::abs(press[i] * X[i] - W[i]));
  if (res <= target) return X;
  throw ConvergenceError("invert_A: no convergence after " +
                             std::to_string(settings.max_iters) + " iterations",
                         res);
}

}  // namespace crossdiff
