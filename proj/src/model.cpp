#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>

namespace crossdiff {

namespace {

void require_nonneg(const Vec& X, const char* who) {
  for (Index i = 0; i < X.size(); ++i) {
    if (!(X[i] >= 0.0)) {
      throw DomainError(std::string(who) + ": component " +
                        std::to_string(i) + " is negative or NaN");
    }
  }
}

void require_pos(const Vec& X, const char* who) {
  for (Index i = 0; i < X.size(); ++i) {
    if (!(X[i] > 0.0)) {
      throw DomainError(std::string(who) + ": component " +
                        std::to_string(i) + " is not strictly positive");
    }
  }
}

}  // namespace

ScalarFn power_fn(double s) {
  return {[s](double z) { return std::pow(z, s); },
          [s](double z) { return s * std::pow(z, s - 1.0); }};
}

double PressureLaw::q(int j, double z) const {
  return std::pow(z, exponents[j]);
}

double PressureLaw::dq(int j, double z) const {
  const double s = exponents[j];
  return s * std::pow(z, s - 1.0);
}

void PressureLaw::validate() const {
  const int I = species();
  if (I < 1) throw DomainError("PressureLaw: need at least one species");
  if (interaction.rows() != I || interaction.cols() != I ||
      exponents.size() != I) {
    throw DomainError("PressureLaw: inconsistent sizes");
  }
  for (int i = 0; i < I; ++i) {
    if (!(d[i] > 0.0)) throw DomainError("PressureLaw: d_i must be > 0");
    if (!(exponents[i] > 0.0))
      throw DomainError("PressureLaw: exponents must be > 0");
    for (int j = 0; j < I; ++j) {
      if (!(interaction(i, j) >= 0.0))
        throw DomainError("PressureLaw: m_ij must be >= 0");
    }
  }
}

bool ReactionLaw::is_zero() const {
  return rho.isZero(0.0) && c.isZero(0.0);
}

double ReactionLaw::rho_max() const {
  return std::max(0.0, rho.maxCoeff());
}

void ReactionLaw::validate() const {
  const int I = species();
  if (I < 1) throw DomainError("ReactionLaw: need at least one species");
  if (c.rows() != I || c.cols() != I || alpha.rows() != I ||
      alpha.cols() != I) {
    throw DomainError("ReactionLaw: inconsistent sizes");
  }
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < I; ++j) {
      if (!(c(i, j) >= 0.0)) throw DomainError("ReactionLaw: c_ij must be >= 0");
      if (!(alpha(i, j) >= 0.0 && alpha(i, j) < 1.0))
        throw DomainError("ReactionLaw: need 0 <= alpha_ij < 1");
    }
  }
}

double entropy_h(double s, double z) {
  if (z < 0.0) throw DomainError("entropy_h: negative argument");
  if (s == 1.0) {
    if (z == 0.0) return 1.0;
    return z * std::log(z) - z + 1.0;
  }
  // h(1) = h'(1) = 0, h'' = z^{s-2}; continuous at z = 0 with value 1/s.
  return (std::pow(z, s) - s * z + s - 1.0) / (s * (s - 1.0));
}

double entropy_dh(double s, double z) {
  if (!(z > 0.0)) throw DomainError("entropy_dh: need z > 0");
  if (s == 1.0) return std::log(z);
  return (std::pow(z, s - 1.0) - 1.0) / (s - 1.0);
}

double entropy_ddh(double s, double z) {
  if (!(z > 0.0)) throw DomainError("entropy_ddh: need z > 0");
  return std::pow(z, s - 2.0);
}

double EntropySpec::h(int i, double z) const { return entropy_h(s[i], z); }
double EntropySpec::dh(int i, double z) const { return entropy_dh(s[i], z); }
double EntropySpec::ddh(int i, double z) const { return entropy_ddh(s[i], z); }

double EntropySpec::f_squared(int i, double x) const {
  return s[i] * d[i] * std::pow(x, s[i] - 2.0);
}

void EntropySpec::validate() const {
  const int I = species();
  if (s.size() != I || d.size() != I)
    throw DomainError("EntropySpec: inconsistent sizes");
  for (int i = 0; i < I; ++i) {
    if (!(pi[i] > 0.0)) throw DomainError("EntropySpec: pi_i must be > 0");
    if (!(s[i] > 0.0)) throw DomainError("EntropySpec: s_i must be > 0");
    if (!(d[i] > 0.0)) throw DomainError("EntropySpec: d_i must be > 0");
  }
}

void ModelSpec::validate() const {
  pressure.validate();
  reaction.validate();
  if (reaction.species() != pressure.species())
    throw DomainError("ModelSpec: pressure/reaction species mismatch");
  if (entropy) {
    entropy->validate();
    if (entropy->species() != pressure.species())
      throw DomainError("ModelSpec: entropy species mismatch");
  }
}

Vec eval_pressure(const ModelSpec& model, const Vec& X) {
  require_nonneg(X, "eval_pressure");
  const int I = model.species();
  const PressureLaw& p = model.pressure;
  Vec qx(I);
  for (int j = 0; j < I; ++j) qx[j] = p.q(j, X[j]);
  return p.d + p.interaction * qx;
}

Vec eval_A(const ModelSpec& model, const Vec& X) {
  return eval_pressure(model, X).cwiseProduct(X);
}

Mat eval_DA(const ModelSpec& model, const Vec& X) {
  require_pos(X, "eval_DA");
  const int I = model.species();
  const PressureLaw& p = model.pressure;
  const Vec press = eval_pressure(model, X);
  Mat J(I, I);
  for (int j = 0; j < I; ++j) {
    const double dq = p.dq(j, X[j]);
    for (int i = 0; i < I; ++i) J(i, j) = p.interaction(i, j) * X[i] * dq;
  }
  J.diagonal() += press;
  return J;
}

Vec eval_reaction(const ModelSpec& model, const Vec& X) {
  require_nonneg(X, "eval_reaction");
  const int I = model.species();
  const ReactionLaw& r = model.reaction;
  Vec out(I);
  for (int i = 0; i < I; ++i) {
    double ri = r.rho[i];
    for (int j = 0; j < I; ++j) {
      if (r.c(i, j) != 0.0) ri -= r.c(i, j) * std::pow(X[j], r.alpha(i, j));
    }
    out[i] = ri * X[i];
  }
  return out;
}

Mat eval_DR(const ModelSpec& model, const Vec& X) {
  require_nonneg(X, "eval_DR");
  const int I = model.species();
  const ReactionLaw& r = model.reaction;
  constexpr double kSingularGuard = 1e-13;
  Mat J = Mat::Zero(I, I);
  for (int i = 0; i < I; ++i) {
    double ri = r.rho[i];
    for (int j = 0; j < I; ++j) {
      if (r.c(i, j) == 0.0) continue;
      ri -= r.c(i, j) * std::pow(X[j], r.alpha(i, j));
      // d r_i / d x_j, singular at x_j = 0 for fractional exponents
      if (X[j] >= kSingularGuard) {
        J(i, j) -= X[i] * r.c(i, j) * r.alpha(i, j) *
                   std::pow(X[j], r.alpha(i, j) - 1.0);
      }
    }
    J(i, i) += ri;
  }
  return J;
}

double eval_entropy(const EntropySpec& spec, const Vec& X) {
  require_nonneg(X, "eval_entropy");
  double H = 0.0;
  for (int i = 0; i < spec.species(); ++i) H += spec.pi[i] * spec.h(i, X[i]);
  return H;
}

Vec eval_grad_entropy(const EntropySpec& spec, const Vec& X) {
  require_pos(X, "eval_grad_entropy");
  Vec g(spec.species());
  for (int i = 0; i < spec.species(); ++i)
    g[i] = spec.pi[i] * spec.dh(i, X[i]);
  return g;
}

Vec eval_hess_entropy(const EntropySpec& spec, const Vec& X) {
  require_pos(X, "eval_hess_entropy");
  Vec h(spec.species());
  for (int i = 0; i < spec.species(); ++i)
    h[i] = spec.pi[i] * spec.ddh(i, X[i]);
  return h;
}

namespace {

// One-dimensional suprema driving the reaction bound, taken on a
// log-spaced grid over [1e-8, 1e8] with the large-z asymptotes folded in.
struct SpeciesBounds {
  double neg;   // sup_z max(0, -z h'(z))
  double lin;   // sup_z z h'(z) / (1 + h(z))
  double mass;  // sup_z z / (1 + h(z))
};

SpeciesBounds species_bounds(double s) {
  constexpr int kGridPoints = 20001;
  const double lo = std::log(1e-8), hi = std::log(1e8);
  SpeciesBounds b{0.0, 0.0, 0.0};
  for (int k = 0; k < kGridPoints; ++k) {
    const double z = std::exp(lo + (hi - lo) * k / (kGridPoints - 1));
    const double zdh = z * entropy_dh(s, z);
    const double denom = 1.0 + entropy_h(s, z);
    b.neg = std::max(b.neg, -zdh);
    b.lin = std::max(b.lin, zdh / denom);
    b.mass = std::max(b.mass, z / denom);
  }
  // Large-z limits: z h'/(1+h) -> max(s,1), z/(1+h) -> max(1-s, 0).
  b.lin = std::max(b.lin, std::max(s, 1.0));
  if (s < 1.0) b.mass = std::max(b.mass, 1.0 - s);
  const double safety = 1.0 + 1e-6;
  b.neg *= safety;
  b.lin *= safety;
  b.mass *= safety;
  return b;
}

}  // namespace

double entropy_reaction_bound(const ModelSpec& model) {
  model.validate();
  const ReactionLaw& r = model.reaction;
  if (r.is_zero()) return 0.0;
  if (!model.entropy) {
    throw StructureError("entropy_reaction_bound: model has no entropy spec");
  }
  const EntropySpec& ent = *model.entropy;
  const int I = model.species();

  std::vector<SpeciesBounds> sb(I);
  for (int i = 0; i < I; ++i) sb[i] = species_bounds(ent.s[i]);

  // grad H . R <= constant + coef * H, assembled from
  //   z h_i'(z) >= -neg_i,  z h_i'(z) <= lin_i (1 + h_i),
  //   x^alpha <= 1 + x,     x <= mass_i (1 + h_i).
  double constant = 0.0, coef = 0.0;
  for (int i = 0; i < I; ++i) {
    const double pi_i = ent.pi[i];
    const double rho_term = std::abs(r.rho[i]) * (sb[i].lin + sb[i].neg);
    constant += pi_i * rho_term;
    coef += rho_term;
    for (int j = 0; j < I; ++j) {
      const double cij = r.c(i, j);
      if (cij == 0.0) continue;
      constant += pi_i * sb[i].neg * cij * (1.0 + sb[j].mass);
      coef += pi_i * sb[i].neg * cij * sb[j].mass / ent.pi[j];
    }
  }
  return std::max(constant, coef);
}

}  // namespace crossdiff
