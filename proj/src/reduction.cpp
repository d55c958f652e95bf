#include "qkr/reduction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkr {

const char* family_name(Family f) { return f == Family::Theta ? "theta" : "omega"; }

ReductionConfig ReductionConfig::theta(const ThetaMatrix& m) {
  validate_weights(m);
  ReductionConfig c;
  c.family = Family::Theta;
  c.weights = m;
  c.ambient_n = 8;
  c.torus_rank = 3;
  c.fixed_first_coordinate = false;
  c.pairs = {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
  return c;
}

ReductionConfig ReductionConfig::omega(const OmegaMatrix& m) {
  validate_weights(m);
  ReductionConfig c;
  c.family = Family::Omega;
  c.weights = m;
  c.ambient_n = 7;
  c.torus_rank = 2;
  c.fixed_first_coordinate = true;
  c.pairs = {{1, 2}, {3, 4}, {5, 6}};
  return c;
}

double ReductionConfig::block_angle(const std::vector<double>& torus, int alpha) const {
  double a = 0.0;
  for (int r = 0; r < torus_rank; ++r) a += torus.at(r) * static_cast<double>(weights(r, alpha));
  return a;
}

GroupElement GroupElement::identity(const ReductionConfig& cfg, bool twistor) {
  GroupElement g;
  g.torus.assign(cfg.torus_rank, 0.0);
  if (twistor) g.rho = cplx(1.0, 0.0);
  return g;
}

std::vector<GroupElement> non_effective_elements(const ReductionConfig& cfg) {
  GroupElement plus = GroupElement::identity(cfg, true);
  GroupElement minus = plus;
  minus.lambda = Quatd(-1, 0, 0, 0);
  minus.rho = cplx(-1.0, 0.0);
  return {plus, minus};
}

void check_dimension(const ReductionConfig& cfg, const HPointd& p) {
  if (p.n() != cfg.ambient_n)
    throw std::invalid_argument("point has " + std::to_string(p.n()) + " coordinates, expected " +
                                std::to_string(cfg.ambient_n));
}

namespace {

const std::array<Quatd, 3>& units() {
  static const std::array<Quatd, 3> u = {Quatd(0, 1, 0, 0), Quatd(0, 0, 1, 0), Quatd(0, 0, 0, 1)};
  return u;
}

Quatd add(const Quatd& a, const Quatd& b) { return Quatd(a.coeffs() + b.coeffs()); }
Quatd sub(const Quatd& a, const Quatd& b) { return Quatd(a.coeffs() - b.coeffs()); }
Quatd scale(double s, const Quatd& a) { return Quatd(s * a.coeffs()); }

// Symmetric bilinear form B with B(u, u) = moment(u), returned as 2 B(u, h).
struct Polar {
  std::array<Quatd, 3> mu;
  std::vector<Quatd> nu;
};

Polar polar(const ReductionConfig& cfg, const std::vector<Quatd>& u, const std::vector<Quatd>& h) {
  Polar out;
  for (int s = 0; s < 3; ++s) {
    Quatd acc(0, 0, 0, 0);
    for (std::size_t a = 0; a < u.size(); ++a)
      acc = add(acc, add(u[a].conjugate() * units()[s] * h[a], h[a].conjugate() * units()[s] * u[a]));
    out.mu[s] = acc;
  }
  out.nu.assign(cfg.torus_rank, Quatd(0, 0, 0, 0));
  for (int alpha = 0; alpha < cfg.pair_count(); ++alpha) {
    const auto [a, b] = cfg.pairs[alpha];
    const Quatd term = sub(add(u[a].conjugate() * h[b], h[a].conjugate() * u[b]),
                           add(u[b].conjugate() * h[a], h[b].conjugate() * u[a]));
    for (int r = 0; r < cfg.torus_rank; ++r)
      out.nu[r] = add(out.nu[r], scale(static_cast<double>(cfg.weights(r, alpha)), term));
  }
  return out;
}

}  // namespace

MomentValue moment(const ReductionConfig& cfg, const HPointd& p) {
  check_dimension(cfg, p);
  const auto u = to_quats(p);
  Polar pol = polar(cfg, u, u);
  MomentValue m;
  for (int s = 0; s < 3; ++s) m.mu[s] = scale(0.5, pol.mu[s]);
  for (auto& q : pol.nu) m.nu.push_back(scale(0.5, q));
  return m;
}

std::array<Quatd, 3> mu(const ReductionConfig& cfg, const HPointd& p) { return moment(cfg, p).mu; }
std::vector<Quatd> nu(const ReductionConfig& cfg, const HPointd& p) { return moment(cfg, p).nu; }

VecX<double> residual_vector(const ReductionConfig& cfg, const HPointd& p) {
  const MomentValue m = moment(cfg, p);
  VecX<double> r(cfg.residual_dim());
  for (int s = 0; s < 3; ++s) r.segment<3>(3 * s) = m.mu[s].vec();
  for (int k = 0; k < cfg.torus_rank; ++k) r.segment<3>(9 + 3 * k) = m.nu[k].vec();
  return r;
}

double residual_norm2(const ReductionConfig& cfg, const HPointd& p) { return residual_vector(cfg, p).squaredNorm(); }

MatX<double> residual_jacobian(const ReductionConfig& cfg, const HPointd& p) {
  check_dimension(cfg, p);
  const auto u = to_quats(p);
  MatX<double> j(cfg.residual_dim(), cfg.real_dim());
  std::vector<Quatd> h(u.size(), Quatd(0, 0, 0, 0));
  for (int a = 0; a < cfg.ambient_n; ++a) {
    for (int c = 0; c < 4; ++c) {
      h[a] = real_basis<double>(c);
      const Polar pol = polar(cfg, u, h);
      auto col = j.col(4 * a + c);
      for (int s = 0; s < 3; ++s) col.segment<3>(3 * s) = pol.mu[s].vec();
      for (int k = 0; k < cfg.torus_rank; ++k) col.segment<3>(9 + 3 * k) = pol.nu[k].vec();
    }
    h[a] = Quatd(0, 0, 0, 0);
  }
  return j;
}

HPointd act(const ReductionConfig& cfg, const GroupElement& g, const HPointd& p) {
  check_dimension(cfg, p);
  if (static_cast<int>(g.torus.size()) != cfg.torus_rank) throw std::invalid_argument("torus angle count mismatch");
  auto u = to_quats(p);
  const Quatd rho = g.rho ? from_complex(*g.rho) : Quatd::Identity();
  for (auto& q : u) q = g.lambda * q * rho;
  for (int alpha = 0; alpha < cfg.pair_count(); ++alpha) {
    const auto [a, b] = cfg.pairs[alpha];
    const double th = cfg.block_angle(g.torus, alpha);
    const double c = std::cos(th), s = std::sin(th);
    const Quatd ua = u[a], ub = u[b];
    u[a] = add(scale(c, ua), scale(s, ub));
    u[b] = add(scale(-s, ua), scale(c, ub));
  }
  return from_quats(u);
}

double fixed_point_residual(const ReductionConfig& cfg, const GroupElement& g, const HPointd& p) {
  const HPointd q = act(cfg, g, p);
  return std::sqrt((q.z - p.z).squaredNorm() + (q.w - p.w).squaredNorm());
}

MatX<double> orbit_fields(const ReductionConfig& cfg, const HPointd& p, bool twistor) {
  check_dimension(cfg, p);
  const auto u = to_quats(p);
  const int cols = cfg.torus_rank + 3 + (twistor ? 1 : 0);
  MatX<double> f = MatX<double>::Zero(cfg.real_dim(), cols);
  auto put = [&](int col, int slot, const Quatd& q) {
    const HPointd one = from_quats(std::vector<Quatd>{q});
    f.block<4, 1>(4 * slot, col) = to_real(one);
  };
  for (int r = 0; r < cfg.torus_rank; ++r)
    for (int alpha = 0; alpha < cfg.pair_count(); ++alpha) {
      const auto [a, b] = cfg.pairs[alpha];
      const double w = static_cast<double>(cfg.weights(r, alpha));
      put(r, a, scale(w, u[b]));
      put(r, b, scale(-w, u[a]));
    }
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < cfg.ambient_n; ++a) put(cfg.torus_rank + s, a, units()[s] * u[a]);
  if (twistor)
    for (int a = 0; a < cfg.ambient_n; ++a) put(cfg.torus_rank + 3, a, u[a] * units()[0]);
  return f;
}

}  // namespace qkr
