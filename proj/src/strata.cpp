#include "qkr/strata.hpp"

#include "exact.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qkr {

using detail::cpp_rational;

const char* level_name(Level l) { return l == Level::Twistor ? "twistor" : "sasakian"; }

const char* kind_name(StratumKind k) {
  switch (k) {
    case StratumKind::V3Sphere: return "V3Sphere";
    case StratumKind::TripleSingle: return "TripleSingle";
    case StratumKind::PairPair: return "PairPair";
    case StratumKind::SubPoint: return "SubPoint";
    case StratumKind::SingleTriple: return "SingleTriple";
    case StratumKind::SasakianPattern: return "SasakianPattern";
    case StratumKind::OmegaPoint: return "OmegaPoint";
    default: return "Custom";
  }
}

namespace {

std::string digits(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += std::to_string(x);
  return s;
}

std::string paren_signs(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::string(s[i] < 0 ? "-" : "+");
  return out + ")";
}

int pair_count(Family f) { return f == Family::Theta ? 4 : 3; }

}  // namespace

std::string StratumDescriptor::label() const {
  switch (kind) {
    case StratumKind::V3Sphere: return "V3" + paren_signs(signs);
    case StratumKind::TripleSingle:
    case StratumKind::OmegaPoint:
      return std::string(signs.at(0) < 0 ? "-" : "+") + "S^{" + digits(upper) + "}_{" + digits(lower) + "}";
    case StratumKind::PairPair: return "S^{" + digits(upper) + "}_{" + digits(lower) + "}";
    case StratumKind::SubPoint:
    case StratumKind::SingleTriple: return paren_signs(signs) + "S^{" + digits(upper) + "}_{" + digits(lower) + "}";
    case StratumKind::SasakianPattern: return "S'^{" + digits(upper) + "}_{" + digits(lower) + "}";
    default: return "custom";
  }
}

bool canonical_less(const StratumDescriptor& a, const StratumDescriptor& b) {
  return std::make_tuple(std::string(kind_name(a.kind)), a.upper, a.lower, a.signs) <
         std::make_tuple(std::string(kind_name(b.kind)), b.upper, b.lower, b.signs);
}

StratumDescriptor v3_descriptor(Family f, const std::vector<int>& signs) {
  if (static_cast<int>(signs.size()) != pair_count(f)) throw std::invalid_argument("V3 sign tuple has wrong length");
  StratumDescriptor d;
  d.family = f;
  d.kind = StratumKind::V3Sphere;
  d.signs = signs;
  for (int a = 0; a < pair_count(f); ++a) {
    d.upper.push_back(a + 1);
    d.pairs.push_back({PairKind::ZW, signs[a]});
  }
  return d;
}

StratumDescriptor triple_single(int delta, int sign) {
  StratumDescriptor d;
  d.kind = StratumKind::TripleSingle;
  d.signs = {sign};
  d.lower = {delta};
  for (int a = 1; a <= 4; ++a) {
    if (a == delta) {
      d.pairs.push_back({PairKind::WS, sign});
    } else {
      d.upper.push_back(a);
      d.pairs.push_back({PairKind::Z, 1});
    }
  }
  return d;
}

StratumDescriptor pair_pair(int a, int b, int c, int e) {
  StratumDescriptor d;
  d.kind = StratumKind::PairPair;
  d.upper = {a, b};
  d.lower = {c, e};
  d.pairs.resize(4);
  for (int x : d.upper) d.pairs[x - 1] = {PairKind::Z, 1};
  for (int x : d.lower) d.pairs[x - 1] = {PairKind::W, 1};
  return d;
}

StratumDescriptor sub_point(int a, int b, int c, int e, int sc, int se) {
  StratumDescriptor d;
  d.kind = StratumKind::SubPoint;
  d.upper = {a, b};
  d.lower = {c, e};
  d.signs = {sc, se};
  d.pairs.resize(4);
  for (int x : d.upper) d.pairs[x - 1] = {PairKind::Z, 1};
  d.pairs[c - 1] = {PairKind::WS, sc};
  d.pairs[e - 1] = {PairKind::WS, se};
  return d;
}

StratumDescriptor single_triple(int alpha, const std::vector<int>& signs) {
  if (signs.size() != 3) throw std::invalid_argument("single_triple needs three signs");
  StratumDescriptor d;
  d.kind = StratumKind::SingleTriple;
  d.upper = {alpha};
  d.signs = signs;
  d.pairs.resize(4);
  d.pairs[alpha - 1] = {PairKind::Z, 1};
  for (int a = 1, k = 0; a <= 4; ++a)
    if (a != alpha) {
      d.lower.push_back(a);
      d.pairs[a - 1] = {PairKind::WS, signs[k++]};
    }
  return d;
}

StratumDescriptor omega_point(int a, int b, int c, int sign) {
  StratumDescriptor d;
  d.family = Family::Omega;
  d.kind = StratumKind::OmegaPoint;
  d.upper = {a, b};
  d.lower = {c};
  d.signs = {sign};
  d.pairs.resize(3);
  d.pairs[a - 1] = {PairKind::Z, 1};
  d.pairs[b - 1] = {PairKind::Z, 1};
  d.pairs[c - 1] = {PairKind::WS, sign};
  return d;
}

StratumDescriptor sasakian_pattern(Family f, const std::vector<int>& e) {
  if (static_cast<int>(e.size()) != pair_count(f)) throw std::invalid_argument("pattern length mismatch");
  StratumDescriptor d;
  d.family = f;
  d.kind = StratumKind::SasakianPattern;
  d.level = Level::Sasakian;
  d.signs = e;
  for (int a = 0; a < pair_count(f); ++a) {
    (e[a] > 0 ? d.upper : d.lower).push_back(a + 1);
    d.pairs.push_back({e[a] > 0 ? PairKind::WP : PairKind::WPP, 1});
  }
  return d;
}

StratumDescriptor full_space(Family f) {
  StratumDescriptor d;
  d.family = f;
  d.pairs.assign(pair_count(f), {PairKind::Full, 1});
  d.u1_free = f == Family::Omega;
  return d;
}

// ---------------------------------------------------------------------------

namespace {

int linear_size(PairKind k) {
  switch (k) {
    case PairKind::ZS:
    case PairKind::WS: return 2;
    case PairKind::Full: return 8;
    default: return 4;
  }
}

const cplx I(0.0, 1.0);

}  // namespace

PatternParametrization::PatternParametrization(const ReductionConfig& cfg, const StratumDescriptor& d)
    : cfg_(cfg), desc_(d) {
  if (d.family != cfg.family) throw std::invalid_argument("stratum family does not match configuration");
  if (static_cast<int>(d.pairs.size()) != cfg.pair_count()) throw std::invalid_argument("pattern pair count mismatch");
  if (d.u1_free && !cfg.fixed_first_coordinate) throw std::invalid_argument("u1 slot only exists for Omega");
  linear_dim_ = d.u1_free ? 4 : 0;
  for (const auto& pp : d.pairs) {
    linear_dim_ += linear_size(pp.kind);
    angled_ = angled_ || pp.kind == PairKind::WP || pp.kind == PairKind::WPP;
  }
  bool nonzero = linear_dim_ > 0;
  if (!nonzero) throw std::invalid_argument("pattern forces every coordinate to vanish");
}

VecX<double> PatternParametrization::point(const VecX<double>& v) const {
  if (v.size() != dim()) throw std::invalid_argument("parameter vector has wrong length");
  HPointd p(cfg_.ambient_n);
  int k = 0;
  auto take = [&]() {
    const cplx c(v(k), v(k + 1));
    k += 2;
    return c;
  };
  if (desc_.u1_free) {
    p.z(0) = take();
    p.w(0) = take();
  }
  const double sphi = std::sin(phi(v)), cphi = std::cos(phi(v));
  const cplx rot = std::polar(1.0, delta(v));
  for (int alpha = 0; alpha < cfg_.pair_count(); ++alpha) {
    const auto [a, b] = cfg_.pairs[alpha];
    const PairPattern pp = desc_.pairs[alpha];
    const double s = pp.sign;
    switch (pp.kind) {
      case PairKind::Z:
        p.z(a) = take();
        p.z(b) = take();
        break;
      case PairKind::W:
        p.w(a) = take();
        p.w(b) = take();
        break;
      case PairKind::ZS:
        p.z(a) = take();
        p.z(b) = s * I * p.z(a);
        break;
      case PairKind::WS:
        p.w(a) = take();
        p.w(b) = s * I * p.w(a);
        break;
      case PairKind::ZW:
        p.z(a) = take();
        p.w(a) = take();
        p.z(b) = s * I * p.z(a);
        p.w(b) = s * I * p.w(a);
        break;
      case PairKind::WP:
      case PairKind::WPP: {
        // z = sin(phi) t keeps the map regular where sin(phi) -> 0.
        // The overall factor e on w'' places both kinds on the same axis of lambda.
        const double e = pp.kind == PairKind::WP ? 1.0 : -1.0;
        const cplx ta = take(), tb = take();
        p.z(a) = sphi * ta;
        p.z(b) = sphi * tb;
        p.w(a) = e * rot * (-tb + e * I * ta * cphi);
        p.w(b) = e * rot * (ta + e * I * tb * cphi);
        break;
      }
      case PairKind::Full:
        p.z(a) = take();
        p.z(b) = take();
        p.w(a) = take();
        p.w(b) = take();
        break;
    }
  }
  return to_real(p);
}

MatX<double> PatternParametrization::jacobian(const VecX<double>& v) const {
  MatX<double> j(4 * cfg_.ambient_n, dim());
  VecX<double> e = v;
  e.head(linear_dim_).setZero();
  for (int k = 0; k < linear_dim_; ++k) {
    e(k) = 1.0;
    j.col(k) = point(e);
    e(k) = 0.0;
  }
  if (angled_) {
    const double h = 1e-6;
    for (int k = linear_dim_; k < dim(); ++k) {
      VecX<double> vp = v, vm = v;
      vp(k) += h;
      vm(k) -= h;
      j.col(k) = (point(vp) - point(vm)) / (2.0 * h);
    }
  }
  return j;
}

bool PatternParametrization::admissible(const VecX<double>& v) const {
  return !angled_ || std::abs(std::sin(phi(v))) > 1e-6;
}

VecX<double> PatternParametrization::random_start(std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  VecX<double> v(dim());
  for (int k = 0; k < linear_dim_; ++k) v(k) = g(rng);
  if (angled_) {
    std::uniform_real_distribution<double> ph(0.1, std::numbers::pi - 0.1), de(0.0, 2.0 * std::numbers::pi);
    v(linear_dim_) = ph(rng);
    v(linear_dim_ + 1) = de(rng);
  }
  return v;
}

// ---------------------------------------------------------------------------

IntMatrix congruence_matrix(const ReductionConfig& cfg, const StratumDescriptor& d) {
  const int r = cfg.torus_rank;
  const bool twistor = d.level == Level::Twistor;
  const int vars = r + (twistor ? 2 : 1);
  std::vector<Eigen::Matrix<i64, 1, Eigen::Dynamic>> rows;
  auto row = [&](int alpha, i64 sc, int a_coef, int b_coef) {
    Eigen::Matrix<i64, 1, Eigen::Dynamic> x = Eigen::Matrix<i64, 1, Eigen::Dynamic>::Zero(vars);
    for (int k = 0; k < r; ++k) x(k) = alpha < 0 ? 0 : sc * cfg.weights(k, alpha);
    x(r) = a_coef;
    if (twistor) x(r + 1) = b_coef;
    rows.push_back(x);
  };
  if (d.u1_free) {
    if (!twistor) throw std::invalid_argument("u1 slot is not supported at the Sasakian level");
    row(-1, 0, 1, 0);
    row(-1, 0, 0, 1);
  }
  for (int alpha = 0; alpha < cfg.pair_count(); ++alpha) {
    const PairPattern pp = d.pairs[alpha];
    const i64 s = pp.sign;
    if (twistor) {
      switch (pp.kind) {
        case PairKind::Z: row(alpha, 1, 1, 0), row(alpha, -1, 1, 0); break;
        case PairKind::W: row(alpha, 1, 0, 1), row(alpha, -1, 0, 1); break;
        case PairKind::ZS: row(alpha, s, 1, 0); break;
        case PairKind::WS: row(alpha, s, 0, 1); break;
        case PairKind::ZW: row(alpha, s, 1, 0), row(alpha, s, 0, 1); break;
        case PairKind::Full:
          row(alpha, 1, 1, 0), row(alpha, -1, 1, 0), row(alpha, 1, 0, 1), row(alpha, -1, 0, 1);
          break;
        default: throw std::invalid_argument("Sasakian pair kind in a twistor pattern");
      }
    } else {
      switch (pp.kind) {
        case PairKind::WP: row(alpha, 1, 1, 0); break;
        case PairKind::WPP: row(alpha, 1, -1, 0); break;
        default: throw std::invalid_argument("twistor pair kind in a Sasakian pattern");
      }
    }
  }
  IntMatrix k(rows.size(), vars);
  for (std::size_t i = 0; i < rows.size(); ++i) k.row(i) = rows[i];
  return k;
}

GroupElement lift_element(const ReductionConfig& cfg, const StratumDescriptor& d, const TorusPoint& x, double phi,
                          double delta) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto val = [](const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); };
  GroupElement g;
  for (int k = 0; k < cfg.torus_rank; ++k) g.torus.push_back(two_pi * val(x.at(k)));
  if (d.level == Level::Twistor) {
    const double a = val(x.at(cfg.torus_rank)), b = val(x.at(cfg.torus_rank + 1));
    g.lambda = from_complex(std::polar(1.0, std::numbers::pi * (a - b)));
    g.rho = std::polar(1.0, std::numbers::pi * (a + b));
  } else {
    g.lambda = sp1_from_angles<double>({two_pi * val(x.at(cfg.torus_rank)), phi, delta});
  }
  return g;
}

bool acts_trivially(const ReductionConfig& cfg, const StratumDescriptor&, const TorusPoint& x) {
  std::vector<Rational> theta;
  for (int alpha = 0; alpha < cfg.pair_count(); ++alpha) {
    Rational t = 0;
    for (int k = 0; k < cfg.torus_rank; ++k) t += Rational(cfg.weights(k, alpha)) * x.at(k);
    theta.push_back(t);
  }
  for (int k = cfg.torus_rank; k < static_cast<int>(x.size()); ++k) theta.push_back(x[k]);
  const auto reduced = reduce_mod1(theta);
  for (const Rational c : {Rational(0), Rational(1, 2)}) {
    if (cfg.fixed_first_coordinate && c != Rational(0)) continue;
    if (std::all_of(reduced.begin(), reduced.end(), [&](const Rational& t) { return t == c; })) return true;
  }
  return false;
}

EffectiveIsotropy effective_isotropy(const ReductionConfig& cfg, const StratumDescriptor& d) {
  EffectiveIsotropy out;
  out.group = isotropy_group(congruence_matrix(cfg, d));
  if (out.group.order > 1000000) throw std::runtime_error("isotropy group too large to enumerate");
  out.trivial = 0;
  for (const auto& e : out.group.elements())
    if (acts_trivially(cfg, d, e)) ++out.trivial;
  out.effective = out.group.order / std::max<i64>(1, out.trivial);
  return out;
}

IsotropyCheck stratum_isotropy_verify(const ReductionConfig& cfg, const StratumDescriptor& d,
                                      const PatternParametrization& par, const VecX<double>& v) {
  IsotropyCheck chk;
  chk.isotropy = effective_isotropy(cfg, d);
  const HPointd p = par.hpoint(v);
  std::vector<TorusPoint> test = chk.isotropy.group.generators;
  if (chk.isotropy.group.order <= 64) test = chk.isotropy.group.elements();
  for (const auto& x : test) {
    const GroupElement g = lift_element(cfg, d, x, par.phi(v), par.delta(v));
    chk.max_residual = std::max(chk.max_residual, fixed_point_residual(cfg, g, p));
    ++chk.checked;
  }
  chk.passed = chk.max_residual < 1e-8;
  return chk;
}

// ---------------------------------------------------------------------------

namespace {

SignSolution solve_signs(const IntMatrix& w, const std::vector<int>& e) {
  const int r = static_cast<int>(w.rows()), n = static_cast<int>(w.cols());
  std::vector<std::vector<cpp_rational>> a(n, std::vector<cpp_rational>(n));
  std::vector<cpp_rational> b(n, 0), x;
  for (int i = 0; i < r; ++i)
    for (int c = 0; c < n; ++c) a[i][c] = e[c] * w(i, c);
  for (int c = 0; c < n; ++c) a[r][c] = 1;
  b[r] = cpp_rational(1, 2);
  SignSolution s;
  s.signs = e;
  if (!detail::solve_exact(a, b, x)) {
    s.singular = true;
    return s;
  }
  s.positive = true;
  for (const auto& q : x) {
    s.solution.push_back(detail::to_rational(q));
    s.positive = s.positive && q > 0;
  }
  return s;
}

std::vector<SignSolution> all_sign_systems(const IntMatrix& w) {
  const int n = static_cast<int>(w.cols());
  std::vector<SignSolution> out;
  for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
    std::vector<int> e(n, 1);
    for (int k = 1; k < n; ++k) e[k] = (mask >> (n - 1 - k)) & 1 ? -1 : 1;
    out.push_back(solve_signs(w, e));
  }
  return out;
}

SignSolution unique_positive(const std::vector<SignSolution>& all) {
  const SignSolution* found = nullptr;
  int count = 0;
  for (const auto& s : all)
    if (s.positive) {
      found = &s;
      ++count;
    }
  if (count != 1)
    throw SignPatternError(std::to_string(count) + " positive sign patterns (expected exactly one)");
  return *found;
}

}  // namespace

std::vector<SignSolution> v3_sign_systems(const ThetaMatrix& m) { return all_sign_systems(m); }
std::vector<SignSolution> omega_sign_systems(const OmegaMatrix& m) { return all_sign_systems(m); }

SignSolution v3_positive_sign_pattern(const ThetaMatrix& m) {
  const auto adm = admissible_theta(m);
  if (!adm.admissible) throw std::invalid_argument("inadmissible weight matrix (" + adm.witness + ")");
  return unique_positive(v3_sign_systems(m));
}

SignSolution omega_positive_sign_pattern(const OmegaMatrix& m) {
  const auto adm = admissible_omega(m);
  if (!adm.admissible) throw std::invalid_argument("inadmissible weight matrix (" + adm.witness + ")");
  return unique_positive(omega_sign_systems(m));
}

// ---------------------------------------------------------------------------

namespace {

Eigen::Matrix<i64, 3, 1> col3(const ThetaMatrix& m, int alpha) { return m.col(alpha - 1); }

i64 det_rows(const Eigen::Matrix<i64, 3, 1>& a, const Eigen::Matrix<i64, 3, 1>& b, const Eigen::Matrix<i64, 3, 1>& c) {
  Eigen::Matrix<i64, 3, 3> r;
  r.row(0) = a.transpose();
  r.row(1) = b.transpose();
  r.row(2) = c.transpose();
  return det3(r);
}

Eigen::Matrix<i64, 3, 1> lin(const Eigen::Matrix<i64, 3, 1>& a, i64 s, const Eigen::Matrix<i64, 3, 1>& b) {
  Eigen::Matrix<i64, 3, 1> r;
  for (int i = 0; i < 3; ++i) r(i) = checked_add(a(i), checked_mul(s, b(i)));
  return r;
}

StratumReport make_report(const ReductionConfig& cfg, const StratumDescriptor& d, i64 det, i64 factor, int qdim) {
  StratumReport rep;
  rep.descriptor = d;
  rep.determinant = det;
  rep.raw_factor = factor;
  rep.predicted_quotient_dim = qdim;
  if (det == 1 || det == -1) rep.prune_reason = "unit determinant";
  try {
    const EffectiveIsotropy iso = effective_isotropy(cfg, d);
    rep.congruence_order = iso.group.order;
    rep.isotropy_effective = iso.effective;
  } catch (const ContinuousStabilizer&) {
    // Not locally free along the pattern, so the pattern cannot meet N.
    rep.congruence_order = 0;
    rep.isotropy_effective = 0;
    rep.prune_reason = "continuous stabilizer";
  }
  rep.pruned = !rep.prune_reason.empty();
  return rep;
}

void finish(Catalog& c) {
  std::stable_sort(c.entries.begin(), c.entries.end(),
                   [](const StratumReport& a, const StratumReport& b) { return canonical_less(a.descriptor, b.descriptor); });
}

}  // namespace

int Catalog::count(StratumKind k, bool surviving_only) const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(), [&](const StratumReport& r) {
    return r.descriptor.kind == k && (!surviving_only || !r.pruned);
  }));
}

ReductionConfig config_for(const Catalog& c) {
  if (c.family == Family::Theta) return ReductionConfig::theta(c.weights);
  return ReductionConfig::omega(c.weights);
}

Catalog enumerate_twistor_strata_theta(const ThetaMatrix& m) {
  const SignSolution v3 = v3_positive_sign_pattern(m);
  const ReductionConfig cfg = ReductionConfig::theta(m);
  const ThetaMinors d = minors_theta(m);
  const ThetaBoxes boxes = boxes_theta(m);
  Catalog c;
  c.family = Family::Theta;
  c.weights = m;

  const auto& e = v3.signs;
  c.entries.push_back(make_report(cfg, v3_descriptor(Family::Theta, e), boxes.at(-e[1], -e[2], -e[3]), 1, 2));

  const std::array<i64, 4> triple = {d.d234, d.d134, d.d124, d.d123};  // indexed by the excluded pair
  for (int delta = 1; delta <= 4; ++delta)
    for (int s : {1, -1}) c.entries.push_back(make_report(cfg, triple_single(delta, s), triple[delta - 1], 4, 2));

  const int parts[3][4] = {{1, 2, 3, 4}, {1, 3, 2, 4}, {1, 4, 2, 3}};
  for (const auto& p : parts) {
    const i64 det = det_rows(lin(col3(m, p[0]), -1, col3(m, p[1])), lin(col3(m, p[2]), -1, col3(m, p[3])), col3(m, p[0]));
    c.entries.push_back(make_report(cfg, pair_pair(p[0], p[1], p[2], p[3]), det, 4, 2));
  }
  for (const auto& p : parts)
    for (int orient = 0; orient < 2; ++orient) {
      const int a = orient ? p[2] : p[0], b = orient ? p[3] : p[1];
      const int g = orient ? p[0] : p[2], h = orient ? p[1] : p[3];
      for (int sg : {1, -1})
        for (int sh : {1, -1}) {
          const i64 det =
              det_rows(lin(col3(m, a), -1, col3(m, b)), col3(m, a), lin(col3(m, g), -sg * sh, col3(m, h)));
          c.entries.push_back(make_report(cfg, sub_point(a, b, g, h, sg, sh), det, 4, 0));
        }
    }
  c.raw_patterns = static_cast<int>(c.entries.size());
  finish(c);
  return c;
}

Catalog enumerate_sasakian_strata_theta(const ThetaMatrix& m) {
  const auto adm = admissible_theta(m);
  if (!adm.admissible) throw std::invalid_argument("inadmissible weight matrix (" + adm.witness + ")");
  const ReductionConfig cfg = ReductionConfig::theta(m);
  const ThetaBoxes boxes = boxes_theta(m);
  Catalog c;
  c.family = Family::Theta;
  c.level = Level::Sasakian;
  c.weights = m;
  // Exchanging w' and w'' on every pair is the reparametrization phi -> pi - phi,
  // so each class has a representative with w' on the first pair.
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> e(4);
    for (int k = 0; k < 4; ++k) e[k] = (mask >> (3 - k)) & 1 ? -1 : 1;
    ++c.raw_patterns;
    if (e[0] < 0) continue;
    c.entries.push_back(
        make_report(cfg, sasakian_pattern(Family::Theta, e), boxes.at(-e[0] * e[1], -e[0] * e[2], -e[0] * e[3]), 1, 0));
  }
  finish(c);
  return c;
}

Catalog enumerate_twistor_strata_omega(const OmegaMatrix& m) {
  const SignSolution v3 = omega_positive_sign_pattern(m);
  const ReductionConfig cfg = ReductionConfig::omega(m);
  const OmegaMinors d = minors_omega(m);
  const OmegaBoxes boxes = boxes_omega(m);
  Catalog c;
  c.family = Family::Omega;
  c.weights = m;
  const auto& e = v3.signs;
  c.entries.push_back(make_report(cfg, v3_descriptor(Family::Omega, e), boxes.at(-e[1], -e[2]), 1, 0));
  const std::array<std::array<int, 3>, 3> pts = {{{1, 2, 3}, {1, 3, 2}, {2, 3, 1}}};
  const std::array<i64, 3> minor = {d.d12, d.d13, d.d23};
  for (int k = 0; k < 3; ++k)
    for (int s : {1, -1})
      c.entries.push_back(make_report(cfg, omega_point(pts[k][0], pts[k][1], pts[k][2], s), minor[k], 1, 0));
  c.raw_patterns = static_cast<int>(c.entries.size());
  finish(c);
  return c;
}

Catalog enumerate_sasakian_strata_omega(const OmegaMatrix& m) {
  const auto adm = admissible_omega(m);
  if (!adm.admissible) throw std::invalid_argument("inadmissible weight matrix (" + adm.witness + ")");
  const ReductionConfig cfg = ReductionConfig::omega(m);
  const OmegaBoxes boxes = boxes_omega(m);
  Catalog c;
  c.family = Family::Omega;
  c.level = Level::Sasakian;
  c.weights = m;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<int> e(3);
    for (int k = 0; k < 3; ++k) e[k] = (mask >> (2 - k)) & 1 ? -1 : 1;
    ++c.raw_patterns;
    if (e[0] < 0) continue;
    c.entries.push_back(
        make_report(cfg, sasakian_pattern(Family::Omega, e), boxes.at(-e[0] * e[1], -e[0] * e[2]), 1, 0));
  }
  finish(c);
  return c;
}

std::vector<StratumDescriptor> rejected_v3_families(const ReductionConfig& cfg) {
  std::vector<SignSolution> all;
  SignSolution chosen;
  if (cfg.family == Family::Theta) {
    const ThetaMatrix m = cfg.weights;
    all = v3_sign_systems(m);
    chosen = v3_positive_sign_pattern(m);
  } else {
    const OmegaMatrix m = cfg.weights;
    all = omega_sign_systems(m);
    chosen = omega_positive_sign_pattern(m);
  }
  std::vector<StratumDescriptor> out;
  for (const auto& s : all)
    if (s.signs != chosen.signs) out.push_back(v3_descriptor(cfg.family, s.signs));
  return out;
}

NumericSummary analyze_stratum(const ReductionConfig& cfg, const StratumDescriptor& d, const NumericOptions& opt) {
  const PatternParametrization par(cfg, d);
  const ProbeReport probe = infeasibility_probe(cfg, par, opt.restarts, opt.seed, opt.tol, opt.threads);
  NumericSummary s;
  s.restarts = probe.restarts;
  s.min_residual = probe.min_residual;
  s.realized = probe.best.converged;
  if (!s.realized) return s;
  const StratumDimension dim = stratum_dimension(cfg, par, probe.best.params, d.level == Level::Twistor, opt.tol);
  s.dim = dim.intersection_dim;
  s.orbit_rank = dim.orbit_rank;
  s.quotient_dim = dim.quotient_dim;
  s.ambiguous = dim.ambiguous;
  s.isotropy = stratum_isotropy_verify(cfg, d, par, probe.best.params);
  return s;
}

void attach_numerics(Catalog& c, const NumericOptions& opt) {
  const ReductionConfig cfg = config_for(c);
  for (auto& e : c.entries) e.numeric = analyze_stratum(cfg, e.descriptor, opt);
}

namespace {

std::map<std::string, int> signature(const Catalog& c, bool surviving_only) {
  std::map<std::string, int> sig;
  for (const auto& e : c.entries) {
    if (surviving_only && e.pruned) continue;
    ++sig[e.predicted_quotient_dim == 2 ? "sphere" : "point"];
  }
  return sig;
}

}  // namespace

bool catalogs_distinct(const Catalog& a, const Catalog& b, bool surviving_only) {
  return signature(a, surviving_only) != signature(b, surviving_only);
}

FamilyComparison compare_families(const ThetaMatrix& theta, const OmegaMatrix& omega) {
  FamilyComparison f;
  f.theta_twistor = enumerate_twistor_strata_theta(theta);
  f.theta_sasakian = enumerate_sasakian_strata_theta(theta);
  f.omega_twistor = enumerate_twistor_strata_omega(omega);
  f.omega_sasakian = enumerate_sasakian_strata_omega(omega);
  f.distinct_before_pruning = catalogs_distinct(f.theta_twistor, f.omega_twistor, false) ||
                              f.theta_sasakian.entries.size() != f.omega_sasakian.entries.size();
  f.distinct_after_pruning = catalogs_distinct(f.theta_twistor, f.omega_twistor, true) ||
                             f.theta_sasakian.count(StratumKind::SasakianPattern, true) !=
                                 f.omega_sasakian.count(StratumKind::SasakianPattern, true);
  f.structurally_distinct = f.distinct_before_pruning || f.distinct_after_pruning;
  return f;
}

cplx fixed_point_block_det(const ReductionConfig& cfg, const GroupElement& g, int pair_index) {
  const double th = cfg.block_angle(g.torus, pair_index);
  const cplx rho = g.rho.value_or(cplx(1.0, 0.0));
  const cplx eps = split_z(g.lambda), sigma = split_w(g.lambda);
  // lambda (z + j w) rho = (eps z - conj(sigma) w) rho + j (sigma z + conj(eps) w) rho
  Eigen::Matrix2cd lam;
  lam << eps * rho, -std::conj(sigma) * rho, sigma * rho, std::conj(eps) * rho;
  Eigen::Matrix2cd a;
  a << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
  // Basis (z_a, z_b, w_a, w_b): the operator is lam (x) A.
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = lam(i, j) * a;
  return (m - Eigen::Matrix4cd::Identity()).determinant();
}

}  // namespace qkr
