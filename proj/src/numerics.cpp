#include "qkr/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace qkr {

RankReport rank_report(const MatX<double>& m, const Tolerances& tol) {
  RankReport rep;
  if (m.size() == 0) return rep;
  Eigen::JacobiSVD<MatX<double>> svd(m);
  const auto& sv = svd.singularValues();
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double top = sv.size() ? sv(0) : 0.0;
  if (top <= 0.0) {
    rep.gap_ratio = std::numeric_limits<double>::infinity();
    return rep;
  }
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol.rank * top) ++rep.rank;
  if (rep.rank == sv.size()) {
    rep.gap_ratio = std::numeric_limits<double>::infinity();
  } else {
    const double rejected = sv(rep.rank);
    rep.gap_ratio = rejected > 0.0 ? sv(rep.rank - 1) / rejected : std::numeric_limits<double>::infinity();
  }
  rep.ambiguous = rep.gap_ratio < tol.gap;
  return rep;
}

VecX<double> Parametrization::random_start(std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  VecX<double> v(dim());
  for (int k = 0; k < dim(); ++k) v(k) = g(rng);
  return v;
}

void Parametrization::normalize(VecX<double>& v) const {
  const double n = point(v).norm();
  if (n == 0.0) throw std::invalid_argument("pattern point vanishes identically");
  for (int k = 0; k < dim(); ++k)
    if (is_linear(k)) v(k) /= n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

HPointd random_sphere_point(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  VecX<double> x(4 * n);
  for (int k = 0; k < 4 * n; ++k) x(k) = g(rng);
  return from_real<double>(x / x.norm());
}

namespace {

double cost_at(const ReductionConfig& cfg, const Parametrization& par, const VecX<double>& v) {
  return residual_norm2(cfg, par.hpoint(v));
}

}  // namespace

ProjectionResult descend(const ReductionConfig& cfg, const Parametrization& par, VecX<double> v,
                         const Tolerances& tol) {
  if (par.ambient_n() != cfg.ambient_n) throw std::invalid_argument("pattern and configuration disagree on n");
  par.normalize(v);
  ProjectionResult res;
  double cost = cost_at(cfg, par, v);
  double damping = 1e-4;

  if (cost >= tol.residual) {
    for (int it = 0; it < tol.max_iters && cost > 1e-26; ++it) {
      const VecX<double> x = par.point(v);
      const HPointd p = from_real(x);
      const MatX<double> dp = par.jacobian(v);
      MatX<double> a(cfg.residual_dim() + 1, par.dim());
      a.topRows(cfg.residual_dim()) = residual_jacobian(cfg, p) * dp;
      a.bottomRows(1) = 2.0 * x.transpose() * dp;
      VecX<double> b = VecX<double>::Zero(cfg.residual_dim() + 1);
      b.head(cfg.residual_dim()) = -residual_vector(cfg, p);

      const MatX<double> ata = a.transpose() * a;
      const VecX<double> atb = a.transpose() * b;
      const double scale = 1.0 + ata.diagonal().maxCoeff();
      res.iterations = it + 1;

      bool accepted = false;
      VecX<double> step;
      while (damping < 1e10) {
        MatX<double> lhs = ata;
        lhs.diagonal().array() += damping * scale;
        step = lhs.ldlt().solve(atb);
        VecX<double> trial = v + step;
        if (par.admissible(trial)) {
          par.normalize(trial);
          const double c = cost_at(cfg, par, trial);
          if (c < cost) {
            v = trial;
            cost = c;
            damping = std::max(damping / 3.0, 1e-15);
            accepted = true;
            break;
          }
        }
        damping *= 10.0;
      }
      if (!accepted || step.norm() < 1e-15 * (1.0 + v.norm())) break;
    }
  }

  res.params = v;
  res.point = par.hpoint(v);
  res.residual = cost;
  res.converged = cost < tol.residual && std::abs(res.point.norm() - 1.0) < 1e-12 && par.admissible(v);
  return res;
}

ProjectionResult constrained_project(const ReductionConfig& cfg, const Parametrization& par, const VecX<double>& start,
                                     std::uint64_t seed, const Tolerances& tol) {
  ProjectionResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < std::max(1, tol.max_restarts); ++k) {
    VecX<double> v0;
    if (k == 0 && start.size() == par.dim() && start.norm() > 0.0) {
      v0 = start;
    } else {
      std::mt19937_64 rng(derive_seed(seed, k));
      v0 = par.random_start(rng);
    }
    ProjectionResult r = descend(cfg, par, v0, tol);
    r.restarts = k;
    if (r.residual < best.residual) best = r;
    if (r.converged) return r;
  }
  return best;
}

ProjectionResult project_to_N(const ReductionConfig& cfg, const HPointd& start, std::uint64_t seed,
                              const Tolerances& tol) {
  check_dimension(cfg, start);
  if (start.squaredNorm() == 0.0) throw std::invalid_argument("project_to_N: start point is zero");
  return constrained_project(cfg, FullSpace(cfg.ambient_n), to_real(start), seed, tol);
}

namespace {

void require_on_N(const ReductionConfig& cfg, const HPointd& p, const Tolerances& tol) {
  const double r = residual_norm2(cfg, p) / std::pow(p.squaredNorm(), 2);
  if (!(r < 1e3 * tol.residual)) throw std::invalid_argument("point is not on N (residual " + std::to_string(r) + ")");
}

}  // namespace

ConstraintRank constraint_rank(const ReductionConfig& cfg, const HPointd& p, const Tolerances& tol) {
  require_on_N(cfg, p, tol);
  const VecX<double> x = to_real(p).normalized();
  const MatX<double> proj = MatX<double>::Identity(x.size(), x.size()) - x * x.transpose();
  ConstraintRank out;
  out.rank = rank_report(residual_jacobian(cfg, p) * proj, tol);
  out.dim_N = (cfg.real_dim() - 1) - out.rank.rank;
  return out;
}

RankReport orbit_rank(const ReductionConfig& cfg, const HPointd& p, bool twistor, const Tolerances& tol) {
  require_on_N(cfg, p, tol);
  return rank_report(orbit_fields(cfg, p, twistor), tol);
}

StratumDimension stratum_dimension(const ReductionConfig& cfg, const Parametrization& par, const VecX<double>& v,
                                   bool twistor, const Tolerances& tol) {
  const VecX<double> x = par.point(v);
  const HPointd p = from_real(x);
  require_on_N(cfg, p, tol);
  const MatX<double> dp = par.jacobian(v);
  MatX<double> a(cfg.residual_dim() + 1, par.dim());
  a.topRows(cfg.residual_dim()) = residual_jacobian(cfg, p) * dp;
  a.bottomRows(1) = 2.0 * x.transpose() * dp;

  StratumDimension out;
  Eigen::JacobiSVD<MatX<double>> svd(a, Eigen::ComputeFullV);
  const RankReport ar = rank_report(a, tol);
  const MatX<double> kernel = svd.matrixV().rightCols(par.dim() - ar.rank);
  const MatX<double> tangent = dp * kernel;
  const MatX<double> orbit = orbit_fields(cfg, p, twistor);

  const RankReport tr = rank_report(tangent, tol);
  const RankReport orr = rank_report(orbit, tol);
  MatX<double> both(tangent.rows(), tangent.cols() + orbit.cols());
  both << tangent, orbit;
  const RankReport br = rank_report(both, tol);

  out.pattern_tangent = tr.rank;
  out.orbit_rank = orr.rank;
  out.intersection_dim = br.rank;
  out.quotient_dim = br.rank - orr.rank;
  out.ambiguous = ar.ambiguous || tr.ambiguous || orr.ambiguous || br.ambiguous;
  return out;
}

namespace {

template <typename F> void run_indexed(int n, int threads, F&& fn) {
  auto work = [&](int begin, int stride) {
    for (int i = begin; i < n; i += stride) fn(i);
  };
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    work(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  for (auto& th : pool) th.join();
}

}  // namespace

ProbeReport infeasibility_probe(const ReductionConfig& cfg, const Parametrization& par, int n_restarts,
                                std::uint64_t seed, const Tolerances& tol, int threads) {
  std::vector<ProjectionResult> runs(std::max(0, n_restarts));
  run_indexed(n_restarts, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    runs[i] = descend(cfg, par, par.random_start(rng), tol);
    runs[i].restarts = i;
  });

  ProbeReport rep;
  rep.restarts = n_restarts;
  rep.min_residual = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.converged) ++rep.converged_runs;
    if (r.residual < rep.min_residual) {
      rep.min_residual = r.residual;
      rep.best = r;
    }
  }
  rep.empty = rep.min_residual > 1e3 * tol.residual;
  return rep;
}

std::vector<SamplePoint> sample_zero_set(const ReductionConfig& cfg, int n, std::uint64_t seed, const Tolerances& tol,
                                         int threads) {
  if (n < 0) throw std::invalid_argument("sample_zero_set: negative sample count");
  std::vector<SamplePoint> out(n);
  run_indexed(n, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(i)));
    SamplePoint& s = out[i];
    s.projection = project_to_N(cfg, random_sphere_point(cfg.ambient_n, rng), derive_seed(seed, 2 * i + 1), tol);
    if (!s.projection.converged) return;
    const HPointd& p = s.projection.point;
    const ConstraintRank cr = constraint_rank(cfg, p, tol);
    s.constraint_rank = cr.rank.rank;
    s.gap_ratio = cr.rank.gap_ratio;
    s.rank_ambiguous = cr.rank.ambiguous;
    s.orbit_rank_G = orbit_rank(cfg, p, false, tol).rank;
    s.orbit_rank_twistor = orbit_rank(cfg, p, true, tol).rank;
    s.min_pair_norm2 = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : cfg.pairs)
      s.min_pair_norm2 = std::min(s.min_pair_norm2, std::norm(p.z(a)) + std::norm(p.w(a)) + std::norm(p.z(b)) + std::norm(p.w(b)));
  });
  return out;
}

}  // namespace qkr
