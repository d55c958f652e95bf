#pragma once

#include "qkr/reduction.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace qkr {

struct Tolerances {
  double residual = 1e-10;  // on |mu|^2 + |nu|^2
  double rank = 1e-6;       // relative singular-value cutoff
  double gap = 1e3;         // required accepted/rejected ratio
  int max_iters = 500;
  int max_restarts = 20;
};

struct RankReport {
  std::vector<double> singular_values;
  int rank = 0;
  double gap_ratio = 0.0;  // smallest accepted / largest rejected; +inf when nothing is rejected
  bool ambiguous = false;
};

RankReport rank_report(const MatX<double>& m, const Tolerances& tol = {});

// A map from parameters v to the real coordinates of a point.
// Homogeneous of degree one in the parameters flagged linear, so scaling them rescales the point.
class Parametrization {
 public:
  virtual ~Parametrization() = default;
  virtual int ambient_n() const = 0;
  virtual int dim() const = 0;
  virtual VecX<double> point(const VecX<double>& v) const = 0;
  virtual MatX<double> jacobian(const VecX<double>& v) const = 0;
  virtual bool is_linear(int) const { return true; }
  virtual bool admissible(const VecX<double>&) const { return true; }
  virtual VecX<double> random_start(std::mt19937_64& rng) const;
  virtual std::string name() const { return "custom"; }

  HPointd hpoint(const VecX<double>& v) const { return from_real(point(v)); }
  // Rescales the linear parameters so that |point| = 1.
  void normalize(VecX<double>& v) const;
};

// The whole ambient space.
class FullSpace : public Parametrization {
 public:
  explicit FullSpace(int n) : n_(n) {}
  int ambient_n() const override { return n_; }
  int dim() const override { return 4 * n_; }
  VecX<double> point(const VecX<double>& v) const override { return v; }
  MatX<double> jacobian(const VecX<double>&) const override { return MatX<double>::Identity(4 * n_, 4 * n_); }
  std::string name() const override { return "full"; }

 private:
  int n_;
};

struct ProjectionResult {
  HPointd point;
  VecX<double> params;
  double residual = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// One damped Gauss-Newton descent from v0; no restarts.
ProjectionResult descend(const ReductionConfig& cfg, const Parametrization& par, VecX<double> v0,
                         const Tolerances& tol = {});

// Restarts from seeded random starts until converged or tol.max_restarts is exhausted.
ProjectionResult constrained_project(const ReductionConfig& cfg, const Parametrization& par, const VecX<double>& start,
                                     std::uint64_t seed, const Tolerances& tol = {});

ProjectionResult project_to_N(const ReductionConfig& cfg, const HPointd& start, std::uint64_t seed,
                              const Tolerances& tol = {});

// Draws a uniformly random point of the unit sphere.
HPointd random_sphere_point(int n, std::mt19937_64& rng);

struct ConstraintRank {
  RankReport rank;
  int dim_N = 0;
};

// Rank of the (mu, nu) Jacobian restricted to the tangent space of the sphere.
ConstraintRank constraint_rank(const ReductionConfig& cfg, const HPointd& p, const Tolerances& tol = {});

RankReport orbit_rank(const ReductionConfig& cfg, const HPointd& p, bool twistor, const Tolerances& tol = {});

struct StratumDimension {
  int intersection_dim = 0;   // of the group saturation of (pattern & N), inside the sphere
  int pattern_tangent = 0;    // of (pattern & N & sphere) alone
  int orbit_rank = 0;
  int quotient_dim = 0;
  bool ambiguous = false;
};

StratumDimension stratum_dimension(const ReductionConfig& cfg, const Parametrization& par, const VecX<double>& v,
                                   bool twistor, const Tolerances& tol = {});

struct ProbeReport {
  int restarts = 0;
  double min_residual = 0.0;
  int converged_runs = 0;
  bool empty = false;  // min residual above 1e3 x tol.residual
  ProjectionResult best;
};

// Independent single descents from seeded random starts; threads do not change the result.
ProbeReport infeasibility_probe(const ReductionConfig& cfg, const Parametrization& par, int n_restarts,
                                std::uint64_t seed, const Tolerances& tol = {}, int threads = 1);

struct SamplePoint {
  ProjectionResult projection;
  int constraint_rank = 0;
  double gap_ratio = 0.0;
  bool rank_ambiguous = false;
  int orbit_rank_G = 0;        // torus x Sp(1)
  int orbit_rank_twistor = 0;  // with the extra U(1)
  double min_pair_norm2 = 0.0;
};

// Projects n seeded random sphere points onto N and measures each one.
// Point i depends only on (seed, i), so the thread count does not change the result.
std::vector<SamplePoint> sample_zero_set(const ReductionConfig& cfg, int n, std::uint64_t seed,
                                         const Tolerances& tol = {}, int threads = 1);

}  // namespace qkr
