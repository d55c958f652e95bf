#pragma once

#include "qkr/quat.hpp"
#include "qkr/weights.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace qkr {

enum class Family { Theta, Omega };

const char* family_name(Family f);

struct ReductionConfig {
  Family family = Family::Theta;
  IntMatrix weights;  // torus_rank x pairs
  int ambient_n = 8;
  int torus_rank = 3;
  bool fixed_first_coordinate = false;
  std::vector<std::pair<int, int>> pairs;  // 0-based slots rotated by each block

  static ReductionConfig theta(const ThetaMatrix& m);
  static ReductionConfig omega(const OmegaMatrix& m);

  int pair_count() const { return static_cast<int>(pairs.size()); }
  int real_dim() const { return 4 * ambient_n; }
  int residual_dim() const { return 9 + 3 * torus_rank; }
  // Rotation angle of block alpha for torus angles t.
  double block_angle(const std::vector<double>& torus, int alpha) const;
};

struct GroupElement {
  std::vector<double> torus;  // radians
  Quatd lambda = Quatd::Identity();
  std::optional<cplx> rho;  // present for the twistor group

  static GroupElement identity(const ReductionConfig& cfg, bool twistor);
};

// The central pair (lambda, rho) = +-(1, 1) acting trivially on the twistor level.
std::vector<GroupElement> non_effective_elements(const ReductionConfig& cfg);

struct MomentValue {
  std::array<Quatd, 3> mu;  // sum conj(u) sigma u for sigma = i, j, k
  std::vector<Quatd> nu;    // one per torus generator
};

std::array<Quatd, 3> mu(const ReductionConfig& cfg, const HPointd& p);
std::vector<Quatd> nu(const ReductionConfig& cfg, const HPointd& p);
MomentValue moment(const ReductionConfig& cfg, const HPointd& p);

// Imaginary parts of (mu_i, mu_j, mu_k, nu_1, ...), 3 reals each.
VecX<double> residual_vector(const ReductionConfig& cfg, const HPointd& p);
double residual_norm2(const ReductionConfig& cfg, const HPointd& p);

// Derivative of residual_vector with respect to the real coordinates (see to_real).
MatX<double> residual_jacobian(const ReductionConfig& cfg, const HPointd& p);

HPointd act(const ReductionConfig& cfg, const GroupElement& g, const HPointd& p);
double fixed_point_residual(const ReductionConfig& cfg, const GroupElement& g, const HPointd& p);

// Infinitesimal action fields as columns in real coordinates:
// torus generators, then left i, j, k, then right i when twistor is set.
MatX<double> orbit_fields(const ReductionConfig& cfg, const HPointd& p, bool twistor);

void check_dimension(const ReductionConfig& cfg, const HPointd& p);

}  // namespace qkr
