#pragma once

#include "qkr/numerics.hpp"
#include "qkr/reduction.hpp"
#include "qkr/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qkr {

enum class Level { Twistor, Sasakian };

enum class StratumKind { V3Sphere, TripleSingle, PairPair, SubPoint, SingleTriple, SasakianPattern, OmegaPoint, Custom };

// Per quaternionic pair (u_a, u_b):
//   Z   w = 0                      W   z = 0
//   ZS  w = 0, z_b = s i z_a       WS  z = 0, w_b = s i w_a
//   ZW  u_b = s u_a i              Full unconstrained
//   WP / WPP  w given by z and the angles (phi, delta); fixed by theta_alpha = -psi / +psi
//             where lambda = exp(psi n(phi, delta)).
enum class PairKind { Z, W, ZS, WS, ZW, WP, WPP, Full };

struct PairPattern {
  PairKind kind = PairKind::Full;
  int sign = 1;
  bool operator==(const PairPattern&) const = default;
};

const char* level_name(Level l);
const char* kind_name(StratumKind k);

struct StratumDescriptor {
  Family family = Family::Theta;
  StratumKind kind = StratumKind::Custom;
  Level level = Level::Twistor;
  std::vector<int> upper;  // 1-based pairs carrying z-blocks (w' for Sasakian patterns)
  std::vector<int> lower;  // 1-based pairs carrying w-blocks (w'' for Sasakian patterns)
  std::vector<int> signs;
  std::vector<PairPattern> pairs;
  bool u1_free = false;  // Omega only: the unpaired first coordinate

  std::string label() const;
  bool operator==(const StratumDescriptor&) const = default;
};

bool canonical_less(const StratumDescriptor& a, const StratumDescriptor& b);

StratumDescriptor v3_descriptor(Family f, const std::vector<int>& signs);
StratumDescriptor triple_single(int delta, int sign);
StratumDescriptor pair_pair(int a, int b, int c, int d);
StratumDescriptor sub_point(int a, int b, int c, int d, int sc, int sd);  // Z on {a,b}, WS on {c,d}
// Z on pair alpha, WS with the given signs on the other three pairs in ascending order.
StratumDescriptor single_triple(int alpha, const std::vector<int>& signs);
StratumDescriptor omega_point(int a, int b, int c, int sign);
StratumDescriptor sasakian_pattern(Family f, const std::vector<int>& e);  // +1 -> w', -1 -> w''
StratumDescriptor full_space(Family f);

// The pattern as a parametrized subset of the ambient space.
class PatternParametrization : public Parametrization {
 public:
  PatternParametrization(const ReductionConfig& cfg, const StratumDescriptor& d);
  int ambient_n() const override { return cfg_.ambient_n; }
  int dim() const override { return linear_dim_ + (angled_ ? 2 : 0); }
  VecX<double> point(const VecX<double>& v) const override;
  MatX<double> jacobian(const VecX<double>& v) const override;
  bool is_linear(int k) const override { return k < linear_dim_; }
  bool admissible(const VecX<double>& v) const override;
  VecX<double> random_start(std::mt19937_64& rng) const override;
  std::string name() const override { return desc_.label(); }

  bool has_angles() const { return angled_; }
  double phi(const VecX<double>& v) const { return angled_ ? v(linear_dim_) : 0.0; }
  double delta(const VecX<double>& v) const { return angled_ ? v(linear_dim_ + 1) : 0.0; }

 private:
  ReductionConfig cfg_;
  StratumDescriptor desc_;
  int linear_dim_ = 0;
  bool angled_ = false;
};

// Congruence system of the generic isotropy on a stratum.
// Twistor unknowns (x_1..x_r, a, b) in turns with a = arg(eps rho), b = arg(conj(eps) rho);
// Sasakian unknowns (x_1..x_r, theta) with lambda = exp(2 pi theta n(phi, delta)).
IntMatrix congruence_matrix(const ReductionConfig& cfg, const StratumDescriptor& d);

GroupElement lift_element(const ReductionConfig& cfg, const StratumDescriptor& d, const TorusPoint& x, double phi = 0.0,
                          double delta = 0.0);

// True when the element acts trivially on the whole ambient space.
bool acts_trivially(const ReductionConfig& cfg, const StratumDescriptor& d, const TorusPoint& x);

struct EffectiveIsotropy {
  IsotropyGroup group;
  i64 trivial = 1;
  i64 effective = 1;
};

EffectiveIsotropy effective_isotropy(const ReductionConfig& cfg, const StratumDescriptor& d);

struct IsotropyCheck {
  EffectiveIsotropy isotropy;
  int checked = 0;
  double max_residual = 0.0;
  bool passed = false;
};

// Every generator (every element when the order is at most 64) must fix the point to 1e-8.
IsotropyCheck stratum_isotropy_verify(const ReductionConfig& cfg, const StratumDescriptor& d,
                                      const PatternParametrization& par, const VecX<double>& v);

struct SignSolution {
  std::vector<int> signs;            // first sign normalized to +1
  std::vector<Rational> solution;    // pair norms |u_a|^2
  bool positive = false;
  bool singular = false;
};

struct SignPatternError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<SignSolution> v3_sign_systems(const ThetaMatrix& m);
std::vector<SignSolution> omega_sign_systems(const OmegaMatrix& m);
SignSolution v3_positive_sign_pattern(const ThetaMatrix& m);
SignSolution omega_positive_sign_pattern(const OmegaMatrix& m);

struct NumericSummary {
  int dim = 0;
  int orbit_rank = 0;
  int quotient_dim = 0;
  double min_residual = 0.0;
  bool realized = false;
  bool ambiguous = false;
  int restarts = 0;
  std::optional<IsotropyCheck> isotropy;
};

struct StratumReport {
  StratumDescriptor descriptor;
  i64 determinant = 0;  // the governing Delta, box or combination
  i64 raw_factor = 1;   // 4 for the +-4 Delta strata
  i64 isotropy_effective = 1;  // 0 marks a continuous stabilizer
  i64 congruence_order = 1;
  int predicted_quotient_dim = 0;
  bool pruned = false;
  std::string prune_reason;
  std::optional<NumericSummary> numeric;

  i64 isotropy_raw() const { return raw_factor * determinant; }
};

struct Catalog {
  Family family = Family::Theta;
  Level level = Level::Twistor;
  IntMatrix weights;
  int raw_patterns = 0;  // before deduplication
  std::vector<StratumReport> entries;  // canonical order, pruned entries included and flagged

  int count(StratumKind k, bool surviving_only) const;
};

Catalog enumerate_twistor_strata_theta(const ThetaMatrix& m);
Catalog enumerate_sasakian_strata_theta(const ThetaMatrix& m);
Catalog enumerate_twistor_strata_omega(const OmegaMatrix& m);
Catalog enumerate_sasakian_strata_omega(const OmegaMatrix& m);

// Sign families of V3 other than the selected one (seven for Theta, three for Omega).
std::vector<StratumDescriptor> rejected_v3_families(const ReductionConfig& cfg);

ReductionConfig config_for(const Catalog& c);

struct NumericOptions {
  std::uint64_t seed = 7;
  int restarts = 20;
  int threads = 1;
  Tolerances tol;
};

// Projects onto each pattern, measures dimensions and verifies isotropy where realized.
NumericSummary analyze_stratum(const ReductionConfig& cfg, const StratumDescriptor& d, const NumericOptions& opt);
void attach_numerics(Catalog& c, const NumericOptions& opt);

struct FamilyComparison {
  Catalog theta_twistor, theta_sasakian, omega_twistor, omega_sasakian;
  bool structurally_distinct = false;
  bool distinct_before_pruning = false;
  bool distinct_after_pruning = false;
};

FamilyComparison compare_families(const ThetaMatrix& theta, const OmegaMatrix& omega);
// Compares the structural signatures of any two twistor catalogs.
bool catalogs_distinct(const Catalog& a, const Catalog& b, bool surviving_only);

// det of the 2x2 block of A(theta) lambda u rho = u restricted to one pair.
cplx fixed_point_block_det(const ReductionConfig& cfg, const GroupElement& g, int pair_index);

}  // namespace qkr
