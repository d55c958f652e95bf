#pragma once

#include <Eigen/Core>
#include <boost/rational.hpp>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkr {

using i64 = std::int64_t;
using Rational = boost::rational<i64>;

using ThetaMatrix = Eigen::Matrix<i64, 3, 4>;
using OmegaMatrix = Eigen::Matrix<i64, 2, 3>;
using IntMatrix = Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic>;

constexpr i64 kMaxWeight = 1000000;

struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

i64 checked_add(i64 a, i64 b);
i64 checked_sub(i64 a, i64 b);
i64 checked_mul(i64 a, i64 b);

// Throws std::invalid_argument when an entry lies outside [-kMaxWeight, kMaxWeight].
void validate_weights(const IntMatrix& m);

i64 det2(i64 a, i64 b, i64 c, i64 d);
i64 det3(const Eigen::Matrix<i64, 3, 3>& m);

struct ThetaMinors {
  i64 d123 = 0, d124 = 0, d134 = 0, d234 = 0;
  std::array<i64, 4> array() const { return {d123, d124, d134, d234}; }
  bool operator==(const ThetaMinors&) const = default;
};

struct OmegaMinors {
  i64 d12 = 0, d13 = 0, d23 = 0;
  std::array<i64, 3> array() const { return {d12, d13, d23}; }
  bool operator==(const OmegaMinors&) const = default;
};

// Sign tuples are indexed with '+' first: index = 4*(s2<0) + 2*(s3<0) + (s4<0).
int sign_index(int s2, int s3, int s4);
std::array<int, 3> sign_triple(int index);
std::string sign_label(const std::vector<int>& signs);

struct ThetaBoxes {
  std::array<i64, 8> value{};
  i64 at(int s2, int s3, int s4) const { return value[sign_index(s2, s3, s4)]; }
};

struct OmegaBoxes {
  std::array<i64, 4> value{};  // index = 2*(s2<0) + (s3<0)
  i64 at(int s2, int s3) const { return value[2 * (s2 < 0) + (s3 < 0)]; }
};

ThetaMinors minors_theta(const ThetaMatrix& m);
ThetaBoxes boxes_theta(const ThetaMatrix& m);
OmegaMinors minors_omega(const OmegaMatrix& m);
OmegaBoxes boxes_omega(const OmegaMatrix& m);

// box(s) = sum_k coeff[s][k] * minor_k, minors ordered (D123, D124, D134, D234).
using BoxCoefficients = std::array<std::array<i64, 4>, 8>;

// Coefficients fitted by exact solves on four fixed sample matrices.
const BoxCoefficients& box_coefficients();
// A published coefficient list, kept as data and validated against the fitted table.
const BoxCoefficients& listed_box_coefficients();

// Fits coefficients from four matrices whose minor vectors are linearly independent.
BoxCoefficients fit_box_coefficients(const std::array<ThetaMatrix, 4>& samples);

i64 apply_box_coefficients(const std::array<i64, 4>& coeff, const ThetaMinors& d);

struct BoxIdentityLine {
  std::array<int, 3> signs{};
  i64 box = 0;
  i64 listed_value = 0;
  bool listed_holds = false;
  std::array<i64, 4> listed_coeff{};
  std::array<i64, 4> fitted_coeff{};
};

std::vector<BoxIdentityLine> box_identities_check(const ThetaMatrix& m);

struct Admissibility {
  bool admissible = false;
  std::string witness;  // first vanishing determinant, empty when admissible
};

Admissibility admissible_theta(const ThetaMatrix& m);
Admissibility admissible_omega(const OmegaMatrix& m);

// gcd(|D12|, |D13|, |D23|) == 1; requires all minors nonzero.
bool is_free_omega(const OmegaMatrix& m);

// P * K * Q = D with P, Q unimodular and D diagonal (d_1 | d_2 | ...), d_i >= 0.
struct SmithForm {
  IntMatrix P, D, Q;
  std::vector<i64> diagonal() const;
};

SmithForm smith_normal_form(const IntMatrix& k);

struct ContinuousStabilizer : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TorusPoint = std::vector<Rational>;  // coordinates in turns, each in [0, 1)

struct IsotropyGroup {
  int dim = 0;  // number of torus coordinates
  i64 order = 1;
  std::vector<i64> invariants;          // nontrivial invariant factors
  std::vector<TorusPoint> generators;   // one per invariant factor
  std::vector<TorusPoint> elements() const;  // full enumeration, identity first
};

// Solutions of B x = 0 mod Z^m for x in (R/Z)^n, B of shape m x n with m >= n.
// Throws ContinuousStabilizer when B has rank < n.
IsotropyGroup isotropy_group(const IntMatrix& b);

bool satisfies_congruence(const IntMatrix& b, const TorusPoint& x);
TorusPoint reduce_mod1(const TorusPoint& x);

struct SearchReport {
  int bound = 0;
  i64 scanned = 0;
  i64 admissible = 0;
  i64 all_unit_boxes = 0;  // admissible matrices with every |box| = 1
  std::vector<ThetaMatrix> counterexamples;

  struct Symbolic {
    std::array<i64, 4> xyzw{};
    std::array<Rational, 4> minors{};
    std::array<i64, 4> remaining_boxes{};  // (+,+,-), (-,-,+), (-,+,+), (-,-,-)
    bool consistent = false;               // every remaining box is +-1
  };
  std::vector<Symbolic> symbolic;
};

SearchReport free_impossibility_search(int bound, int threads = 1);

// n with n - 4 < floor((n + 1) / 2), n >= 5, as the ambient R^{n+1}.
std::vector<int> feasible_grassmannians(int n_max = 64);

ThetaMatrix theta_from_rows(const std::array<std::array<i64, 4>, 3>& rows);
OmegaMatrix omega_from_rows(const std::array<std::array<i64, 3>, 2>& rows);

// "p1,p2,p3,p4/q1,.../l1,..." -> rows. Throws std::invalid_argument on malformed input.
IntMatrix parse_matrix_literal(const std::string& s);
std::string format_matrix_literal(const IntMatrix& m);

}  // namespace qkr
