#include "qkr/quat.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>

using namespace qkr;

namespace {

using Q4 = std::array<double, 4>;  // (re, i, j, k)

// Hamilton product written out from the multiplication table.
Q4 hamilton(const Q4& a, const Q4& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Q4 coeffs(const Quatd& q) { return {q.w(), q.x(), q.y(), q.z()}; }

Quatd random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return quat(g(rng), g(rng), g(rng), g(rng));
}

HPointd random_point(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HPointd p(n);
  for (int a = 0; a < n; ++a) {
    p.z(a) = {g(rng), g(rng)};
    p.w(a) = {g(rng), g(rng)};
  }
  return p;
}

void expect_quat_near(const Quatd& a, const Quatd& b, double tol) {
  EXPECT_NEAR(a.w(), b.w(), tol);
  EXPECT_NEAR(a.x(), b.x(), tol);
  EXPECT_NEAR(a.y(), b.y(), tol);
  EXPECT_NEAR(a.z(), b.z(), tol);
}

}  // namespace

TEST(Quat, UnitRelations) {
  const Quatd i = quat(0.0, 1.0, 0.0, 0.0), j = quat(0.0, 0.0, 1.0, 0.0), k = quat(0.0, 0.0, 0.0, 1.0);
  expect_quat_near(quat_mul(i, j), k, 0);
  expect_quat_near(quat_mul(j, k), i, 0);
  expect_quat_near(quat_mul(k, i), j, 0);
  expect_quat_near(quat_mul(i, i), quat(-1.0, 0.0, 0.0, 0.0), 0);
  expect_quat_near(quat_mul(j, i), quat(0.0, 0.0, 0.0, -1.0), 0);
}

TEST(Quat, ExpandedProduct) {
  const Quatd p = quat_mul(quat(1.0, 1.0, 0.0, 0.0), quat(1.0, 0.0, 1.0, 0.0));
  expect_quat_near(p, quat(1.0, 1.0, 1.0, 1.0), 0);
}

TEST(Quat, ProductMatchesTable) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Quatd a = random_quat(rng), b = random_quat(rng);
    const Q4 want = hamilton(coeffs(a), coeffs(b));
    const Q4 got = coeffs(quat_mul(a, b));
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(got[c], want[c], 1e-12 * (1 + std::abs(want[c])));
  }
}

TEST(Quat, AssociativeAndMultiplicativeNorm) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 200; ++t) {
    const Quatd a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    const Quatd l = quat_mul(quat_mul(a, b), c), r = quat_mul(a, quat_mul(b, c));
    const double scale = quat_norm(a) * quat_norm(b) * quat_norm(c);
    expect_quat_near(l, r, 1e-12 * scale);
    EXPECT_NEAR(quat_norm(quat_mul(a, b)), quat_norm(a) * quat_norm(b), 1e-12 * quat_norm(a) * quat_norm(b));
  }
}

TEST(Quat, ConjugationReversesProducts) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const Quatd a = random_quat(rng), b = random_quat(rng);
    expect_quat_near(quat_conj(quat_mul(a, b)), quat_mul(quat_conj(b), quat_conj(a)),
                     1e-12 * quat_norm(a) * quat_norm(b));
  }
}

TEST(Quat, UnitInverse) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 50; ++t) {
    Quatd q = random_quat(rng);
    q.normalize();
    expect_quat_near(quat_mul(q, q.inverse()), Quatd::Identity(), 1e-14);
  }
}

TEST(Split, LayoutIsZPlusJW) {
  // z + j w computed with the product itself.
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g;
  const Quatd j = quat(0.0, 0.0, 1.0, 0.0);
  for (int t = 0; t < 50; ++t) {
    const cplx z(g(rng), g(rng)), w(g(rng), g(rng));
    const Quatd want(Eigen::Vector4d(from_complex(z).coeffs() + quat_mul(j, from_complex(w)).coeffs()));
    expect_quat_near(from_split(z, w), want, 1e-14);
    EXPECT_EQ(split_z(from_split(z, w)), z);
    EXPECT_EQ(split_w(from_split(z, w)), w);
  }
}

TEST(Split, RoundTripIsExact) {
  std::mt19937_64 rng(16);
  const HPointd p = random_point(8, rng);
  const HPointd q = split_roundtrip(p);
  EXPECT_EQ(p.z, q.z);
  EXPECT_EQ(p.w, q.w);

  HPointd e(8);
  e.z(0) = 1.0;
  const HPointd f = split_roundtrip(e);
  EXPECT_EQ(f.z, e.z);
  EXPECT_EQ(f.w, e.w);

  const HPointd r = from_real(to_real(p));
  EXPECT_EQ(r.z, p.z);
  EXPECT_EQ(r.w, p.w);
}

TEST(Split, NormIsSumOfParts) {
  std::mt19937_64 rng(17);
  const HPointd p = random_point(7, rng);
  double sum = 0;
  for (const auto& q : to_quats(p)) sum += q.squaredNorm();
  EXPECT_NEAR(p.squaredNorm(), sum, 1e-12 * sum);
}

TEST(Split, LeftMultiplicationByJ) {
  // j (z + j w) = -w + j z; with the factor on the other side, (z + j w) j = -conj(w) + j conj(z).
  std::mt19937_64 rng(18);
  const HPointd p = random_point(4, rng);
  const Quatd j = quat(0.0, 0.0, 1.0, 0.0);
  const HPointd l = left_mul(j, p), r = right_mul(p, j);
  for (int a = 0; a < 4; ++a) {
    EXPECT_NEAR(std::abs(l.z(a) + p.w(a)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(l.w(a) - p.z(a)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r.z(a) + std::conj(p.w(a))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r.w(a) - std::conj(p.z(a))), 0.0, 1e-14);
  }
}

TEST(Split, RealBasisMatchesCoordinates) {
  // Moving real coordinate c by one moves the quaternion by real_basis(c).
  for (int c = 0; c < 4; ++c) {
    VecX<double> x = VecX<double>::Zero(4);
    x(c) = 1.0;
    expect_quat_near(from_real(x).quat(0), real_basis<double>(c), 0);
  }
}

TEST(Sp1, AnglesGiveUnitQuaternions) {
  expect_quat_near(sp1_from_angles({0.0, 0.3, 0.7}), Quatd::Identity(), 0);
  expect_quat_near(sp1_from_angles({M_PI / 2, 0.0, 0.0}), quat(0.0, 1.0, 0.0, 0.0), 1e-15);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 100; ++t)
    EXPECT_NEAR(quat_norm(sp1_from_angles({u(rng), u(rng), u(rng)})), 1.0, 1e-12);
}

TEST(Sp1, OneParameterSubgroup) {
  // theta -> lambda(theta, phi, delta) is exp(theta n) for a fixed unit imaginary n.
  const double phi = 0.8, delta = -1.1;
  const Quatd a = sp1_from_angles({0.4, phi, delta}), b = sp1_from_angles({0.9, phi, delta});
  expect_quat_near(quat_mul(a, b), sp1_from_angles({1.3, phi, delta}), 1e-14);
}
