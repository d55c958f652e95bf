#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qkr {

template <typename S> using Quat = Eigen::Quaternion<S>;
template <typename S> using CVecX = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>;
template <typename S> using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S> using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Quatd = Quat<double>;
using cplx = std::complex<double>;

// Eigen stores (x, y, z, w); the constructor takes (w, x, y, z).
template <typename S> Quat<S> quat(S re, S i, S j, S k) { return Quat<S>(re, i, j, k); }

template <typename S> Quat<S> quat_mul(const Quat<S>& a, const Quat<S>& b) { return a * b; }

template <typename S> Quat<S> quat_conj(const Quat<S>& q) { return q.conjugate(); }

template <typename S> S quat_norm(const Quat<S>& q) { return q.coeffs().norm(); }

// u = z + j w. Since j (c + d i) = c j - d k, the k-part of u is -Im w.
template <typename S> Quat<S> from_split(std::complex<S> z, std::complex<S> w) {
  return Quat<S>(z.real(), z.imag(), w.real(), -w.imag());
}

template <typename S> std::complex<S> split_z(const Quat<S>& q) { return {q.w(), q.x()}; }
template <typename S> std::complex<S> split_w(const Quat<S>& q) { return {q.y(), -q.z()}; }

template <typename S> Quat<S> from_complex(std::complex<S> c) { return Quat<S>(c.real(), c.imag(), S(0), S(0)); }

template <typename S> struct HPoint {
  CVecX<S> z;
  CVecX<S> w;

  HPoint() = default;
  explicit HPoint(Eigen::Index n) : z(CVecX<S>::Zero(n)), w(CVecX<S>::Zero(n)) {}
  HPoint(CVecX<S> z_, CVecX<S> w_) : z(std::move(z_)), w(std::move(w_)) {
    if (z.size() != w.size()) throw std::invalid_argument("HPoint: z and w differ in length");
  }

  Eigen::Index n() const { return z.size(); }
  Quat<S> quat(Eigen::Index a) const { return from_split(z(a), w(a)); }
  void set(Eigen::Index a, const Quat<S>& q) {
    z(a) = split_z(q);
    w(a) = split_w(q);
  }
  S squaredNorm() const { return z.squaredNorm() + w.squaredNorm(); }
  S norm() const { return std::sqrt(squaredNorm()); }
};

using HPointd = HPoint<double>;

template <typename S> std::vector<Quat<S>> to_quats(const HPoint<S>& p) {
  std::vector<Quat<S>> out;
  out.reserve(p.n());
  for (Eigen::Index a = 0; a < p.n(); ++a) out.push_back(p.quat(a));
  return out;
}

template <typename S> HPoint<S> from_quats(const std::vector<Quat<S>>& qs) {
  HPoint<S> p(static_cast<Eigen::Index>(qs.size()));
  for (Eigen::Index a = 0; a < p.n(); ++a) p.set(a, qs[a]);
  return p;
}

template <typename S> HPoint<S> split_roundtrip(const HPoint<S>& p) { return from_quats(to_quats(p)); }

// Real coordinates per slot: (Re z, Im z, Re w, Im w).
template <typename S> VecX<S> to_real(const HPoint<S>& p) {
  VecX<S> x(4 * p.n());
  for (Eigen::Index a = 0; a < p.n(); ++a) {
    x(4 * a) = p.z(a).real();
    x(4 * a + 1) = p.z(a).imag();
    x(4 * a + 2) = p.w(a).real();
    x(4 * a + 3) = p.w(a).imag();
  }
  return x;
}

template <typename S> HPoint<S> from_real(const VecX<S>& x) {
  if (x.size() % 4 != 0) throw std::invalid_argument("from_real: length not a multiple of 4");
  HPoint<S> p(x.size() / 4);
  for (Eigen::Index a = 0; a < p.n(); ++a) {
    p.z(a) = {x(4 * a), x(4 * a + 1)};
    p.w(a) = {x(4 * a + 2), x(4 * a + 3)};
  }
  return p;
}

// Quaternion direction of real coordinate c within a slot.
template <typename S> Quat<S> real_basis(int c) {
  switch (c) {
    case 0: return Quat<S>(1, 0, 0, 0);
    case 1: return Quat<S>(0, 1, 0, 0);
    case 2: return Quat<S>(0, 0, 1, 0);
    default: return Quat<S>(0, 0, 0, -1);
  }
}

template <typename S> HPoint<S> left_mul(const Quat<S>& lambda, const HPoint<S>& p) {
  HPoint<S> out(p.n());
  for (Eigen::Index a = 0; a < p.n(); ++a) out.set(a, lambda * p.quat(a));
  return out;
}

template <typename S> HPoint<S> right_mul(const HPoint<S>& p, const Quat<S>& rho) {
  HPoint<S> out(p.n());
  for (Eigen::Index a = 0; a < p.n(); ++a) out.set(a, p.quat(a) * rho);
  return out;
}

struct Sp1Element {
  double theta = 0.0;
  double phi = 0.0;
  double delta = 0.0;
};

// eps + j sigma with eps = cos(theta) + i sin(theta) cos(phi), sigma = sin(theta) sin(phi) e^{i delta}.
template <typename S = double> Quat<S> sp1_from_angles(const Sp1Element& e) {
  using std::cos;
  using std::sin;
  const std::complex<S> eps(cos(e.theta), sin(e.theta) * cos(e.phi));
  const std::complex<S> sigma = S(sin(e.theta) * sin(e.phi)) * std::polar(S(1), S(e.delta));
  return from_split(eps, sigma);
}

}  // namespace qkr
