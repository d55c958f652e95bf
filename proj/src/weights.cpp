#include "qkr/weights.hpp"

#include "exact.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace qkr {

using detail::cpp_rational;
using detail::solve_exact;

i64 checked_add(i64 a, i64 b) {
  i64 r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

i64 checked_sub(i64 a, i64 b) {
  i64 r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

i64 checked_mul(i64 a, i64 b) {
  i64 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

void validate_weights(const IntMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (m(i) < -kMaxWeight || m(i) > kMaxWeight)
      throw std::invalid_argument("weight entry outside [-1e6, 1e6]: " + std::to_string(m(i)));
}

i64 det2(i64 a, i64 b, i64 c, i64 d) { return checked_sub(checked_mul(a, d), checked_mul(b, c)); }

i64 det3(const Eigen::Matrix<i64, 3, 3>& m) {
  const i64 c0 = det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2));
  const i64 c1 = det2(m(1, 0), m(1, 2), m(2, 0), m(2, 2));
  const i64 c2 = det2(m(1, 0), m(1, 1), m(2, 0), m(2, 1));
  return checked_add(checked_sub(checked_mul(m(0, 0), c0), checked_mul(m(0, 1), c1)), checked_mul(m(0, 2), c2));
}

int sign_index(int s2, int s3, int s4) { return 4 * (s2 < 0) + 2 * (s3 < 0) + (s4 < 0); }

std::array<int, 3> sign_triple(int index) {
  return {(index & 4) ? -1 : 1, (index & 2) ? -1 : 1, (index & 1) ? -1 : 1};
}

std::string sign_label(const std::vector<int>& signs) {
  std::string s;
  for (int v : signs) s += v < 0 ? '-' : '+';
  return s;
}

namespace {

// Rows are the weight vectors of the chosen columns.
Eigen::Matrix<i64, 3, 3> column_rows(const ThetaMatrix& m, int a, int b, int c) {
  Eigen::Matrix<i64, 3, 3> r;
  r.row(0) = m.col(a).transpose();
  r.row(1) = m.col(b).transpose();
  r.row(2) = m.col(c).transpose();
  return r;
}

Eigen::Matrix<i64, 3, 1> signed_sum(const Eigen::Matrix<i64, 3, 1>& a, int s, const Eigen::Matrix<i64, 3, 1>& b) {
  Eigen::Matrix<i64, 3, 1> r;
  for (int i = 0; i < 3; ++i) r(i) = s > 0 ? checked_add(a(i), b(i)) : checked_sub(a(i), b(i));
  return r;
}

}  // namespace

ThetaMinors minors_theta(const ThetaMatrix& m) {
  validate_weights(m);
  return {det3(column_rows(m, 0, 1, 2)), det3(column_rows(m, 0, 1, 3)), det3(column_rows(m, 0, 2, 3)),
          det3(column_rows(m, 1, 2, 3))};
}

ThetaBoxes boxes_theta(const ThetaMatrix& m) {
  validate_weights(m);
  ThetaBoxes out;
  for (int idx = 0; idx < 8; ++idx) {
    const auto s = sign_triple(idx);
    Eigen::Matrix<i64, 3, 3> r;
    for (int k = 0; k < 3; ++k) r.row(k) = signed_sum(m.col(0), s[k], m.col(k + 1)).transpose();
    out.value[idx] = det3(r);
  }
  return out;
}

OmegaMinors minors_omega(const OmegaMatrix& m) {
  validate_weights(m);
  auto d = [&](int a, int b) { return det2(m(0, a), m(1, a), m(0, b), m(1, b)); };
  return {d(0, 1), d(0, 2), d(1, 2)};
}

OmegaBoxes boxes_omega(const OmegaMatrix& m) {
  validate_weights(m);
  OmegaBoxes out;
  for (int idx = 0; idx < 4; ++idx) {
    const int s2 = (idx & 2) ? -1 : 1, s3 = (idx & 1) ? -1 : 1;
    auto row = [&](int col, int s) {
      return std::array<i64, 2>{s > 0 ? checked_add(m(0, 0), m(0, col)) : checked_sub(m(0, 0), m(0, col)),
                                s > 0 ? checked_add(m(1, 0), m(1, col)) : checked_sub(m(1, 0), m(1, col))};
    };
    const auto a = row(1, s2), b = row(2, s3);
    out.value[idx] = det2(a[0], a[1], b[0], b[1]);
  }
  return out;
}


BoxCoefficients fit_box_coefficients(const std::array<ThetaMatrix, 4>& samples) {
  std::vector<std::vector<cpp_rational>> a(4, std::vector<cpp_rational>(4));
  std::array<ThetaBoxes, 4> boxes;
  for (int r = 0; r < 4; ++r) {
    const auto d = minors_theta(samples[r]).array();
    for (int k = 0; k < 4; ++k) a[r][k] = d[k];
    boxes[r] = boxes_theta(samples[r]);
  }
  BoxCoefficients out{};
  for (int s = 0; s < 8; ++s) {
    std::vector<cpp_rational> b(4), x;
    for (int r = 0; r < 4; ++r) b[r] = boxes[r].value[s];
    if (!solve_exact(a, b, x)) throw std::invalid_argument("fit_box_coefficients: sample minors are dependent");
    for (int k = 0; k < 4; ++k) {
      if (denominator(x[k]) != 1) throw std::runtime_error("fit_box_coefficients: non-integer coefficient");
      out[s][k] = static_cast<i64>(numerator(x[k]));
    }
  }
  return out;
}

const BoxCoefficients& box_coefficients() {
  static const BoxCoefficients table = [] {
    // Each sample isolates one minor.
    std::array<ThetaMatrix, 4> s;
    s[0] << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
    s[1] << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1;
    s[2] << 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
    s[3] << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
    return fit_box_coefficients(s);
  }();
  return table;
}

const BoxCoefficients& listed_box_coefficients() {
  // Rows in sign_index order: (+,+,+), (+,+,-), (+,-,+), (+,-,-), (-,+,+), (-,+,-), (-,-,+), (-,-,-)
  // with the triple read as (1 +- 2, 1 +- 3, 1 +- 4).
  static const BoxCoefficients table = {{
      {1, -1, 1, 1},
      {1, 1, -1, -1},
      {-1, -1, -1, -1},
      {-1, 1, 1, 1},
      {-1, 1, 1, -1},
      {-1, -1, -1, 1},
      {1, 1, -1, 1},
      {1, -1, 1, -1},
  }};
  return table;
}

i64 apply_box_coefficients(const std::array<i64, 4>& coeff, const ThetaMinors& d) {
  const auto v = d.array();
  i64 acc = 0;
  for (int k = 0; k < 4; ++k) acc = checked_add(acc, checked_mul(coeff[k], v[k]));
  return acc;
}

std::vector<BoxIdentityLine> box_identities_check(const ThetaMatrix& m) {
  const auto d = minors_theta(m);
  const auto boxes = boxes_theta(m);
  std::vector<BoxIdentityLine> out;
  for (int s = 0; s < 8; ++s) {
    BoxIdentityLine line;
    line.signs = sign_triple(s);
    line.box = boxes.value[s];
    line.listed_coeff = listed_box_coefficients()[s];
    line.fitted_coeff = box_coefficients()[s];
    line.listed_value = apply_box_coefficients(line.listed_coeff, d);
    line.listed_holds = line.listed_value == line.box;
    out.push_back(line);
  }
  return out;
}

Admissibility admissible_theta(const ThetaMatrix& m) {
  const auto d = minors_theta(m);
  const char* names[] = {"D123", "D124", "D134", "D234"};
  const auto dv = d.array();
  for (int k = 0; k < 4; ++k)
    if (dv[k] == 0) return {false, names[k]};
  const auto b = boxes_theta(m);
  for (int s = 0; s < 8; ++s)
    if (b.value[s] == 0) {
      const auto t = sign_triple(s);
      return {false, "box(" + sign_label({t[0], t[1], t[2]}) + ")"};
    }
  return {true, ""};
}

Admissibility admissible_omega(const OmegaMatrix& m) {
  const auto d = minors_omega(m);
  if (d.d12 == 0) return {false, "D12"};
  if (d.d13 == 0) return {false, "D13"};
  if (d.d23 == 0) return {false, "D23"};
  if (checked_add(checked_add(d.d12, d.d13), d.d23) == 0) return {false, "D12+D13+D23"};
  if (d.d12 == checked_add(d.d13, d.d23)) return {false, "D12=D13+D23"};
  if (d.d13 == checked_add(d.d12, d.d23)) return {false, "D13=D12+D23"};
  if (d.d23 == checked_add(d.d12, d.d13)) return {false, "D23=D12+D13"};
  const auto b = boxes_omega(m);
  for (int idx = 0; idx < 4; ++idx)
    if (b.value[idx] == 0)
      return {false, "box(" + sign_label({(idx & 2) ? -1 : 1, (idx & 1) ? -1 : 1}) + ")"};
  return {true, ""};
}

bool is_free_omega(const OmegaMatrix& m) {
  const auto d = minors_omega(m);
  if (d.d12 == 0 || d.d13 == 0 || d.d23 == 0) throw std::invalid_argument("is_free_omega: a minor vanishes");
  return std::gcd(std::gcd(d.d12, d.d13), d.d23) == 1;
}

std::vector<i64> SmithForm::diagonal() const {
  std::vector<i64> out;
  for (Eigen::Index i = 0; i < std::min(D.rows(), D.cols()); ++i) out.push_back(D(i, i));
  return out;
}

namespace {

// g = x a + y b with g = gcd(a, b) >= 0.
i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
  i64 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    const i64 q = a / b;
    std::tie(a, b) = std::make_pair(b, a - q * b);
    std::tie(x0, x1) = std::make_pair(x1, checked_sub(x0, checked_mul(q, x1)));
    std::tie(y0, y1) = std::make_pair(y1, checked_sub(y0, checked_mul(q, y1)));
  }
  if (a < 0) {
    a = -a;
    x0 = -x0;
    y0 = -y0;
  }
  x = x0;
  y = y0;
  return a;
}

// Unimodular [[x, y], [u, v]] sending (a, b) to (gcd, 0); plain elimination when a divides b.
std::array<i64, 4> bezout(i64 a, i64 b) {
  if (b % a == 0) return {1, 0, -(b / a), 1};
  i64 x, y;
  const i64 g = ext_gcd(a, b, x, y);
  return {x, y, -b / g, a / g};
}

// Rows (i, j) <- [[x, y], [u, v]] * rows (i, j).
void combine_rows(IntMatrix& m, Eigen::Index i, Eigen::Index j, i64 x, i64 y, i64 u, i64 v) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const i64 ri = m(i, c), rj = m(j, c);
    m(i, c) = checked_add(checked_mul(x, ri), checked_mul(y, rj));
    m(j, c) = checked_add(checked_mul(u, ri), checked_mul(v, rj));
  }
}

void combine_cols(IntMatrix& m, Eigen::Index i, Eigen::Index j, i64 x, i64 y, i64 u, i64 v) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const i64 ci = m(r, i), cj = m(r, j);
    m(r, i) = checked_add(checked_mul(x, ci), checked_mul(y, cj));
    m(r, j) = checked_add(checked_mul(u, ci), checked_mul(v, cj));
  }
}

}  // namespace

SmithForm smith_normal_form(const IntMatrix& k) {
  const Eigen::Index m = k.rows(), n = k.cols();
  SmithForm f{IntMatrix::Identity(m, m), k, IntMatrix::Identity(n, n)};
  IntMatrix& d = f.D;

  for (Eigen::Index t = 0; t < std::min(m, n); ++t) {
    // Pivot: smallest nonzero magnitude in the trailing block.
    Eigen::Index pr = -1, pc = -1;
    for (Eigen::Index i = t; i < m; ++i)
      for (Eigen::Index j = t; j < n; ++j)
        if (d(i, j) != 0 && (pr < 0 || std::abs(d(i, j)) < std::abs(d(pr, pc)))) pr = i, pc = j;
    if (pr < 0) break;
    d.row(t).swap(d.row(pr));
    f.P.row(t).swap(f.P.row(pr));
    d.col(t).swap(d.col(pc));
    f.Q.col(t).swap(f.Q.col(pc));

    for (;;) {
      bool dirty = false;
      for (Eigen::Index i = t + 1; i < m; ++i) {
        if (d(i, t) == 0) continue;
        const auto [x, y, u, v] = bezout(d(t, t), d(i, t));
        combine_rows(d, t, i, x, y, u, v);
        combine_rows(f.P, t, i, x, y, u, v);
      }
      for (Eigen::Index j = t + 1; j < n; ++j) {
        if (d(t, j) == 0) continue;
        const auto [x, y, u, v] = bezout(d(t, t), d(t, j));
        combine_cols(d, t, j, x, y, u, v);
        combine_cols(f.Q, t, j, x, y, u, v);
        dirty = true;
      }
      if (dirty) {
        for (Eigen::Index i = t + 1; i < m; ++i)
          if (d(i, t) != 0) goto again;
      }
      // Divisibility of the trailing block by the pivot.
      for (Eigen::Index i = t + 1; i < m; ++i)
        for (Eigen::Index j = t + 1; j < n; ++j)
          if (d(i, j) % d(t, t) != 0) {
            for (Eigen::Index c = 0; c < n; ++c) d(t, c) = checked_add(d(t, c), d(i, c));
            for (Eigen::Index c = 0; c < m; ++c) f.P(t, c) = checked_add(f.P(t, c), f.P(i, c));
            goto again;
          }
      break;
    again:;
    }
    if (d(t, t) < 0) {
      d.row(t) = -d.row(t);
      f.P.row(t) = -f.P.row(t);
    }
  }
  return f;
}

TorusPoint reduce_mod1(const TorusPoint& x) {
  TorusPoint out;
  out.reserve(x.size());
  for (const auto& v : x) {
    i64 fl = v.numerator() / v.denominator();
    if (v.numerator() < 0 && v.numerator() % v.denominator() != 0) --fl;
    out.push_back(v - fl);
  }
  return out;
}

bool satisfies_congruence(const IntMatrix& b, const TorusPoint& x) {
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    Rational acc = 0;
    for (Eigen::Index c = 0; c < b.cols(); ++c) acc += Rational(b(r, c)) * x[c];
    if (acc.denominator() != 1) return false;
  }
  return true;
}

IsotropyGroup isotropy_group(const IntMatrix& b) {
  if (b.rows() < b.cols()) throw ContinuousStabilizer("congruence system has fewer rows than unknowns");
  const SmithForm f = smith_normal_form(b);
  IsotropyGroup g;
  g.dim = static_cast<int>(b.cols());
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    const i64 di = f.D(i, i);
    if (di == 0) throw ContinuousStabilizer("congruence matrix is rank deficient");
    g.order = checked_mul(g.order, di);
    if (di == 1) continue;
    g.invariants.push_back(di);
    TorusPoint gen;
    for (Eigen::Index r = 0; r < b.cols(); ++r) gen.push_back(Rational(f.Q(r, i), di));
    g.generators.push_back(reduce_mod1(gen));
  }
  return g;
}

std::vector<TorusPoint> IsotropyGroup::elements() const {
  const std::size_t n = dim;
  std::vector<TorusPoint> out{TorusPoint(n, Rational(0))};
  for (std::size_t g = 0; g < generators.size(); ++g) {
    std::vector<TorusPoint> next;
    for (const auto& e : out)
      for (i64 k = 0; k < invariants[g]; ++k) {
        TorusPoint p = e;
        for (std::size_t c = 0; c < n; ++c) p[c] += Rational(k) * generators[g][c];
        next.push_back(reduce_mod1(p));
      }
    out = std::move(next);
  }
  return out;
}

SearchReport free_impossibility_search(int bound, int threads) {
  if (bound < 0 || bound > 6) throw std::invalid_argument("search bound must lie in [0, 6]");
  SearchReport rep;
  rep.bound = bound;
  const int base = 2 * bound + 1;
  i64 total = 1;
  for (int i = 0; i < 12; ++i) total *= base;
  rep.scanned = total;

  const auto& coeff = box_coefficients();
  std::atomic<i64> admissible{0}, unit{0};
  std::mutex mu;
  std::vector<ThetaMatrix> found;

  // Split on the first entry; each worker owns a contiguous slice of indices.
  auto work = [&](i64 begin, i64 end) {
    i64 adm = 0, un = 0;
    ThetaMatrix m;
    for (i64 idx = begin; idx < end; ++idx) {
      i64 r = idx;
      for (int e = 0; e < 12; ++e) {
        m(e / 4, e % 4) = r % base - bound;
        r /= base;
      }
      const auto d = minors_theta(m);
      if (d.d123 == 0 || d.d124 == 0 || d.d134 == 0 || d.d234 == 0) continue;
      bool ok = true, all_unit = true;
      for (int s = 0; s < 8 && ok; ++s) {
        const i64 v = apply_box_coefficients(coeff[s], d);
        ok = v != 0;
        all_unit = all_unit && (v == 1 || v == -1);
      }
      if (!ok) continue;
      ++adm;
      if (all_unit) {
        ++un;
        std::lock_guard lock(mu);
        found.push_back(m);
      }
    }
    admissible += adm;
    unit += un;
  };

  threads = std::max(1, threads);
  std::vector<std::thread> pool;
  const i64 chunk = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const i64 b = t * chunk, e = std::min(total, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  rep.admissible = admissible;
  rep.all_unit_boxes = unit;
  rep.counterexamples = std::move(found);

  // Solve the four-box system for +-(1,1,-1,1) and evaluate the other four boxes.
  const int rows_used[4] = {sign_index(1, 1, 1), sign_index(1, -1, 1), sign_index(-1, 1, -1), sign_index(1, -1, -1)};
  const int rows_rest[4] = {sign_index(1, 1, -1), sign_index(-1, -1, 1), sign_index(-1, 1, 1), sign_index(-1, -1, -1)};
  for (int sgn : {1, -1}) {
    SearchReport::Symbolic sym;
    sym.xyzw = {sgn, sgn, -sgn, sgn};
    std::vector<std::vector<cpp_rational>> a(4, std::vector<cpp_rational>(4));
    std::vector<cpp_rational> b(4), x;
    for (int r = 0; r < 4; ++r) {
      for (int k = 0; k < 4; ++k) a[r][k] = coeff[rows_used[r]][k];
      b[r] = sym.xyzw[r];
    }
    solve_exact(a, b, x);
    bool integral = true;
    ThetaMinors d;
    for (int k = 0; k < 4; ++k) {
      sym.minors[k] = detail::to_rational(x[k]);
      integral = integral && sym.minors[k].denominator() == 1;
    }
    d = {sym.minors[0].numerator(), sym.minors[1].numerator(), sym.minors[2].numerator(), sym.minors[3].numerator()};
    sym.consistent = integral;
    for (int r = 0; r < 4; ++r) {
      sym.remaining_boxes[r] = apply_box_coefficients(coeff[rows_rest[r]], d);
      sym.consistent = sym.consistent && std::abs(sym.remaining_boxes[r]) == 1;
    }
    rep.symbolic.push_back(sym);
  }
  return rep;
}

std::vector<int> feasible_grassmannians(int n_max) {
  std::vector<int> out;
  for (int n = 5; n <= n_max; ++n)
    if (n - 4 < (n + 1) / 2) out.push_back(n + 1);
  return out;
}

ThetaMatrix theta_from_rows(const std::array<std::array<i64, 4>, 3>& rows) {
  ThetaMatrix m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = rows[r][c];
  validate_weights(m);
  return m;
}

OmegaMatrix omega_from_rows(const std::array<std::array<i64, 3>, 2>& rows) {
  OmegaMatrix m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
  validate_weights(m);
  return m;
}

IntMatrix parse_matrix_literal(const std::string& s) {
  std::vector<std::vector<i64>> rows;
  std::stringstream rs(s);
  std::string row;
  while (std::getline(rs, row, '/')) {
    std::vector<i64> vals;
    std::stringstream cs(row);
    std::string tok;
    while (std::getline(cs, tok, ',')) {
      std::size_t used = 0;
      i64 v;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed matrix entry '" + tok + "'");
      }
      if (used != tok.size()) throw std::invalid_argument("malformed matrix entry '" + tok + "'");
      vals.push_back(v);
    }
    if (vals.empty()) throw std::invalid_argument("empty matrix row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty() || s.empty() || s.back() == '/') throw std::invalid_argument("empty matrix literal");
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw std::invalid_argument("ragged matrix literal");
  IntMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  validate_weights(m);
  return m;
}

std::string format_matrix_literal(const IntMatrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += '/';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += std::to_string(m(r, c));
    }
  }
  return out;
}

}  // namespace qkr
