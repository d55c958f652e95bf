#include "qkr/cli.hpp"

#include "qkr/numerics.hpp"
#include "qkr/strata.hpp"
#include "qkr/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qkr::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inadmissible : std::runtime_error {
  Inadmissible(const std::string& what, std::string w) : std::runtime_error(what), witness(std::move(w)) {}
  std::string witness;
};

struct RunConfig {
  std::uint64_t seed = 7;
  bool seed_given = false;
  bool strict = false;
  std::string output = "table";
  std::string level = "twistor";
  std::string family = "auto";
  int parallel = 1;
  int n = 100;
  int bound = 2;
  int restarts = 20;
  Tolerances tol;
};

struct Input {
  Family family = Family::Theta;
  IntMatrix m;
  std::string literal;
};

// Residuals are printed with six significant digits so the JSON stays byte-stable.
double rounded(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string rational_text(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

Input parse_input(const std::string& literal, const std::string& family) {
  Input in;
  in.literal = literal;
  try {
    in.m = parse_matrix_literal(literal);
    validate_weights(in.m);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const bool theta_shape = in.m.rows() == 3 && in.m.cols() == 4;
  const bool omega_shape = in.m.rows() == 2 && in.m.cols() == 3;
  if (family == "theta" || (family == "auto" && theta_shape)) {
    if (!theta_shape) throw UsageError("theta weight matrix must be 3x4, got " + std::to_string(in.m.rows()) + "x" +
                                       std::to_string(in.m.cols()));
    in.family = Family::Theta;
  } else if (family == "omega" || (family == "auto" && omega_shape)) {
    if (!omega_shape) throw UsageError("omega weight matrix must be 2x3, got " + std::to_string(in.m.rows()) + "x" +
                                       std::to_string(in.m.cols()));
    in.family = Family::Omega;
  } else {
    throw UsageError("cannot infer family from a " + std::to_string(in.m.rows()) + "x" + std::to_string(in.m.cols()) +
                     " matrix");
  }
  return in;
}

Admissibility admissibility(const Input& in) {
  return in.family == Family::Theta ? admissible_theta(ThetaMatrix(in.m)) : admissible_omega(OmegaMatrix(in.m));
}

void require_admissible(const Input& in) {
  const Admissibility a = admissibility(in);
  if (!a.admissible) throw Inadmissible("inadmissible weight matrix " + in.literal, a.witness);
}

ReductionConfig config_of(const Input& in) {
  return in.family == Family::Theta ? ReductionConfig::theta(ThetaMatrix(in.m)) : ReductionConfig::omega(OmegaMatrix(in.m));
}

json finding(const std::string& name, bool passed, json detail) {
  json f;
  f["name"] = name;
  f["passed"] = passed;
  f["detail"] = std::move(detail);
  return f;
}

void print_findings(const json& findings, std::ostream& out) {
  for (const auto& f : findings) {
    out << (f["passed"].get<bool>() ? "PASS  " : "FAIL  ") << f["name"].get<std::string>();
    if (f["detail"].is_string()) out << "  " << f["detail"].get<std::string>();
    out << "\n";
  }
}

bool all_passed(const json& findings) {
  return std::all_of(findings.begin(), findings.end(), [](const json& f) { return f["passed"].get<bool>(); });
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const Input& in, const RunConfig& rc, std::ostream& out) {
  const Admissibility a = admissibility(in);
  json j;
  j["command"] = "check";
  j["family"] = family_name(in.family);
  j["matrix"] = format_matrix_literal(in.m);
  j["admissible"] = a.admissible;
  j["witness"] = a.witness;
  json dets = json::array();
  auto add = [&](const std::string& name, i64 value, bool required_nonzero) {
    dets.push_back({{"name", name}, {"value", value}, {"passed", !required_nonzero || value != 0}});
  };
  if (in.family == Family::Theta) {
    const ThetaMatrix t(in.m);
    const ThetaMinors d = minors_theta(t);
    add("D123", d.d123, true);
    add("D124", d.d124, true);
    add("D134", d.d134, true);
    add("D234", d.d234, true);
    const ThetaBoxes b = boxes_theta(t);
    for (int s = 0; s < 8; ++s) {
      const auto st = sign_triple(s);
      add("box" + sign_label({st[0], st[1], st[2]}), b.value[s], true);
    }
    json lines = json::array();
    for (const auto& l : box_identities_check(t))
      lines.push_back({{"signs", sign_label({l.signs[0], l.signs[1], l.signs[2]})},
                       {"box", l.box},
                       {"listed_value", l.listed_value},
                       {"listed_identity_holds", l.listed_holds}});
    j["determinants"] = dets;
    j["box_identities"] = lines;
  } else {
    const OmegaMatrix o(in.m);
    const OmegaMinors d = minors_omega(o);
    add("D12", d.d12, true);
    add("D13", d.d13, true);
    add("D23", d.d23, true);
    add("D12+D13+D23", d.d12 + d.d13 + d.d23, true);
    add("D12-D13-D23", d.d12 - d.d13 - d.d23, true);
    add("D13-D12-D23", d.d13 - d.d12 - d.d23, true);
    add("D23-D12-D13", d.d23 - d.d12 - d.d13, true);
    const OmegaBoxes b = boxes_omega(o);
    for (int s = 0; s < 4; ++s) add("box" + sign_label({(s & 2) ? -1 : 1, (s & 1) ? -1 : 1}), b.value[s], true);
    j["determinants"] = dets;
    j["free"] = a.admissible && is_free_omega(o);
  }

  if (rc.output == "json") {
    out << j.dump(2) << "\n";
  } else {
    out << (a.admissible ? "ADMISSIBLE" : "INADMISSIBLE") << "  " << family_name(in.family) << " "
        << format_matrix_literal(in.m) << "\n";
    if (!a.admissible) out << "witness: " << a.witness << "\n";
    for (const auto& d : dets)
      out << "  " << d["name"].get<std::string>() << " = " << d["value"].get<i64>()
          << (d["passed"].get<bool>() ? "" : "  <- zero") << "\n";
    if (j.contains("box_identities"))
      for (const auto& l : j["box_identities"])
        if (!l["listed_identity_holds"].get<bool>())
          out << "  listed identity for box" << l["signs"].get<std::string>() << " gives " << l["listed_value"].get<i64>()
              << ", actual " << l["box"].get<i64>() << "\n";
    if (j.contains("free")) out << "  free on u1 != 0: " << (j["free"].get<bool>() ? "yes" : "no") << "\n";
  }
  return a.admissible ? kPass : kInadmissible;
}

// ---------------------------------------------------------------------------
// strata

json stratum_json(const StratumReport& e) {
  json s;
  s["label"] = e.descriptor.label();
  s["kind"] = kind_name(e.descriptor.kind);
  s["indices"] = {{"upper", e.descriptor.upper}, {"lower", e.descriptor.lower}};
  s["signs"] = e.descriptor.signs;
  s["level"] = level_name(e.descriptor.level);
  s["determinant"] = e.determinant;
  s["isotropy_raw"] = e.isotropy_raw();
  s["isotropy_effective"] = e.isotropy_effective;
  s["quotient_dim"] = e.predicted_quotient_dim;
  s["pruned"] = e.pruned;
  s["prune_reason"] = e.prune_reason;
  if (e.numeric) {
    const NumericSummary& n = *e.numeric;
    json num;
    num["realized"] = n.realized;
    num["min_residual"] = rounded(n.min_residual);
    num["restarts"] = n.restarts;
    if (n.realized) {
      num["dim"] = n.dim;
      num["orbit_rank"] = n.orbit_rank;
      num["quotient_dim"] = n.quotient_dim;
      num["ambiguous"] = n.ambiguous;
      if (n.isotropy) {
        num["isotropy_verified"] = n.isotropy->passed;
        num["isotropy_checked"] = n.isotropy->checked;
        num["isotropy_residual"] = rounded(n.isotropy->max_residual);
      }
    } else {
      num["dim"] = nullptr;
      num["orbit_rank"] = nullptr;
      num["quotient_dim"] = nullptr;
    }
    s["numeric"] = num;
  }
  return s;
}

json catalog_json(const Catalog& c) {
  json j;
  j["family"] = family_name(c.family);
  j["level"] = level_name(c.level);
  j["matrix"] = format_matrix_literal(c.weights);
  j["raw_patterns"] = c.raw_patterns;
  int surviving = 0, spheres = 0, points = 0, realized = 0;
  json entries = json::array();
  for (const auto& e : c.entries) {
    if (!e.pruned) ++surviving;
    (e.predicted_quotient_dim == 2 ? spheres : points) += 1;
    if (e.numeric && e.numeric->realized) ++realized;
    entries.push_back(stratum_json(e));
  }
  j["counts"] = {{"listed", c.entries.size()}, {"surviving", surviving}, {"spheres", spheres}, {"points", points}};
  if (!c.entries.empty() && c.entries.front().numeric) j["counts"]["realized"] = realized;
  j["strata"] = entries;
  return j;
}

Catalog build_catalog(const Input& in, Level level) {
  if (in.family == Family::Theta)
    return level == Level::Twistor ? enumerate_twistor_strata_theta(ThetaMatrix(in.m))
                                   : enumerate_sasakian_strata_theta(ThetaMatrix(in.m));
  return level == Level::Twistor ? enumerate_twistor_strata_omega(OmegaMatrix(in.m))
                                 : enumerate_sasakian_strata_omega(OmegaMatrix(in.m));
}

NumericOptions numeric_options(const RunConfig& rc) {
  NumericOptions opt;
  opt.seed = rc.seed;
  opt.restarts = rc.restarts;
  opt.threads = rc.parallel;
  opt.tol = rc.tol;
  return opt;
}

// Realized strata must be fixed pointwise by their isotropy generators.
json isotropy_findings(const Catalog& c) {
  json bad = json::array();
  int checked = 0;
  for (const auto& e : c.entries) {
    if (!e.numeric || !e.numeric->realized || !e.numeric->isotropy) continue;
    ++checked;
    if (!e.numeric->isotropy->passed) bad.push_back(e.descriptor.label());
  }
  return finding(std::string("isotropy_pointwise_") + level_name(c.level), bad.empty(),
                 std::to_string(checked) + " realized strata checked" +
                     (bad.empty() ? std::string() : ", failing: " + bad.dump()));
}

void print_catalog(const Catalog& c, std::ostream& out) {
  out << family_name(c.family) << " " << level_name(c.level) << " catalog for " << format_matrix_literal(c.weights)
      << "  (" << c.raw_patterns << " raw patterns, " << c.entries.size() << " listed)\n";
  char line[256];
  std::snprintf(line, sizeof line, "  %-16s %-15s %5s %5s %4s %2s  %-22s %-8s %s\n", "stratum", "kind", "det", "raw",
                "eff", "q", "pruned", "residual", "numeric");
  out << line;
  for (const auto& e : c.entries) {
    std::string numeric = "-";
    std::string res = "-";
    if (e.numeric) {
      res = fmt(e.numeric->min_residual);
      if (e.numeric->realized) {
        numeric = "dim " + std::to_string(e.numeric->dim) + " orbit " + std::to_string(e.numeric->orbit_rank) + " q " +
                  std::to_string(e.numeric->quotient_dim);
        if (e.numeric->isotropy) numeric += e.numeric->isotropy->passed ? " iso ok" : " iso FAIL";
      } else {
        numeric = "empty";
      }
    }
    std::snprintf(line, sizeof line, "  %-16s %-15s %5lld %5lld %4lld %2d  %-22s %-8s %s\n",
                  e.descriptor.label().c_str(), kind_name(e.descriptor.kind), static_cast<long long>(e.determinant),
                  static_cast<long long>(e.isotropy_raw()), static_cast<long long>(e.isotropy_effective),
                  e.predicted_quotient_dim, e.pruned ? e.prune_reason.c_str() : "no", res.c_str(), numeric.c_str());
    out << line;
  }
}

int cmd_strata(const Input& in, const RunConfig& rc, std::ostream& out) {
  require_admissible(in);
  const Level level = rc.level == "sasakian" ? Level::Sasakian : Level::Twistor;
  Catalog c = build_catalog(in, level);
  attach_numerics(c, numeric_options(rc));
  json findings = json::array({isotropy_findings(c)});
  if (rc.output == "json") {
    json j;
    j["command"] = "strata";
    j["seed"] = rc.seed;
    j["catalog"] = catalog_json(c);
    j["findings"] = findings;
    out << j.dump(2) << "\n";
  } else {
    print_catalog(c, out);
    print_findings(findings, out);
  }
  return all_passed(findings) ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(const Input& in, const RunConfig& rc, std::ostream& out) {
  require_admissible(in);
  if (rc.n <= 0) throw UsageError("--n must be positive");
  const ReductionConfig cfg = config_of(in);
  const auto pts = sample_zero_set(cfg, rc.n, rc.seed, rc.tol, rc.parallel);

  const int expected_rank = cfg.residual_dim();
  const int expected_dim = cfg.real_dim() - 1 - expected_rank;
  const int group_dim = cfg.torus_rank + 3;
  int converged = 0, at_rank = 0, ambiguous = 0, free_G = 0, free_twistor = 0;
  double worst_residual = 0.0, min_pair = std::numeric_limits<double>::infinity();
  std::map<int, int> ranks;
  for (const auto& p : pts) {
    worst_residual = std::max(worst_residual, p.projection.residual);
    if (!p.projection.converged) continue;
    ++converged;
    ++ranks[p.constraint_rank];
    if (p.constraint_rank == expected_rank && p.gap_ratio >= rc.tol.gap) ++at_rank;
    if (p.rank_ambiguous) ++ambiguous;
    if (p.orbit_rank_G == group_dim) ++free_G;
    if (p.orbit_rank_twistor == group_dim + 1) ++free_twistor;
    min_pair = std::min(min_pair, p.min_pair_norm2);
  }

  std::ostringstream headline;
  headline << "rank " << expected_rank << " at " << at_rank << "/" << rc.n << " points; dim N = " << expected_dim;
  json findings = json::array();
  findings.push_back(finding("projection_converged", converged == rc.n,
                             std::to_string(converged) + "/" + std::to_string(rc.n) + " below residual " +
                                 fmt(rc.tol.residual)));
  findings.push_back(finding("constraint_rank", at_rank * 100 >= 95 * rc.n, headline.str()));
  findings.push_back(finding("orbit_rank", free_G == converged && free_twistor == converged,
                             "G rank " + std::to_string(group_dim) + " at " + std::to_string(free_G) + ", twistor rank " +
                                 std::to_string(group_dim + 1) + " at " + std::to_string(free_twistor)));
  findings.push_back(finding("pair_norms", converged > 0 && min_pair > 1e-3, "min pair norm^2 " + fmt(min_pair)));

  if (rc.output == "json") {
    json j;
    j["command"] = "sample";
    j["family"] = family_name(in.family);
    j["matrix"] = format_matrix_literal(in.m);
    j["seed"] = rc.seed;
    j["n"] = rc.n;
    j["converged"] = converged;
    json hist = json::object();
    for (const auto& [r, c] : ranks) hist[std::to_string(r)] = c;
    j["rank_histogram"] = hist;
    j["expected_rank"] = expected_rank;
    j["dim_N"] = expected_dim;
    j["points_at_expected_rank"] = at_rank;
    j["ambiguous_ranks"] = ambiguous;
    j["orbit_rank_G"] = group_dim;
    j["orbit_rank_twistor"] = group_dim + 1;
    j["free_G_points"] = free_G;
    j["free_twistor_points"] = free_twistor;
    j["max_residual"] = rounded(worst_residual);
    j["min_pair_norm2"] = rounded(min_pair);
    j["findings"] = findings;
    out << j.dump(2) << "\n";
  } else {
    out << headline.str() << "\n";
    out << "converged " << converged << "/" << rc.n << ", max residual " << fmt(worst_residual) << "\n";
    out << "rank histogram:";
    for (const auto& [r, c] : ranks) out << " " << r << ":" << c;
    out << "\n";
    print_findings(findings, out);
  }
  return all_passed(findings) ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const Input& in, const RunConfig& rc, std::ostream& out) {
  require_admissible(in);
  const ReductionConfig cfg = config_of(in);
  json findings = json::array();

  const std::vector<SignSolution> systems =
      in.family == Family::Theta ? v3_sign_systems(ThetaMatrix(in.m)) : omega_sign_systems(OmegaMatrix(in.m));
  std::vector<SignSolution> positive;
  for (const auto& s : systems)
    if (s.positive) positive.push_back(s);
  {
    bool ok = positive.size() == 1;
    std::string detail = std::to_string(positive.size()) + " positive sign pattern(s)";
    if (ok) {
      Rational sum = 0;
      for (const auto& q : positive[0].solution) sum += q;
      ok = sum == Rational(1, 2);
      detail += " " + sign_label(positive[0].signs) + ", solution sum " + rational_text(sum);
    }
    findings.push_back(finding("positivity_uniqueness", ok, detail));
  }

  if (in.family == Family::Theta) {
    const ThetaMatrix t(in.m);
    const ThetaMinors d = minors_theta(t);
    const ThetaBoxes b = boxes_theta(t);
    const auto& coeff = box_coefficients();
    bool ok = true;
    for (int s = 0; s < 8; ++s) ok = ok && apply_box_coefficients(coeff[s], d) == b.value[s];
    int listed = 0;
    for (const auto& l : box_identities_check(t)) listed += l.listed_holds;
    findings.push_back(finding("box_identities", ok,
                               "fitted table exact; listed identities hold on " + std::to_string(listed) + "/8"));
  }

  const NumericOptions opt = numeric_options(rc);
  for (Level level : {Level::Twistor, Level::Sasakian}) {
    Catalog c = build_catalog(in, level);
    attach_numerics(c, opt);
    findings.push_back(isotropy_findings(c));
  }

  if (positive.size() == 1) {
    const NumericSummary sel = analyze_stratum(cfg, v3_descriptor(in.family, positive[0].signs), opt);
    findings.push_back(finding("selected_v3_converges", sel.realized,
                               sign_label(positive[0].signs) + " min residual " + fmt(sel.min_residual)));
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    std::string arg;
    int count = 0;
    for (const auto& d : rejected_v3_families(cfg)) {
      PatternParametrization par(cfg, d);
      const ProbeReport p = infeasibility_probe(cfg, par, rc.restarts, derive_seed(rc.seed, ++count), rc.tol, rc.parallel);
      if (p.min_residual < worst) {
        worst = p.min_residual;
        arg = d.label();
      }
    }
    findings.push_back(finding("rejected_v3_infeasible", worst > 1e-7,
                               std::to_string(count) + " families, smallest min residual " + fmt(worst) + " (" + arg + ")"));
  }

  if (rc.output == "json") {
    json j;
    j["command"] = "verify";
    j["family"] = family_name(in.family);
    j["matrix"] = format_matrix_literal(in.m);
    j["seed"] = rc.seed;
    j["findings"] = findings;
    out << j.dump(2) << "\n";
  } else {
    print_findings(findings, out);
  }
  return all_passed(findings) ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// compare

json signature_json(const Catalog& c, bool surviving_only) {
  std::map<std::string, int> sig;
  for (const auto& e : c.entries)
    if (!surviving_only || !e.pruned) ++sig[e.predicted_quotient_dim == 2 ? "sphere" : "point"];
  json j = json::object();
  for (const auto& [k, v] : sig) j[k] = v;
  return j;
}

int cmd_compare(const Input& theta, const Input& omega, const RunConfig& rc, std::ostream& out) {
  if (theta.family != Family::Theta) throw UsageError("compare expects a 3x4 theta matrix first");
  if (omega.family != Family::Omega) throw UsageError("compare expects a 2x3 omega matrix second");
  require_admissible(theta);
  require_admissible(omega);
  const FamilyComparison f = compare_families(ThetaMatrix(theta.m), OmegaMatrix(omega.m));

  json j;
  j["command"] = "compare";
  j["theta"] = format_matrix_literal(theta.m);
  j["omega"] = format_matrix_literal(omega.m);
  json cats;
  for (const auto* c : {&f.theta_twistor, &f.theta_sasakian, &f.omega_twistor, &f.omega_sasakian}) {
    json cj = catalog_json(*c);
    cj["signature"] = {{"all", signature_json(*c, false)}, {"surviving", signature_json(*c, true)}};
    cats[std::string(family_name(c->family)) + "_" + level_name(c->level)] = cj;
  }
  j["catalogs"] = cats;
  j["distinct_before_pruning"] = f.distinct_before_pruning;
  j["distinct_after_pruning"] = f.distinct_after_pruning;
  j["structurally_distinct"] = f.structurally_distinct;

  if (rc.output == "json") {
    out << j.dump(2) << "\n";
  } else {
    for (const auto& [name, cj] : cats.items()) {
      out << name << ": " << cj["counts"]["listed"].get<int>() << " listed, " << cj["counts"]["surviving"].get<int>()
          << " surviving; signature " << cj["signature"]["all"].dump() << " -> " << cj["signature"]["surviving"].dump()
          << "\n";
    }
    out << "distinct before pruning: " << (f.distinct_before_pruning ? "yes" : "no") << "\n";
    out << "distinct after pruning: " << (f.distinct_after_pruning ? "yes" : "no") << "\n";
    out << (f.structurally_distinct ? "STRUCTURALLY DISTINCT" : "NOT DISTINGUISHED") << "\n";
  }
  return f.structurally_distinct ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// search

int cmd_search(const RunConfig& rc, std::ostream& out) {
  if (rc.bound < 0 || rc.bound > 6) throw UsageError("--bound must lie in [0, 6]");
  const SearchReport r = free_impossibility_search(rc.bound, rc.parallel);
  bool symbolic_ok = true;
  json sym = json::array();
  for (const auto& s : r.symbolic) {
    symbolic_ok = symbolic_ok && !s.consistent;
    json minors = json::array();
    for (const auto& m : s.minors) minors.push_back(rational_text(m));
    sym.push_back({{"xyzw", s.xyzw}, {"minors", minors}, {"remaining_boxes", s.remaining_boxes}, {"consistent", s.consistent}});
  }
  json cex = json::array();
  for (const auto& m : r.counterexamples) cex.push_back(format_matrix_literal(m));
  json findings = json::array();
  findings.push_back(finding("no_free_action", r.counterexamples.empty(),
                             std::to_string(r.counterexamples.size()) + " free actions found among " +
                                 std::to_string(r.admissible) + " admissible matrices"));
  findings.push_back(finding("symbolic_system_violated", symbolic_ok,
                             std::to_string(r.symbolic.size()) + " unit-box sign choices checked"));

  if (rc.output == "json") {
    json j;
    j["command"] = "search";
    j["bound"] = r.bound;
    j["scanned"] = r.scanned;
    j["admissible"] = r.admissible;
    j["all_unit_boxes"] = r.all_unit_boxes;
    j["free_actions_found"] = r.counterexamples.size();
    j["counterexamples"] = cex;
    j["symbolic"] = sym;
    j["findings"] = findings;
    out << j.dump(2) << "\n";
  } else {
    out << r.counterexamples.size() << " free actions found (bound " << r.bound << ", " << r.scanned << " matrices, "
        << r.admissible << " admissible)\n";
    for (const auto& s : sym) out << "  (X,Y,Z,W) = " << s["xyzw"].dump() << " minors " << s["minors"].dump()
                                  << " remaining boxes " << s["remaining_boxes"].dump()
                                  << (s["consistent"].get<bool>() ? " consistent" : " violated") << "\n";
    print_findings(findings, out);
  }
  return all_passed(findings) ? kPass : kFail;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("QKREDUCE_SEED");
  if (!v || !*v) return std::nullopt;
  std::size_t used = 0;
  std::uint64_t s = 0;
  try {
    s = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw UsageError(std::string("QKREDUCE_SEED is not an integer: ") + v);
  }
  if (used != std::string(v).size()) throw UsageError(std::string("QKREDUCE_SEED is not an integer: ") + v);
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singular strata of quaternion-Kaehler toric reductions", "qkreduce"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig rc;
  std::string seed_text;
  auto* seed_opt = app.add_option("--seed", seed_text, "RNG seed (fallback: QKREDUCE_SEED, then 7)");
  app.add_flag("--strict", rc.strict, "Require an explicit seed for randomized commands");
  app.add_option("--output", rc.output, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--level", rc.level, "Catalog level")->check(CLI::IsMember({"twistor", "sasakian"}));
  app.add_option("--family", rc.family, "Override shape-based family detection")
      ->check(CLI::IsMember({"auto", "theta", "omega"}));
  app.add_option("--n", rc.n, "Number of sampled points");
  app.add_option("--bound", rc.bound, "Entry bound for the exhaustive search");
  app.add_option("--restarts", rc.restarts, "Random restarts per stratum")->check(CLI::PositiveNumber);
  app.add_option("--tol-residual", rc.tol.residual, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-rank", rc.tol.rank, "Relative singular-value cutoff")->check(CLI::PositiveNumber);
  app.add_option("--parallel", rc.parallel, "Worker threads")->check(CLI::Range(1, 256));

  std::string matrix, theta_text, omega_text;
  auto* check = app.add_subcommand("check", "Admissibility and determinant table");
  check->add_option("matrix", matrix, "Weight matrix, rows separated by '/'")->required();
  auto* strata = app.add_subcommand("strata", "Catalog of singular strata with numeric checks");
  strata->add_option("matrix", matrix)->required();
  auto* sample = app.add_subcommand("sample", "Project random points onto N and measure ranks");
  sample->add_option("matrix", matrix)->required();
  auto* verify = app.add_subcommand("verify", "Run the property suite on one matrix");
  verify->add_option("matrix", matrix)->required();
  auto* compare = app.add_subcommand("compare", "Compare a theta and an omega catalog");
  compare->add_option("theta", theta_text)->required();
  compare->add_option("omega", omega_text)->required();
  auto* search = app.add_subcommand("search", "Exhaustive search for free actions");

  std::vector<std::string> storage{"qkreduce"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (seed_opt->count() > 0) {
      std::size_t used = 0;
      try {
        rc.seed = std::stoull(seed_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != seed_text.size()) throw UsageError("--seed is not an integer: " + seed_text);
      rc.seed_given = true;
    } else if (const auto s = env_seed()) {
      rc.seed = *s;
      rc.seed_given = true;
    }
    const bool randomized = strata->parsed() || sample->parsed() || verify->parsed();
    if (rc.strict && randomized && !rc.seed_given) throw UsageError("--strict requires --seed or QKREDUCE_SEED");

    if (check->parsed()) return cmd_check(parse_input(matrix, rc.family), rc, out);
    if (strata->parsed()) return cmd_strata(parse_input(matrix, rc.family), rc, out);
    if (sample->parsed()) return cmd_sample(parse_input(matrix, rc.family), rc, out);
    if (verify->parsed()) return cmd_verify(parse_input(matrix, rc.family), rc, out);
    if (compare->parsed()) return cmd_compare(parse_input(theta_text, "auto"), parse_input(omega_text, "auto"), rc, out);
    if (search->parsed()) return cmd_search(rc, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Inadmissible& e) {
    if (rc.output == "json") {
      json j;
      j["error"] = "inadmissible";
      j["witness"] = e.witness;
      out << j.dump(2) << "\n";
    }
    err << "error: " << e.what() << " (witness " << e.witness << ")\n";
    return kInadmissible;
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace qkr::cli
