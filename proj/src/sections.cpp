#include "envlab/sections.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "envlab/envelope.hpp"
#include "envlab/envelope2d.hpp"
#include "envlab/errors.hpp"
#include "envlab/gamma.hpp"
#include "envlab/quadrature.hpp"

namespace envlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double x, double y) {
  const double m = std::max(x, y);
  if (m == kNegInf) return kNegInf;
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

/// Full node/weight list of an N-point Gauss rule on [lo, hi].
template <unsigned N>
void gauss_nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& wts) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& a = rule::abscissa();
  const auto& w = rule::weights();
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(c);
      wts.push_back(h * w[i]);
      continue;
    }
    x.push_back(c - h * a[i]);
    wts.push_back(h * w[i]);
    x.push_back(c + h * a[i]);
    wts.push_back(h * w[i]);
  }
}

/// Nodes of ∫_0^∞ g(r) dr through r = tan(θπ/2), θ in four Gauss panels.
void half_line_nodes(std::vector<double>& r, std::vector<double>& wts) {
  std::vector<double> th, tw;
  const double cuts[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int p = 0; p < 4; ++p) gauss_nodes<20>(cuts[p], cuts[p + 1], th, tw);
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double x = 0.5 * M_PI * th[i];
    const double c = std::cos(x);
    r.push_back(std::tan(x));
    wts.push_back(tw[i] * 0.5 * M_PI / (c * c));
  }
}

std::vector<double> monomial_lines(const SampledWeight& w, int d, int m, std::vector<double>& slopes,
                                   std::vector<int>& ks) {
  if (m < 1) throw InvalidParameterError("tensor power m must be at least 1");
  if (d < 0) throw InvalidParameterError("degree d must be non-negative");
  const double lo = std::max(0.0, w.slope_left());
  const double hi = std::min(static_cast<double>(d), w.slope_right());
  if (lo > hi) throw NoEnvelopeError("no monomial slope k/m lies in the slope range of the weight");
  const ConjugateWeight conj = legendre_transform(w, {lo, hi});
  std::vector<double> conj_values;
  for (int k = 0; k <= m * d; ++k) {
    const double sigma = static_cast<double>(k) / m;
    if (sigma < lo || sigma > hi) continue;
    slopes.push_back(sigma);
    ks.push_back(k);
    conj_values.push_back(conj(sigma));
  }
  if (ks.empty()) throw NoEnvelopeError("no monomial slope k/m lies in the slope range of the weight");
  return conj_values;
}

SampledWeight max_of_monomials(const SampledWeight& w, const std::vector<double>& slopes,
                               const std::vector<double>& offsets) {
  std::vector<double> intercept(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) intercept[i] = -offsets[i];
  return SampledWeight(w.grid(), max_of_lines(slopes, intercept, w.grid()), slopes.front(), slopes.back());
}

}  // namespace

void ToricSection::validate(int d) const {
  if (m < 1) throw InvalidInputError("section power must be at least 1");
  bool nonzero = false;
  for (const auto& [k, c] : coefficients) {
    if (k < 0 || k > m * d) throw InvalidInputError("monomial exponent outside [0, m·d]");
    if (c != 0.0) nonzero = true;
  }
  if (!nonzero) throw InvalidInputError("section has no nonzero coefficient");
}

double ToricSection::log_modulus(double s, double theta) const {
  std::complex<double> sum = 0.0;
  for (const auto& [k, c] : coefficients) sum += c * std::exp(std::complex<double>(0.5 * k * s, k * theta));
  return std::log(std::norm(sum)) / m;
}

SampledWeight psi1_approximant(const SampledWeight& w, int d, int m) {
  std::vector<double> slopes;
  std::vector<int> ks;
  const std::vector<double> conj = monomial_lines(w, d, m, slopes, ks);
  return max_of_monomials(w, slopes, conj);
}

double log_monomial_norm(const SampledWeight& w, int k, int m, const BaseMeasure& mu) {
  if (m < 1) throw InvalidParameterError("tensor power m must be at least 1");
  const double sigma = static_cast<double>(k) / m;
  if (sigma < w.slope_left() || sigma > w.slope_right())
    throw UnboundedTransformError("monomial slope outside the slope range of the weight");
  const ConjugateWeight conj = legendre_transform(w, {sigma, sigma});
  const double peak_value = conj.values.front();
  const double peak_s = w.grid()[conj.support.front()];
  const double log_rho_peak = std::log(mu.density(peak_s));

  // Integrand relative to its value at the peak.
  auto log_g = [&](double s, double u) {
    return m * (sigma * s - u - peak_value) + std::log(mu.density(s)) - log_rho_peak;
  };
  const auto& x = w.grid();
  const auto& u = w.values();
  double total = 0.0;
  std::vector<double> nodes, weights;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    nodes.clear();
    weights.clear();
    gauss_nodes<15>(x[i], x[i + 1], nodes, weights);
    const double slope = (u[i + 1] - u[i]) / (x[i + 1] - x[i]);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      total += weights[q] * std::exp(log_g(nodes[q], u[i] + slope * (nodes[q] - x[i])));
  }
  const double x_lo = x.front(), x_hi = x.back();
  const double sl = w.slope_left(), sr = w.slope_right();
  total += integrate_half_line([&](double r) { return std::exp(log_g(x_hi + r, u.back() + sr * r)); }).value;
  total += integrate_half_line([&](double r) { return std::exp(log_g(x_lo - r, u.front() - sl * r)); }).value;
  if (!(total > 0.0) || !std::isfinite(total))
    throw PrecisionError("monomial norm integral is not positive and finite", total, 0.0);
  return peak_value + (log_rho_peak + std::log(total)) / m;
}

SampledWeight psi2_approximant(const SampledWeight& w, int d, int m, const BaseMeasure& mu) {
  std::vector<double> slopes;
  std::vector<int> ks;
  monomial_lines(w, d, m, slopes, ks);
  std::vector<double> offsets(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) offsets[i] = log_monomial_norm(w, ks[i], m, mu);
  return max_of_monomials(w, slopes, offsets);
}

ComparisonConstants comparison_constants(const SampledWeight& w, const std::vector<ChartBox>& boxes,
                                         const BaseMeasure& mu) {
  require_cover(boxes, w.grid().front(), w.grid().back());
  ComparisonConstants cc;
  for (const auto& box : boxes) {
    double hi = kNegInf, lo = -kNegInf;
    for (double s : box_samples(box, w.grid())) {
      hi = std::max(hi, w(s));
      lo = std::min(lo, w(s));
    }
    cc.c1 = std::max(cc.c1, hi - lo);
  }
  cc.c2 = log_max_density_ratio(mu, boxes, w.grid());
  cc.total = cc.c1 + cc.c2;
  return cc;
}

VerificationReport check_sandwich(const SampledWeight& w, int d, int m, const ComparisonConstants& cc,
                                  const BaseMeasure& mu, double tol) {
  Stopwatch clock;
  const SampledWeight p1 = psi1_approximant(w, d, m);
  const SampledWeight p2 = psi2_approximant(w, d, m, mu);
  const double lo = std::max(0.0, w.slope_left());
  const double hi = std::min(static_cast<double>(d), w.slope_right());
  const SampledWeight ue = equilibrium_envelope(w, {lo, hi});

  double lower = 0.0, upper = 0.0, gap = kNegInf, abs_gap = 0.0, l2_vs_sup = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double a = p1.values()[j], b = p2.values()[j], e = ue.values()[j];
    lower = std::max(lower, b - cc.total - a);
    upper = std::max(upper, a - e);
    gap = std::max(gap, e - b);
    abs_gap = std::max(abs_gap, std::abs(e - b));
    l2_vs_sup = std::max(l2_vs_sup, a - b);
  }
  const bool big = d >= 1;
  VerificationReport rep;
  rep.check = "bergman-sandwich";
  rep.anchor = "bergman-sandwich";
  rep.tolerance = tol;
  rep.max_violation = std::max(lower, upper);
  rep.passed = rep.max_violation <= tol;
  rep.grid = {{"n_s", w.size()}, {"s_range", {w.grid().front(), w.grid().back()}}, {"m", m}, {"d", d}};
  rep.details = {{"psi2_minus_C_over_psi1", lower},
                 {"psi1_over_envelope", upper},
                 {"psi1_over_psi2", l2_vs_sup},
                 {"C_prime", cc.total},
                 {"C1_prime", cc.c1},
                 {"C2_prime", cc.c2},
                 {"big_case", big},
                 {"measure", mu.name}};
  if (big) {
    rep.details["epsilon_m"] = gap;
    rep.details["abs_gap"] = abs_gap;
  }
  rep.wall_time_s = clock.seconds();
  return rep;
}

VerificationReport sandwich_suite(const SampledWeight& w, int d, const std::vector<int>& ms,
                                  const BaseMeasure& mu, double tol) {
  Stopwatch clock;
  const auto boxes = doubled(unit_cover(w.grid().front(), w.grid().back()));
  const ComparisonConstants cc = comparison_constants(w, boxes, mu);
  VerificationReport rep;
  rep.check = "bergman-sandwich";
  rep.anchor = "bergman-sandwich";
  rep.tolerance = tol;
  rep.passed = true;
  nlohmann::json per_m = nlohmann::json::array();
  std::vector<double> gaps;
  for (int m : ms) {
    VerificationReport r = check_sandwich(w, d, m, cc, mu, tol);
    rep.max_violation = std::max(rep.max_violation, r.max_violation);
    rep.passed = rep.passed && r.passed;
    nlohmann::json entry = r.details;
    entry["m"] = m;
    entry["max_violation"] = r.max_violation;
    per_m.push_back(entry);
    if (d >= 1) gaps.push_back(r.details["abs_gap"].get<double>());
  }
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) decreasing = decreasing && gaps[i + 1] < gaps[i];
  rep.passed = rep.passed && decreasing;
  rep.grid = {{"n_s", w.size()}, {"s_range", {w.grid().front(), w.grid().back()}}, {"ms", ms}, {"d", d},
              {"boxes", boxes.size()}};
  rep.details = {{"per_m", per_m}, {"gap_decreasing", decreasing}, {"gaps", gaps}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

void TotalSpaceSection::validate(const ModelBundlePair& pair) const {
  if (m < 1) throw InvalidInputError("section power must be at least 1");
  if (terms.empty()) throw InvalidInputError("section has no terms");
  bool nonzero = false;
  for (const auto& t : terms) {
    if (t.l < 0 || t.l > m) throw InvalidInputError("fiber exponent outside [0, m]");
    if (t.k < 0 || t.k > t.l * pair.d_A + (m - t.l) * pair.d_L)
      throw InvalidInputError("base exponent outside [0, l·d_A + (m−l)·d_L]");
    if (t.c != 0.0) nonzero = true;
  }
  if (!nonzero) throw InvalidInputError("section has no nonzero coefficient");
}

TotalSpaceQuadrature::TotalSpaceQuadrature(const ModelBundlePair& pair, int m, const BaseMeasure& mu)
    : pair_(pair), m_(m), mu_(mu) {
  pair_.validate();
  if (m < 1) throw InvalidParameterError("tensor power m must be at least 1");
  const auto& x = pair_.grid();
  std::vector<double> s_nodes, s_wts;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) gauss_nodes<8>(x[i], x[i + 1], s_nodes, s_wts);
  std::vector<double> r_unit, r_wts;
  half_line_nodes(r_unit, r_wts);
  for (std::size_t q = 0; q < r_unit.size(); ++q) {
    s_nodes.push_back(x.back() + r_unit[q]);
    s_wts.push_back(r_wts[q]);
    s_nodes.push_back(x.front() - r_unit[q]);
    s_wts.push_back(r_wts[q]);
  }
  for (std::size_t j = 0; j < s_nodes.size(); ++j) {
    const double s = s_nodes[j];
    const double pa = pair_.phi_A(s), pl = pair_.phi_L(s);
    const double log_mu = std::log(mu_.density(s)) + std::log(s_wts[j]);
    const double log_scale = 0.5 * (pl - pa);
    for (std::size_t q = 0; q < r_unit.size(); ++q) {
      const double log_r = log_scale + std::log(r_unit[q]);
      const double log_den = log_add_exp(2.0 * log_r + pa, pl);
      const double log_rho = std::log(2.0) + log_r + pa + pl - 2.0 * log_den;
      log_r_.push_back(log_r);
      s_.push_back(s);
      log_weight_.push_back(log_mu + std::log(r_wts[q]) + log_scale + log_rho - m_ * log_den);
    }
  }
}

double TotalSpaceQuadrature::moment(int n_r, int n_s) {
  const auto key = std::make_pair(n_r, n_s);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  double sum = 0.0;
  for (std::size_t i = 0; i < s_.size(); ++i) sum += std::exp(n_r * log_r_[i] + 0.5 * n_s * s_[i] + log_weight_[i]);
  cache_[key] = sum;
  return sum;
}

namespace {

/// B(l+1, m−l+1)·∫ e^{ks − lφ_A + (l−m)φ_L} dμ(s), the diagonal moment J(2l, 2k) in closed fiber form.
double diagonal_moment_by_beta(const ModelBundlePair& pair, const BaseMeasure& mu, int m, int l, int k) {
  auto f = [&](double s) {
    return std::exp(k * s - l * pair.phi_A(s) + (l - m) * pair.phi_L(s)) * mu.density(s);
  };
  const auto& x = pair.grid();
  double base = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) base += integrate(f, x[i], x[i + 1], 1e-13).value;
  base += integrate_half_line([&](double r) { return f(x.back() + r); }, 1.0, 1e-13).value;
  base += integrate_half_line([&](double r) { return f(x.front() - r); }, 1.0, 1e-13).value;
  return beta(l + 1.0, m - l + 1.0) * base;
}

}  // namespace

VerificationReport coefficient_inequality(const TotalSpaceSection& F, TotalSpaceQuadrature& quad, double tol) {
  Stopwatch clock;
  const ModelBundlePair& pair = quad.pair();
  F.validate(pair);
  if (F.m != quad.m()) throw InvalidInputError("section power differs from the quadrature power");
  const int m = F.m;
  int k_max = 0;
  for (const auto& t : F.terms) k_max = std::max(k_max, t.k);

  // Discrete angular averages of e^{ijθ}: exact for |j| below the number of points.
  auto angular = [](int j, int n) {
    std::complex<double> acc = 0.0;
    for (int p = 0; p < n; ++p) acc += std::exp(std::complex<double>(0.0, 2.0 * M_PI * j * p / n));
    return acc / static_cast<double>(n);
  };
  const int n_fiber = m + 1;
  const int n_base = k_max + 1;

  double total = 0.0;
  std::map<int, double> term;
  for (const auto& p : F.terms) {
    for (const auto& q : F.terms) {
      const double moment = quad.moment(p.l + q.l, p.k + q.k);
      const std::complex<double> cc = p.c * std::conj(q.c);
      const std::complex<double> g_base = angular(p.k - q.k, n_base);
      total += std::real(cc * angular(p.l - q.l, n_fiber) * g_base) * moment;
      if (p.l == q.l) term[p.l] += std::real(cc * g_base) * moment;
    }
  }

  double term_sum = 0.0;
  double worst_excess = 0.0;
  nlohmann::json terms = nlohmann::json::object();
  for (const auto& [l, v] : term) {
    term_sum += v;
    worst_excess = std::max(worst_excess, v - total);
    terms[std::to_string(l)] = v;
  }
  const double parseval = std::abs(term_sum - total) / std::max(std::abs(total), 1e-300);

  double beta_error = 0.0;
  for (const auto& t : F.terms) {
    const double by_beta = diagonal_moment_by_beta(pair, quad.measure(), m, t.l, t.k);
    beta_error = std::max(beta_error, std::abs(quad.moment(2 * t.l, 2 * t.k) / by_beta - 1.0));
  }

  VerificationReport rep;
  rep.check = "coefficient-inequality";
  rep.anchor = "coefficient-inequality";
  rep.tolerance = tol;
  rep.max_violation = std::max({worst_excess > 0.0 ? worst_excess / total : 0.0, parseval, beta_error});
  rep.passed = rep.max_violation <= tol;
  rep.grid = {{"m", m}, {"n_s", pair.grid().size()}, {"fiber_angles", n_fiber}, {"base_angles", n_base}};
  rep.details = {{"total", total},
                 {"terms", terms},
                 {"term_sum", term_sum},
                 {"parseval_relative_error", parseval},
                 {"beta_relative_error", beta_error},
                 {"n_terms", F.terms.size()}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

VerificationReport coefficient_inequality(const TotalSpaceSection& F, const ModelBundlePair& pair, int m,
                                          double tol) {
  TotalSpaceQuadrature quad(pair, m);
  return coefficient_inequality(F, quad, tol);
}

TotalSpaceSection random_total_space_section(std::mt19937_64& rng, const ModelBundlePair& pair, int m,
                                             int max_terms) {
  std::uniform_int_distribution<int> count(1, std::max(1, max_terms));
  std::uniform_int_distribution<int> fiber(0, m);
  std::normal_distribution<double> normal;
  TotalSpaceSection F;
  F.m = m;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int l = fiber(rng);
    std::uniform_int_distribution<int> base(0, l * pair.d_A + (m - l) * pair.d_L);
    const int k = base(rng);
    F.terms.push_back({l, k, {normal(rng), normal(rng)}});
  }
  return F;
}

}  // namespace envlab
