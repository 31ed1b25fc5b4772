#include "ldrt/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/math/tools/toms748_solve.hpp>

namespace ldrt {

Potential Potential::log_weights(std::span<const double> weights) {
  Potential p;
  p.values.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0)) throw Error(Errc::BadInput, "log_weights entries must be positive");
    p.values(static_cast<Eigen::Index>(i)) = std::log(weights[i]);
  }
  return p;
}

PressureResult pressure_data(const Eigen::MatrixXi& transitions, const Eigen::VectorXd& potential) {
  if (potential.size() != transitions.cols() || !potential.allFinite())
    throw Error(Errc::BadInput, "potential must be finite with one value per branch");
  // Shift by the largest entry so exp() never overflows; the shift returns additively.
  const double shift = potential.maxCoeff();
  const Eigen::RowVectorXd weights = (potential.array() - shift).exp().matrix().transpose();
  const Eigen::MatrixXd m = transitions.cast<double>().array().rowwise() * weights.array();
  const auto data = perron(m);
  return {shift + std::log(data.radius), data.left, data.right};
}

double pressure(const Eigen::MatrixXi& transitions, const Eigen::VectorXd& potential) {
  if (potential.size() != transitions.cols() || !potential.allFinite())
    throw Error(Errc::BadInput, "potential must be finite with one value per branch");
  const double shift = potential.maxCoeff();
  const Eigen::RowVectorXd weights = (potential.array() - shift).exp().matrix().transpose();
  const Eigen::MatrixXd m = transitions.cast<double>().array().rowwise() * weights.array();
  return shift + std::log(spectral_radius(m));
}

double pressure(const MarkovMap& map, const Potential& potential) { return pressure(map.transitions(), potential.values); }

GibbsMeasure gibbs_measure(const MarkovMap& map, const Potential& potential, int n_check) {
  const int m = map.size();
  const auto perron_data = pressure_data(map.transitions(), potential.values);

  GibbsMeasure g;
  g.map_ = map;
  g.potential_ = potential.values;
  g.pressure_ = perron_data.value;
  g.log_psi_ = potential.values.array() - g.pressure_;

  const Eigen::VectorXd& h = perron_data.right;
  const Eigen::VectorXd& l = perron_data.left;
  const Eigen::MatrixXd a = map.transitions().cast<double>();
  g.transition_.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) g.transition_(i, j) = a(i, j) * std::exp(g.log_psi_(j)) * h(j) / h(i);
    g.transition_.row(i) /= g.transition_.row(i).sum();  // exact in theory; removes rounding drift
  }
  g.stationary_ = l.cwiseProduct(h);
  g.stationary_ /= g.stationary_.sum();

  // Gibbs constant. For a locally constant potential the ratio
  // mu(cyl w) / exp(S_n zeta - n P) equals pi_f e^{-log psi_f} h_l / h_f,
  // which only depends on the first (f) and last (l) symbols of w. Certify
  // it over every (f, l) pair joined by an admissible word of length <= n_check.
  Eigen::MatrixXi reach = Eigen::MatrixXi::Identity(m, m);
  Eigen::MatrixXi seen = reach;
  for (int n = 2; n <= n_check; ++n) {
    reach = ((reach * map.transitions()).array() > 0).cast<int>();
    seen = ((seen + reach).array() > 0).cast<int>();
  }
  double kappa = 1.0;
  for (int f = 0; f < m; ++f)
    for (int last = 0; last < m; ++last) {
      if (!seen(f, last)) continue;
      const double ratio = g.stationary_(f) * std::exp(-g.log_psi_(f)) * h(last) / h(f);
      kappa = std::max({kappa, ratio, 1.0 / ratio});
    }
  g.kappa_ = kappa;

  g.bernoulli_ = (map.transitions().array() != 0).all();
  for (int i = 1; i < m && g.bernoulli_; ++i)
    g.bernoulli_ = (g.transition_.row(i) - g.transition_.row(0)).cwiseAbs().maxCoeff() < 1e-14;

  auto cumulative = [](const Eigen::VectorXd& p) {
    std::vector<double> cdf(static_cast<std::size_t>(p.size()));
    std::partial_sum(p.data(), p.data() + p.size(), cdf.begin());
    cdf.back() = 1.0;
    return cdf;
  };
  g.initial_cdf_ = cumulative(g.stationary_);
  for (int i = 0; i < m; ++i) g.row_cdf_.push_back(cumulative(g.transition_.row(i).transpose()));
  return g;
}

double GibbsMeasure::cylinder_mass(std::span<const Symbol> word) const {
  if (word.empty()) return 1.0;
  double mass = stationary_(word[0]);
  for (std::size_t k = 1; k < word.size(); ++k) mass *= transition_(word[k - 1], word[k]);
  return mass;
}

namespace {

/// Root of a decreasing function bracketed by [lo, hi], via TOMS 748.
template <typename F>
double solve_decreasing(F&& f, double lo, double hi, double tol) {
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  const auto done = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(1.0, std::abs(a)); };
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, done, iterations);
  return 0.5 * (a + b);
}

/// Solve P(-T log s + q log psi) = 0 for T. P is strictly decreasing in T.
double solve_spectrum(const Eigen::MatrixXi& transitions, const Eigen::VectorXd& log_slopes,
                      const Eigen::VectorXd& log_psi, double q, double tol) {
  auto f = [&](double t) {
    return pressure(transitions, (-t * log_slopes.array() + q * log_psi.array()).matrix());
  };
  // Moran bracket: with r_i = log psi_i / log(1/s_i) the root lies in
  // [-q max r_i, -q min r_i + 1] for full shifts; widen by one and keep doubling otherwise.
  const Eigen::ArrayXd r = log_psi.array() / (-log_slopes.array());
  double lo = std::min(-q * r.maxCoeff(), -q * r.minCoeff()) - 1.0;
  double hi = std::max(-q * r.maxCoeff(), -q * r.minCoeff()) + 1.0;
  for (int k = 0; f(lo) < 0; ++k) {
    if (k > 60) throw Error(Errc::BracketFailure, "no lower bracket for T(" + std::to_string(q) + ")");
    lo -= (hi - lo);
  }
  for (int k = 0; f(hi) > 0; ++k) {
    if (k > 60) throw Error(Errc::BracketFailure, "no upper bracket for T(" + std::to_string(q) + ")");
    hi += (hi - lo);
  }
  return solve_decreasing(f, lo, hi, tol);
}

double second_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

double richardson_second(const std::function<double(double)>& f, double x, double h) {
  const double coarse = second_difference(f, x, h);
  const double fine = second_difference(f, x, h / 2);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

double spectrum_T(const GibbsMeasure& gibbs, double q, double tol) {
  return solve_spectrum(gibbs.map().transitions(), gibbs.map().log_slopes(), gibbs.log_psi(), q, tol);
}

double moran_T(std::span<const double> p, std::span<const double> a, double q) {
  if (p.empty() || p.size() != a.size()) throw Error(Errc::BadInput, "p and a must have equal nonzero length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0) || !(a[i] > 0 && a[i] < 1)) throw Error(Errc::BadInput, "need p_i > 0 and a_i in (0,1)");
    total += p[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(Errc::BadInput, "probabilities must sum to 1");

  // log sum_i exp(q log p_i + T log a_i), strictly decreasing in T.
  auto f = [&](double t) {
    double peak = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i) peak = std::max(peak, q * std::log(p[i]) + t * std::log(a[i]));
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::exp(q * std::log(p[i]) + t * std::log(a[i]) - peak);
    return peak + std::log(s);
  };
  double lo = -1.0, hi = 1.0;
  while (f(lo) < 0) lo *= 2;
  while (f(hi) > 0) hi *= 2;
  return solve_decreasing(f, lo, hi, 1e-15);
}

double entropy(const GibbsMeasure& gibbs) {
  const auto& pi = gibbs.stationary();
  const auto& q = gibbs.transition();
  double h = 0.0;
  for (int i = 0; i < gibbs.size(); ++i)
    for (int j = 0; j < gibbs.size(); ++j)
      if (q(i, j) > 0) h -= pi(i) * q(i, j) * std::log(q(i, j));
  return h;
}

double lyapunov(const GibbsMeasure& gibbs) { return gibbs.stationary().dot(gibbs.map().log_slopes()); }

DimensionEstimate dimension(const GibbsMeasure& gibbs, double h) {
  auto t = [&](double q) { return spectrum_T(gibbs, q); };
  auto central = [&](double step) { return (t(1.0 + step) - t(1.0 - step)) / (2.0 * step); };
  DimensionEstimate d;
  d.from_spectrum = -(4.0 * central(h / 2) - central(h)) / 3.0;
  d.from_entropy = entropy(gibbs) / lyapunov(gibbs);
  if (std::abs(d.from_spectrum - d.from_entropy) > 1e-6)
    throw Error(Errc::InconsistentDimension, "-T'(1) = " + std::to_string(d.from_spectrum) +
                                                 " but h/lambda = " + std::to_string(d.from_entropy));
  return d;
}

double spectrum_curvature(const GibbsMeasure& gibbs, double h) {
  return richardson_second([&](double q) { return spectrum_T(gibbs, q); }, 1.0, h);
}

VarianceEstimate variance(const GibbsMeasure& gibbs) {
  const double d = entropy(gibbs) / lyapunov(gibbs);
  const Eigen::VectorXd y = gibbs.log_psi() + d * gibbs.map().log_slopes();
  const auto& transitions = gibbs.map().transitions();
  auto p = [&](double t) { return pressure(transitions, (gibbs.log_psi() + t * y).eval()); };

  VarianceEstimate v;
  v.from_pressure = std::max(0.0, richardson_second(p, 0.0, 1e-3));
  if (gibbs.is_bernoulli()) {
    const auto& pi = gibbs.stationary();
    const double mean = pi.dot(y);
    v.iid = std::max(0.0, pi.dot(y.cwiseProduct(y)) - mean * mean);
    const double scale = std::max(*v.iid, 1e-6);
    if (std::abs(v.from_pressure - *v.iid) > 1e-5 * scale)
      throw Error(Errc::InconsistentVariance, "pressure route " + std::to_string(v.from_pressure) +
                                                  " vs i.i.d. route " + std::to_string(*v.iid));
  }
  return v;
}

bool is_maximal_dimension(const GibbsMeasure& gibbs) {
  double worst = 0.0;
  double prev2 = spectrum_T(gibbs, -1.0), prev1 = spectrum_T(gibbs, 0.0);
  for (double q = 1.0; q <= 3.0; q += 1.0) {
    const double cur = spectrum_T(gibbs, q);
    worst = std::max(worst, std::abs(cur - 2.0 * prev1 + prev2));
    prev2 = prev1;
    prev1 = cur;
  }
  return worst < 1e-9;
}

SpectrumTable compute_spectrum(const GibbsMeasure& gibbs, double q_min, double q_max, double step) {
  if (!(step > 0) || !(q_min < q_max)) throw Error(Errc::BadInput, "spectrum grid needs q_min < q_max and step > 0");
  SpectrumTable table;
  const auto n = static_cast<std::size_t>(std::floor((q_max - q_min) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = q_min + static_cast<double>(i) * step;
    table.q.push_back(q);
    table.T.push_back(spectrum_T(gibbs, q));
  }
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    worst = std::max(worst, std::abs(table.T[i + 1] - 2.0 * table.T[i] + table.T[i - 1]));
  table.maximal_dimension = n >= 3 ? worst < 1e-9 : is_maximal_dimension(gibbs);
  table.d_mu = dimension(gibbs).value();
  table.T2_at_1 = spectrum_curvature(gibbs);
  return table;
}

Curvature curvature(const GibbsMeasure& gibbs) {
  Curvature c;
  if (is_maximal_dimension(gibbs)) {
    c.maximal_dimension = true;
    return c;
  }
  c.from_spectrum = 0.5 / spectrum_curvature(gibbs);
  c.from_variance = 0.5 * lyapunov(gibbs) / variance(gibbs).value();
  c.discrepancy = std::abs(c.from_spectrum - c.from_variance) / c.from_variance;
  return c;
}

}  // namespace ldrt
