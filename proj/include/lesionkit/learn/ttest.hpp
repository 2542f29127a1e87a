#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "lesionkit/core/error.hpp"

namespace lesionkit::learn {

enum class TTestKind { welch, paired };

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
};

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 500;
  constexpr double eps = 1e-15, tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

namespace detail {

inline void mean_var(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("t-test: non-finite sample");
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
}

}  // namespace detail

// Two-sided Welch test. With zero variance in both samples: equal means give
// t = 0, p = 1; different means give t = +-inf, p = 0.
inline TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch_t_test needs at least 2 samples per group");
  double ma, va, mb, vb;
  detail::mean_var(a, ma, va);
  detail::mean_var(b, mb, vb);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = va / na, qb = vb / nb, se2 = qa + qb;
  TTestResult r;
  if (se2 == 0.0) {
    r.dof = na + nb - 2.0;
    if (ma == mb) return r;
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  r.p = student_t_two_sided(r.t, r.dof);
  return r;
}

// Paired test on a[i] - b[i] (e.g. accuracies on shared folds).
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("paired_t_test: samples differ in length");
  if (a.size() < 2) throw InvalidArgument("paired_t_test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double md, vd;
  detail::mean_var(d, md, vd);
  TTestResult r;
  r.dof = static_cast<double>(d.size()) - 1.0;
  if (vd == 0.0) {
    if (md == 0.0) return r;
    r.t = md > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = md / std::sqrt(vd / static_cast<double>(d.size()));
  r.p = student_t_two_sided(r.t, r.dof);
  return r;
}

inline TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b,
                          TTestKind kind = TTestKind::welch) {
  return kind == TTestKind::welch ? welch_t_test(a, b) : paired_t_test(a, b);
}

}  // namespace lesionkit::learn
