#pragma once

#include <cmath>
#include <functional>

#include "neqsteady/errors.hpp"

namespace neqsteady::quad {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr int kGaussN = 15;
inline constexpr double kGaussX[kGaussN] = {
    -0.98799251802048538, -0.93727339240070595, -0.84820658341042721, -0.72441773136017007,
    -0.57097217260853883, -0.39415134707756339, -0.20119409399743451, 0.0,
    0.20119409399743451,  0.39415134707756339,  0.57097217260853883,  0.72441773136017007,
    0.84820658341042721,  0.93727339240070595,  0.98799251802048538};
inline constexpr double kGaussW[kGaussN] = {
    0.030753241996118647, 0.070366047488108069, 0.10715922046717177, 0.13957067792615391,
    0.16626920581699378,  0.18616100001556188,  0.19843148532711125, 0.2025782419255609,
    0.19843148532711125,  0.18616100001556188,  0.16626920581699378, 0.13957067792615391,
    0.10715922046717177,  0.070366047488108069, 0.030753241996118647};

using Fn = std::function<double(double)>;

inline double gauss15(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGaussN; ++i) s += kGaussW[i] * f(c + h * kGaussX[i]);
  return s * h;
}

namespace detail {

inline double adaptive_rec(const Fn& f, double a, double b, double whole, double abs_tol,
                           int depth) {
  if (depth > 40)
    fail_numerical("QuadratureFailure", "adaptive quadrature exceeded recursion depth");
  const double mid = 0.5 * (a + b);
  const double left = gauss15(f, a, mid);
  const double right = gauss15(f, mid, b);
  if (std::abs(left + right - whole) <= abs_tol) return left + right;
  return adaptive_rec(f, a, mid, left, 0.5 * abs_tol, depth + 1) +
         adaptive_rec(f, mid, b, right, 0.5 * abs_tol, depth + 1);
}

}  // namespace detail

// Adaptive composite Gauss with an absolute tolerance scaled off the first
// whole-interval estimate (rel_tol relative to max(1, |estimate|)).
inline double integrate(const Fn& f, double a, double b, double rel_tol = 1e-10) {
  if (!(a < b)) return 0.0;
  const double whole = gauss15(f, a, b);
  const double abs_tol = rel_tol * std::max(1.0, std::abs(whole));
  return detail::adaptive_rec(f, a, b, whole, abs_tol, 0);
}

// Principal value of integral_a^b f(v)/(v - pole) dv for a < pole < b.
// The symmetric window [pole-h, pole+h] is folded to the regular integrand
// (f(pole+s) - f(pole-s))/s; the fold is exact for every window size, which
// the window-halving consistency check below exploits.
inline double principal_value(const Fn& f, double a, double b, double pole,
                              double rel_tol = 1e-8) {
  if (!(a < b)) fail_numerical("QuadratureFailure", "empty principal-value interval");
  if (pole <= a || pole >= b) {
    // Pole outside the domain: the kernel is regular, no exclusion needed.
    return integrate([&](double v) { return f(v) / (v - pole); }, a, b, rel_tol * 1e-2);
  }

  const auto evaluate = [&](double h) {
    const Fn folded = [&](double s) { return (f(pole + s) - f(pole - s)) / s; };
    double val = integrate(folded, 0.0, h, rel_tol * 1e-2);
    if (pole - h > a)
      val += integrate([&](double v) { return f(v) / (v - pole); }, a, pole - h, rel_tol * 1e-2);
    if (pole + h < b)
      val += integrate([&](double v) { return f(v) / (v - pole); }, pole + h, b, rel_tol * 1e-2);
    return val;
  };

  const double h = 0.5 * std::min(pole - a, b - pole);
  const double v1 = evaluate(h);
  const double v2 = evaluate(0.5 * h);
  if (std::abs(v1 - v2) > rel_tol * std::max(1.0, std::abs(v2)))
    fail_numerical("QuadratureFailure",
                   "principal-value window-halving check failed (divergent or pathological integrand)");
  return v2;
}

}  // namespace neqsteady::quad
