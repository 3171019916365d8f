#pragma once

// Adaptive 7/15-point Gauss-Kronrod quadrature for complex-valued integrands
// on a finite interval. Panels are refined worst-first; the final sum is taken
// in left-to-right panel order with pairwise reduction so the result does not
// depend on the refinement history beyond the panel set itself.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace movq::detail {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult {
  std::complex<double> value;
  double error_estimate = 0.0;
  std::size_t panels = 0;
};

namespace gk15 {

inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes xgk[1], xgk[3], xgk[5], xgk[7].
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace gk15

struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::complex<double> value;
  double error = 0.0;
};

template <class F>
Panel gk15_panel(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::complex<double> kronrod = gk15::wgk[7] * f(center);
  std::complex<double> gauss = gk15::wg[3] * f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * gk15::xgk[j];
    const std::complex<double> sum = f(center - dx) + f(center + dx);
    kronrod += gk15::wgk[j] * sum;
    if (j % 2 == 1) gauss += gk15::wg[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

inline std::complex<double> pairwise_sum(std::span<const std::complex<double>> v) {
  if (v.size() <= 8) {
    std::complex<double> s{};
    for (const auto& x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

/// Integrates f over [a, b] starting from `initial_panels` equal panels and
/// bisecting the worst panel until the summed error estimate is <= abs_tol.
/// Throws QuadratureError when more than `max_panels` panels would be needed.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, std::size_t initial_panels,
                                    double abs_tol, std::size_t max_panels) {
  if (!(b > a)) return {};
  initial_panels = std::clamp<std::size_t>(initial_panels, 1, max_panels);

  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> queue(worse);
  double total_error = 0.0;
  const double width = (b - a) / static_cast<double>(initial_panels);
  for (std::size_t i = 0; i < initial_panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = (i + 1 == initial_panels) ? b : a + width * static_cast<double>(i + 1);
    Panel p = gk15_panel(f, lo, hi);
    total_error += p.error;
    queue.push(p);
  }

  while (total_error > abs_tol) {
    if (queue.size() >= max_panels)
      throw QuadratureError("adaptive quadrature exceeded its panel budget");
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gk15_panel(f, worst.a, mid);
    Panel right = gk15_panel(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    // Running updates drift; resum exactly when close to the target.
    if (total_error <= abs_tol) {
      auto copy = queue;
      double exact = 0.0;
      while (!copy.empty()) {
        exact += copy.top().error;
        copy.pop();
      }
      total_error = exact;
    }
  }

  std::vector<Panel> panels;
  panels.reserve(queue.size());
  while (!queue.empty()) {
    panels.push_back(queue.top());
    queue.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<std::complex<double>> values;
  values.reserve(panels.size());
  double err = 0.0;
  for (const auto& p : panels) {
    values.push_back(p.value);
    err += p.error;
  }
  return {pairwise_sum(values), err, panels.size()};
}

}  // namespace movq::detail
