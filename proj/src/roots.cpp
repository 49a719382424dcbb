#include "krf/roots.hpp"

#include <algorithm>
#include <cmath>

#include "krf/errors.hpp"

namespace krf {

namespace {

using cd = std::complex<double>;

// p / p' at x, evaluated through the reversed polynomial when |x| > 1 to avoid overflow.
cd newton_ratio(std::span<const cd> c, cd x) {
  const int n = static_cast<int>(c.size()) - 1;
  if (std::abs(x) <= 1.0) {
    cd p = c[n], dp = 0.0;
    for (int k = n - 1; k >= 0; --k) {
      dp = dp * x + p;
      p = p * x + c[k];
    }
    return p / dp;
  }
  const cd y = 1.0 / x;
  cd q = c[0], dq = 0.0;
  for (int k = 1; k <= n; ++k) {
    dq = dq * y + q;
    q = q * y + c[k];
  }
  // p(x) = x^n q(y), p'(x) = x^{n-1} (n q(y) - y q'(y)).
  return x / (static_cast<double>(n) - y * dq / q);
}

std::vector<cd> initial_guesses(std::span<const cd> c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<int> idx;
  std::vector<double> lg(n + 1);
  for (int k = 0; k <= n; ++k) lg[k] = std::abs(c[k]) > 0.0 ? std::log(std::abs(c[k])) : -1e300;
  for (int k = 0; k <= n; ++k) {
    if (lg[k] <= -1e299) continue;
    while (idx.size() >= 2) {
      const int a = idx[idx.size() - 2], b = idx.back();
      // Drop b when it lies on or below the segment a..k.
      if ((lg[b] - lg[a]) * (k - a) <= (lg[k] - lg[a]) * (b - a)) idx.pop_back();
      else break;
    }
    idx.push_back(k);
  }
  std::vector<cd> z;
  const double sigma = 0.7;
  for (size_t s = 0; s + 1 < idx.size(); ++s) {
    const int a = idx[s], b = idx[s + 1], m = b - a;
    const double r = std::exp((lg[a] - lg[b]) / m);
    for (int j = 0; j < m; ++j) {
      const double ang = 2.0 * M_PI * j / m + 2.0 * M_PI * s / n + sigma;
      z.push_back(std::polar(r, ang));
    }
  }
  return z;
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(std::span<const std::complex<double>> coeffs) {
  int hi = static_cast<int>(coeffs.size()) - 1;
  while (hi >= 0 && coeffs[hi] == 0.0) --hi;
  if (hi < 0) fail(ErrorCode::InvalidArgument, "zero polynomial has no finite root set");
  int lo = 0;
  while (coeffs[lo] == 0.0) ++lo;
  std::vector<cd> out(lo, cd(0.0));
  if (hi == lo) return out;
  std::span<const cd> c = coeffs.subspan(lo, hi - lo + 1);
  const int n = hi - lo;
  if (n == 1) {
    out.push_back(-c[0] / c[1]);
    return out;
  }
  std::vector<cd> z = initial_guesses(c);
  std::vector<bool> done(n, false);
  for (int iter = 0; iter < 1000; ++iter) {
    bool all = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      const cd ratio = newton_ratio(c, z[i]);
      cd s = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      const cd corr = ratio / (1.0 - ratio * s);
      z[i] -= corr;
      if (!std::isfinite(z[i].real()) || !std::isfinite(z[i].imag()))
        fail(ErrorCode::SolverFailure, "root iteration diverged");
      if (std::abs(corr) <= 4e-16 * std::abs(z[i])) done[i] = true;
      else all = false;
    }
    if (all) break;
  }
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

}  // namespace krf
