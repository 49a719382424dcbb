#pragma once

#include <complex>
#include <span>
#include <vector>

namespace krf {

// All complex roots of sum_k c[k] x^k by Aberth-Ehrlich iteration, started on the circles given by
// the upper convex hull of (k, log|c_k|). Roots of very different magnitudes keep relative accuracy.
// Exact zero roots (vanishing low coefficients) are returned as 0.
std::vector<std::complex<double>> polynomial_roots(std::span<const std::complex<double>> c);

}  // namespace krf
