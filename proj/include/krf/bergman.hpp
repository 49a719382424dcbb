#pragma once

#include <span>
#include <vector>

#include "krf/flow.hpp"
#include "krf/geometry.hpp"

namespace krf {

// Monomial sections z^k, k = 0..2nu, of the nu-th anticanonical power with diagonal Gram weights
// d_k = 2*pi * int e^{(k-nu)s} w^{nu+1} ds.
struct SectionSystem {
  int nu = 1;
  MetricProfile profile;
  std::vector<double> d;
  double quadrature_error = 0.0;  // relative, from comparing against the coarsened rule

  int size() const { return 2 * nu + 1; }
  // log |z^k|^2_{h^nu} at sample i, unnormalized.
  double log_monomial(int k, int i) const;
};

SectionSystem gram(const MetricProfile& p, int nu);
// Off-diagonal inner product <z^k, z^l> by quadrature over (s, theta); vanishes by symmetry.
double off_diagonal_inner(const MetricProfile& p, int nu, int k, int l, int n_theta = 32);

struct BergmanDensity {
  int nu = 1;
  std::vector<double> F;
  double inf = 0.0;
  double sup = 0.0;
};

BergmanDensity bergman_density(const SectionSystem& sys);
// Density from the sections S_a = sum_k B(a,k) z^k, orthonormalized through their Gram matrix.
// B is row-major with size (2nu+1)^2 and must be invertible.
BergmanDensity bergman_density_general(const MetricProfile& p, int nu, std::span<const double> B);
// 2*pi * int e^{nu F} w ds; equals 2nu+1.
double trace_integral(const BergmanDensity& F, const MetricProfile& p);

struct TransitionSpectrum {
  int nu = 1;
  std::vector<double> lambda;  // basis order
  double a = 1.0;
  std::vector<double> sorted() const;
};

TransitionSpectrum transition(const SectionSystem& sys0, const SectionSystem& syst);

// X = (1/nu) log sum_k lambda_k^2 |S_k|^2 with S_k orthonormal for the reference system.
std::vector<double> comparison_function(const TransitionSpectrum& spec, const SectionSystem& ref);
// sup_s |(psi - sup psi) - (X - sup X)| with psi the potential relative to the reference metric.
double partial_c0_defect(const FlowState& state, const TransitionSpectrum& spec, const SectionSystem& ref);

struct SectionNorms {
  std::vector<double> sup_S;       // sup_s |S_k|
  std::vector<double> sup_grad_S;  // sup_s |grad S_k|
  double max_S = 0.0;
  double max_grad_S = 0.0;
};

SectionNorms section_sup_norms(const SectionSystem& sys);

// max over core samples and k of |Delta|S_k|^2 - (|grad S_k|^2 - nu R |S_k|^2)|.
double laplace_identity_residual(const SectionSystem& sys, const GeometryReport& rep, double core_density = 1e-3);
// Radial Hessian identity: d/ds [k - nu + nu (log w)'] = -nu K w.
double hessian_identity_residual(const SectionSystem& sys, const GeometryReport& rep, double core_density = 1e-3);

// F for the product of two curves computed from the tensor basis z^k y^l by two-dimensional
// quadrature; row-major over (i_a, i_b).
std::vector<double> product_bergman_density(const MetricProfile& a, const MetricProfile& b, int nu);

}  // namespace krf
