#include "krf/bergman.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "krf/errors.hpp"
#include "krf/format.hpp"

namespace krf {

namespace {

constexpr double kTailTolerance = 1e-6;

double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

// Trapezoid on a uniform grid without tails.
double trapezoid(std::span<const double> f, double h, size_t stride = 1) {
  double s = 0.5 * (f.front() + f.back());
  for (size_t i = stride; i + stride < f.size(); i += stride) s += f[i];
  return s * h * double(stride);
}

void check_same_grid(const SectionSystem& a, const SectionSystem& b) {
  if (a.nu != b.nu)
    fail(ErrorCode::MismatchedSystems, "nu " + std::to_string(a.nu) + " vs " + std::to_string(b.nu));
  if (!(a.profile.grid == b.profile.grid)) fail(ErrorCode::MismatchedSystems, "section systems on different grids");
}

}  // namespace

double SectionSystem::log_monomial(int k, int i) const {
  return (k - nu) * profile.grid.s(i) + nu * std::log(profile.w[i]);
}

SectionSystem gram(const MetricProfile& p, int nu) {
  if (nu < 1) fail(ErrorCode::InvalidArgument, "tensor power nu must be >= 1, got " + std::to_string(nu));
  require_class(p);
  SectionSystem sys;
  sys.nu = nu;
  sys.profile = p;
  const int n = p.grid.N;
  const double h = p.grid.h();
  std::vector<double> f(n);
  for (int k = 0; k <= 2 * nu; ++k) {
    for (int i = 0; i < n; ++i) f[i] = std::exp((k - nu) * p.grid.s(i) + (nu + 1) * std::log(p.w[i]));
    const TailedIntegral ti = integrate_with_tails(f, h);
    if (!ti.tails_decay || !(std::abs(ti.tail) <= kTailTolerance * std::abs(ti.value)))
      fail(ErrorCode::QuadratureFailure, "Gram weight d_" + std::to_string(k) + " for nu = " + std::to_string(nu) +
                                             " has tail estimate " + fmt_double(ti.tail) + " of " +
                                             fmt_double(ti.value));
    // The trapezoid is spectrally accurate here; the coarsened rule gives a conservative estimate.
    const double fine = trapezoid(f, h);
    sys.quadrature_error = std::max(sys.quadrature_error, std::abs(fine - trapezoid(f, h, 2)) / std::abs(fine));
    sys.d.push_back(kTwoPi * (fine + ti.tail));
  }
  return sys;
}

double off_diagonal_inner(const MetricProfile& p, int nu, int k, int l, int n_theta) {
  require_positive(p);
  const int n = p.grid.N;
  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    const double s = p.grid.s(i);
    // |z|^{k+l} e^{i(k-l)theta} times the weight h^nu * omega, written in s.
    const double mod = std::exp(0.5 * (k + l) * s - nu * s + (nu + 1) * std::log(p.w[i]));
    double sr = 0.0, si = 0.0;
    for (int a = 0; a < n_theta; ++a) {
      const double th = kTwoPi * a / n_theta;
      sr += std::cos((k - l) * th);
      si += std::sin((k - l) * th);
    }
    re[i] = mod * sr * kTwoPi / n_theta;
    im[i] = mod * si * kTwoPi / n_theta;
  }
  return std::hypot(integrate(re, p.grid.h()), integrate(im, p.grid.h()));
}

BergmanDensity bergman_density(const SectionSystem& sys) {
  BergmanDensity out;
  out.nu = sys.nu;
  const int n = sys.profile.grid.N;
  out.F.resize(n);
  std::vector<double> terms(sys.size());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < sys.size(); ++k) terms[k] = sys.log_monomial(k, i) - std::log(sys.d[k]);
    out.F[i] = log_sum_exp(terms) / sys.nu;
  }
  out.inf = *std::min_element(out.F.begin(), out.F.end());
  out.sup = *std::max_element(out.F.begin(), out.F.end());
  return out;
}

BergmanDensity bergman_density_general(const MetricProfile& p, int nu, std::span<const double> B) {
  const int m = 2 * nu + 1;
  if (static_cast<int>(B.size()) != m * m)
    fail(ErrorCode::InvalidArgument, "basis matrix needs " + std::to_string(m * m) + " entries");
  const SectionSystem sys = gram(p, nu);
  Eigen::MatrixXd Bm(m, m);
  for (int a = 0; a < m; ++a)
    for (int k = 0; k < m; ++k) Bm(a, k) = B[a * m + k];
  // Gram of the new sections: B diag(d) B^T.
  Eigen::MatrixXd G = Bm * Eigen::VectorXd::Map(sys.d.data(), m).asDiagonal() * Bm.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "basis sections are linearly dependent");
  // Orthonormal sections L^{-1} S; the density is sum |L^{-1} S|^2.
  const Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd C = Linv * Bm;  // orthonormal sections in the monomial basis
  BergmanDensity out;
  out.nu = nu;
  const int n = p.grid.N;
  out.F.resize(n);
  Eigen::VectorXd z(m);
  for (int i = 0; i < n; ++i) {
    // C^T C = diag(1/d), so the density is theta-independent; evaluate on the real ray.
    for (int k = 0; k < m; ++k) z(k) = std::exp(0.5 * sys.log_monomial(k, i));
    const Eigen::VectorXd v = C * z;
    out.F[i] = std::log(v.squaredNorm()) / nu;
  }
  out.inf = *std::min_element(out.F.begin(), out.F.end());
  out.sup = *std::max_element(out.F.begin(), out.F.end());
  return out;
}

double trace_integral(const BergmanDensity& F, const MetricProfile& p) {
  std::vector<double> f(F.F.size());
  for (size_t i = 0; i < f.size(); ++i) f[i] = std::exp(F.nu * F.F[i]) * p.w[i];
  return kTwoPi * integrate(f, p.grid.h());
}

std::vector<double> TransitionSpectrum::sorted() const {
  std::vector<double> out = lambda;
  std::sort(out.begin(), out.end());
  return out;
}

TransitionSpectrum transition(const SectionSystem& sys0, const SectionSystem& syst) {
  check_same_grid(sys0, syst);
  TransitionSpectrum ts;
  ts.nu = sys0.nu;
  ts.lambda.resize(sys0.size());
  for (int k = 0; k < sys0.size(); ++k) ts.lambda[k] = std::sqrt(sys0.d[k] / syst.d[k]);
  ts.a = *std::max_element(ts.lambda.begin(), ts.lambda.end());
  for (auto& l : ts.lambda) l /= ts.a;
  return ts;
}

std::vector<double> comparison_function(const TransitionSpectrum& spec, const SectionSystem& ref) {
  if (spec.nu != ref.nu)
    fail(ErrorCode::MismatchedSystems, "spectrum nu " + std::to_string(spec.nu) + " vs system nu " +
                                           std::to_string(ref.nu));
  const int n = ref.profile.grid.N;
  std::vector<double> X(n), terms(ref.size());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < ref.size(); ++k)
      terms[k] = 2.0 * std::log(spec.lambda[k]) + ref.log_monomial(k, i) - std::log(ref.d[k]);
    X[i] = log_sum_exp(terms) / ref.nu;
  }
  return X;
}

double partial_c0_defect(const FlowState& state, const TransitionSpectrum& spec, const SectionSystem& ref) {
  if (!state.has_potential()) fail(ErrorCode::MissingPotential, "defect needs the potential");
  if (!(state.profile.grid == ref.profile.grid))
    fail(ErrorCode::MismatchedSystems, "state and reference system on different grids");
  const auto X = comparison_function(spec, ref);
  // Potential relative to the reference metric; the additive constant drops out after sup-normalizing.
  const auto phi_ref = reconstruct_potential(ref.profile);
  std::vector<double> phi(state.phi.size());
  for (size_t i = 0; i < phi.size(); ++i) phi[i] = state.phi[i] - phi_ref[i];
  const double sup_phi = *std::max_element(phi.begin(), phi.end());
  const double sup_X = *std::max_element(X.begin(), X.end());
  double D = 0.0;
  for (size_t i = 0; i < X.size(); ++i) D = std::max(D, std::abs((phi[i] - sup_phi) - (X[i] - sup_X)));
  return D;
}

SectionNorms section_sup_norms(const SectionSystem& sys) {
  SectionNorms out;
  const auto slope = log_density_slope(sys.profile);
  const int n = sys.profile.grid.N;
  for (int k = 0; k < sys.size(); ++k) {
    double ms = 0.0, mg = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s2 = std::exp(sys.log_monomial(k, i)) / sys.d[k];
      const double c = k - sys.nu + sys.nu * slope[i];
      ms = std::max(ms, s2);
      mg = std::max(mg, s2 * c * c / sys.profile.w[i]);
    }
    out.sup_S.push_back(std::sqrt(ms));
    out.sup_grad_S.push_back(std::sqrt(mg));
  }
  out.max_S = *std::max_element(out.sup_S.begin(), out.sup_S.end());
  out.max_grad_S = *std::max_element(out.sup_grad_S.begin(), out.sup_grad_S.end());
  return out;
}

double laplace_identity_residual(const SectionSystem& sys, const GeometryReport& rep, double core_density) {
  const MetricProfile& p = sys.profile;
  const int n = p.grid.N;
  const double h = p.grid.h();
  const auto slope = log_density_slope(p);
  std::vector<double> s2(n);
  double r = 0.0;
  for (int k = 0; k < sys.size(); ++k) {
    for (int i = 0; i < n; ++i) s2[i] = std::exp(sys.log_monomial(k, i)) / sys.d[k];
    const auto d2 = second_difference(s2, h);
    for (int i = 1; i + 1 < n; ++i) {
      if (p.w[i] < core_density) continue;
      const double c = k - sys.nu + sys.nu * slope[i];
      const double grad2 = s2[i] * c * c / p.w[i];
      r = std::max(r, std::abs(d2[i] / p.w[i] - (grad2 - sys.nu * rep.R[i] * s2[i])));
    }
  }
  return r;
}

double hessian_identity_residual(const SectionSystem& sys, const GeometryReport& rep, double core_density) {
  const MetricProfile& p = sys.profile;
  const int n = p.grid.N;
  const auto slope = log_density_slope(p);
  double r = 0.0;
  for (int k = 0; k < sys.size(); ++k) {
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = k - sys.nu + sys.nu * slope[i];
    const auto dc = first_difference(c, p.grid.h());
    for (int i = 1; i + 1 < n; ++i) {
      if (p.w[i] < core_density) continue;
      r = std::max(r, std::abs(dc[i] + sys.nu * rep.K[i] * p.w[i]));
    }
  }
  return r;
}

std::vector<double> product_bergman_density(const MetricProfile& a, const MetricProfile& b, int nu) {
  if (nu < 1) fail(ErrorCode::InvalidArgument, "tensor power nu must be >= 1");
  require_class(a);
  require_class(b);
  const int na = a.grid.N, nb = b.grid.N, m = 2 * nu + 1;
  // log |z^k y^l|^2_{h^nu} on the product: h = det g of the product metric.
  auto lm = [&](const MetricProfile& p, int k, int i) { return (k - nu) * p.grid.s(i) + nu * std::log(p.w[i]); };
  std::vector<double> d(m * m);
  std::vector<double> row(nb), col(na);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      // Two-dimensional trapezoid against the product volume form w_a w_b.
      for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) row[j] = std::exp(lm(a, k, i) + lm(b, l, j)) * a.w[i] * b.w[j];
        col[i] = integrate(row, b.grid.h());
      }
      d[k * m + l] = kTwoPi * kTwoPi * integrate(col, a.grid.h());
    }
  }
  std::vector<double> F(size_t(na) * nb);
  std::vector<double> terms(m * m);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) terms[k * m + l] = lm(a, k, i) + lm(b, l, j) - std::log(d[k * m + l]);
      F[size_t(i) * nb + j] = log_sum_exp(terms) / nu;
    }
  return F;
}

}  // namespace krf
