#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace krf {

inline constexpr int kMinSamples = 64;
inline constexpr double kClassVolume = 12.566370614359172;  // 4*pi
inline constexpr double kPi = 3.141592653589793;
inline constexpr double kTwoPi = 6.283185307179586;
inline constexpr const char* kConventionVersion = "krf-conventions-1";

// Uniform samples s_i = -L + i*h of the cylinder coordinate s = log|z|^2.
struct Grid {
  double L = 20.0;
  int N = 1024;

  Grid() = default;
  Grid(double L, int N);

  double h() const { return 2.0 * L / (N - 1); }
  double s(int i) const { return -L + i * h(); }
  std::vector<double> nodes() const;
  bool operator==(const Grid&) const = default;
};

struct TailedIntegral {
  double value = 0.0;
  double tail = 0.0;       // combined estimate of the mass beyond both window edges
  bool tails_decay = true;  // false when an edge sample does not look exponentially decaying
};

// Trapezoid rule on the window plus an exponential tail estimate at each edge.
TailedIntegral integrate_with_tails(std::span<const double> f, double h);
double integrate(std::span<const double> f, double h);

// Fubini-Study density 2e^s/(1+e^s)^2 and its analytic log-derivatives.
double fs_density(double s);
double fs_log_slope(double s);      // (log w0)' = -tanh(s/2)
double fs_log_curvature(double s);  // (log w0)'' = -w0

struct MetricProfile {
  Grid grid;
  std::vector<double> w;
  bool background = false;

  double volume() const;
  double min_density() const;
  std::vector<double> moment() const;  // running integral of w from the left pole
};

MetricProfile fs_background(const Grid& grid);
void require_positive(const MetricProfile& p);
bool conforms_to_class(const MetricProfile& p, double rel_tol = 1e-6);
void require_class(const MetricProfile& p);

// Volume-preserving perturbations of FS. Families: "fs", "sech2", "sech".
MetricProfile perturbed_profile(const Grid& grid, std::string_view family, double amplitude);
const std::vector<std::string>& perturbation_families();

// Finite differences on the grid.
std::vector<double> first_difference(std::span<const double> f, double h);
std::vector<double> second_difference(std::span<const double> f, double h);
std::vector<double> second_difference_neumann(std::span<const double> f, double h);
std::vector<double> second_difference_4th(std::span<const double> f, double h);
void second_difference_neumann(std::span<const double> f, double h, std::span<double> out);

std::vector<double> log_ratio(const MetricProfile& p);            // log(w/w0)
std::vector<double> log_density_slope(const MetricProfile& p);    // (log w)'
// Inverse of the Neumann second difference applied to w - w0, with phi(-L) = 0.
std::vector<double> reconstruct_potential(const MetricProfile& p);

struct GeometryReport {
  std::vector<double> R;  // complex scalar curvature, equal to K for curves
  std::vector<double> K;
  std::vector<double> riemannian_scalar;  // 2K
  std::vector<double> u;
  double diam = 0.0;
  double V = 0.0;
  double sup_grad_u = 0.0;
  double u_constant = 0.0;
  double gauss_bonnet = 0.0;  // 2*pi*int K w ds
  double sup_abs_R = 0.0;
  double sup_abs_u = 0.0;
};

GeometryReport curvature(const MetricProfile& p);
// max over interior samples of |u'' - (1-K) w|.
double ricci_potential_residual(const MetricProfile& p, const GeometryReport& rep);

// Vol(B(center, r))/r^2. center is an s-value; +-infinity selects a pole.
double volume_ratio(const MetricProfile& p, double center, double r);

struct ProductGeometry {
  MetricProfile a;
  MetricProfile b;
  GeometryReport ra;
  GeometryReport rb;
  double volume = 0.0;
  double diam = 0.0;
  double sup_R = 0.0;
  double inf_R = 0.0;

  double R(int i, int j) const { return ra.R[i] + rb.R[j]; }
  double density(int i, int j) const { return a.w[i] * b.w[j]; }
};

ProductGeometry product_compose(const MetricProfile& a, const MetricProfile& b);

void write_profile(std::ostream& os, const MetricProfile& p);
MetricProfile read_profile(std::istream& is);

}  // namespace krf
