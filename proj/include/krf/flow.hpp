#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krf/geometry.hpp"

namespace krf {

enum class Scheme { SDIRK3, SDIRK2, RK4, Euler };
enum class Gauge { Raw, Shoot, DensityOnly };

std::string_view to_string(Scheme s);
std::string_view to_string(Gauge g);
Scheme parse_scheme(std::string_view text);
Gauge parse_gauge(std::string_view text);
bool is_explicit(Scheme s);

struct FlowState {
  double t = 0.0;
  MetricProfile profile;
  std::vector<double> phi;     // empty when the potential is not tracked
  std::vector<double> phidot;
  Gauge gauge = Gauge::DensityOnly;
  double gauge_constant = 0.0;

  bool has_potential() const { return !phi.empty(); }
};

struct FlowConfig {
  Grid grid;
  double dt = 0.01;
  double T = 20.0;
  Scheme scheme = Scheme::SDIRK3;
  Gauge gauge = Gauge::DensityOnly;
  double snapshot_every = 0.25;
  double safety = 0.5;
  double shoot_tolerance = 1e-8;
};

// Largest explicit step allowed at this profile: safety * h^2 * min(w) / 2.
double stability_bound(const MetricProfile& p, double safety);

// Density of the evolved metric for a potential: w0 + phi'' (Neumann second difference).
MetricProfile density_from_potential(const Grid& grid, std::span<const double> phi);
// phi_t = log(w/w0) + phi, the flow velocity with the FS reference.
std::vector<double> potential_velocity(const MetricProfile& p, std::span<const double> phi);

FlowState density_state(const MetricProfile& p);
FlowState potential_state(const Grid& grid, std::vector<double> phi0, Gauge gauge);
// Reconstructs phi from the density with the constant fixed by a zero mean velocity against w.
void attach_potential(FlowState& state);

FlowState step_density(const FlowState& state, double dt, Scheme scheme = Scheme::SDIRK3, double safety = 0.5);
FlowState step_potential(const FlowState& state, double dt, Scheme scheme = Scheme::SDIRK3, double safety = 0.5);

struct FlowRun {
  std::vector<FlowState> snapshots;
  std::string termination = "horizon";
};

using SnapshotHook = std::function<void(const FlowState&)>;

// Evolves to the horizon, recording a snapshot at t = 0 and at every cadence point.
FlowRun run_density(const MetricProfile& init, const FlowConfig& cfg, const SnapshotHook& hook = {});
FlowRun run_potential(std::vector<double> phi0, const FlowConfig& cfg, const SnapshotHook& hook = {});

// Additive constant for phi0 making |mean phi_t| at the horizon at most cfg.shoot_tolerance.
double shoot_constant(std::span<const double> phi0, const FlowConfig& cfg);
double mean_velocity(const FlowState& state);

// Per snapshot interval: max over the core region of |dK/dt - (Delta K + K^2 - K)|.
// Curvatures use fourth-order stencils. The core keeps samples with w >= core_density;
// below that, roundoff amplified by 1/(h^4 w^2) swamps the truncation error.
std::vector<double> scalar_evolution_residual(std::span<const FlowState> run, double core_density = 0.05);

double max_deviation_from_fs(const MetricProfile& p);

// Least-squares slope of log max|w - w0| over snapshots with t >= t_from and deviation above floor.
double fitted_decay_rate(std::span<const double> t, std::span<const double> deviation, double t_from,
                         double floor = 1e-12);

}  // namespace krf
