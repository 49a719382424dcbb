#pragma once

#include <span>
#include <string>
#include <vector>

#include "krf/flow.hpp"

namespace krf {

struct FunctionalReport {
  double sup_phi = 0.0;
  double inf_phi = 0.0;
  double osc_phi = 0.0;
  double sup_abs_phi = 0.0;
  double neg_mean_phi_evolved = 0.0;  // (1/V) int (-phi) w_phi
  double mean_phi_ref = 0.0;          // (1/V) int phi w0
  double I_energy = 0.0;              // (1/V) int phi (w0 - w_phi)
  double dirichlet = 0.0;             // (1/V) int i dphi ^ dbar phi
};

FunctionalReport report(const FlowState& state);
// Normalized Dirichlet energy with forward differences; matches I_energy exactly under the
// Neumann second difference used by the flow.
double dirichlet_energy(std::span<const double> f, const Grid& grid);

// Functionals of phi_a(x) + phi_b(y) on the product of two curves (n = 2).
struct ProductFunctionals {
  FunctionalReport sum;    // sup, inf, osc and the means add
  double mixed_dirichlet;  // sum over i of the mixed energies, here D_a + D_b
};
ProductFunctionals product_report(const FlowState& a, const FlowState& b);

struct DriftRule {
  double relative = 0.10;
  double absolute_floor = 1e-10;
};

// Two-window rule on |q|: bounded when max over [T/2, T] <= (1 + relative) * max over [0, T/2] + floor.
bool two_window_bounded(std::span<const double> t, std::span<const double> q, const DriftRule& rule = {});

struct MonitorSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> value;
  double max = 0.0;      // signed; the empirical constant of an inequality
  double max_abs = 0.0;  // the quantity the drift rule watches
  bool bounded = true;
};

// Empirical constants of the potential inequalities along a run:
//   "supphi"   (1/V) int(-phi) w_phi - n sup phi
//   "deltainv" sup phi - ((1-delta)/delta) (1/V) int(-phi) w_phi
//   "perelman" sup|R| + diam + sup|u| + sup|grad u|
std::vector<MonitorSeries> inequality_monitor(std::span<const FlowState> run, double delta = 0.4,
                                              const DriftRule& rule = {});

// The seven quantities of the equivalence lemma, with a verdict each:
// sup|phi|, sup phi, inf phi, int phi w0, int(-phi) w_phi, I, Osc phi.
std::vector<MonitorSeries> equivalence_quantities(std::span<const FlowState> run, const DriftRule& rule = {});

MonitorSeries make_series(std::string name, std::vector<double> t, std::vector<double> value,
                          const DriftRule& rule = {});

// |D(psi) - D(X)| with D the normalized Dirichlet energy and psi the potential relative to the
// reference metric of the section system that produced X.
double gradient_energy_gap(const FlowState& state, std::span<const double> X, const MetricProfile& reference);

}  // namespace krf
