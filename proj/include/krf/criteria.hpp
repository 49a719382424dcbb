#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "krf/functionals.hpp"
#include "krf/poly.hpp"
#include "krf/scan.hpp"

namespace krf {

enum class Theorem { NuConv, NuConvR, AlphaG };
std::string_view to_string(Theorem t);

// alpha-type invariant; strict means only "alpha > value" is known.
struct AlphaBound {
  Rational value;
  bool strict = false;
  std::string to_string() const;
};

// "2/3", "0.76", "5/6:strict".
AlphaBound parse_alpha(std::string_view text);

struct CriterionVerdict {
  Theorem theorem = Theorem::NuConv;
  int n = 1;
  AlphaBound alpha1;
  AlphaBound alpha2;  // NuConvR only
  Rational threshold;
  Rational margin;  // alpha1 - threshold
  bool pass = false;
  std::string reason;
};

// alpha1 > n/(n+1).
CriterionVerdict check_nuconv(int n, const AlphaBound& alpha1);
// alpha2 > n/(n+1) and alpha1 > 1/(2 - (n-1)/((n+1) alpha2)). A strict alpha2 floor is taken in the
// limit from above.
CriterionVerdict check_nuconvr(int n, const AlphaBound& alpha1, const AlphaBound& alpha2);
CriterionVerdict check_alphag(int n, const AlphaBound& alphaG);

// 1/(2 - (n-1)/((n+1) alpha2)); ThresholdUndefined when the denominator is <= 0.
Rational nuconvr_threshold(int n, const Rational& alpha2);

struct TamedNu {
  int nu = 1;
  MonitorSeries inf_F;     // |inf F_nu| under the drift rule
  MonitorSeries sup_form;  // nu sup F_nu - log nu, the quantity bounded by 2 log A0
  bool bounded = false;
};

struct TamedVerdict {
  std::vector<TamedNu> per_nu;
  bool tamed = false;  // bounded for some nu
};

TamedVerdict tamed_verdict(std::span<const ScanRow> rows, std::span<const int> nus, const DriftRule& rule = {});

}  // namespace krf
