#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "krf/poly.hpp"

namespace krf {

enum class Axis { Z, W };

struct AxisWeight {
  Axis axis = Axis::Z;
  int multiplicity = 0;
};

// Germ of a plane curve at the origin: poly times the monomial divisor carried in weights.
struct CurveGerm {
  Poly2 poly;
  std::vector<AxisWeight> weights;

  bool is_unit() const { return poly.constant_term() != 0 && weight_z() == 0 && weight_w() == 0; }
  int weight_z() const;
  int weight_w() const;
  // poly * z^a * w^b.
  Poly2 full() const;
};

CurveGerm parse_germ(std::string_view text, bool require_vanishing = false);
// Parses "z:2" or "w:1".
AxisWeight parse_weight(std::string_view text);

// Lowest total degree of poly; weights are reported by weight_multiplicity.
int multiplicity(const CurveGerm& g);
int weight_multiplicity(const CurveGerm& g);
// 1/i with i the largest exponent among the lowest-degree monomials z^a w^b of the full germ.
Rational multiplicity_bound(const CurveGerm& g);

enum class LctMethod { Pattern, Newton, Resolution, OracleBracket };
std::string_view to_string(LctMethod m);
LctMethod parse_method(std::string_view s);

struct Witness {
  std::string kind;  // "exceptional", "component", "axis", "newton", "unit"
  int v = 0;         // order of the total divisor along the witness divisor
  int k = 0;         // discrepancy of the witness divisor
  Rational t0 = 0;   // diagonal parameter for "newton"
  std::string describe() const;
};

struct LctResult {
  bool infinite = false;
  Rational value = 0;
  LctMethod method = LctMethod::Resolution;
  Witness witness;
  bool exact = true;
  bool degenerate = false;  // Newton polygon fails nondegeneracy; value is then an upper bound
  std::optional<std::pair<double, double>> bracket;
  std::string to_string() const;
};

LctResult lct_newton(const CurveGerm& g);
LctResult lct_resolution(const CurveGerm& g);

struct OracleOptions {
  double coarse_step = 0.05;
  double fine_step = 0.01;
  double flat_tolerance = 0.02;  // |slope| below this is inconclusive
  int radii = 10;                // sample radii 10^-3 .. 10^-(2 + radii)
  int angles = 8;
};

// Integrability of |f|^{-2 alpha} near the origin over an alpha grid in (0, 1]; returns [lo, hi] with
// convergence observed at lo and divergence at hi (hi = 1 when nothing diverges below 1).
std::pair<double, double> lct_numeric_oracle(const CurveGerm& g, const OracleOptions& opt = {});

// Unit germs give +infinity; nondegenerate germs go through Newton; otherwise resolution, with a
// Newton/oracle bracket when a center is irrational.
LctResult lct_auto(const CurveGerm& g);
LctResult lct_with(const CurveGerm& g, LctMethod m);

LctResult lct_power(const CurveGerm& g, int m);
// Lower bound a b / (a + b) for lct(fg); infinite inputs act as the identity.
LctResult holder_combine(const LctResult& f, const LctResult& g);

// Chart germ f(x, x y) / x^m with weight m - 1 on the exceptional axis x = 0. The second chart uses
// f(x y, y) / y^m.
CurveGerm blowup_pullback(const CurveGerm& g, int m, bool second_chart = false);

struct DelPezzoFloor {
  Rational alpha1;
  Rational alpha2;
  bool alpha2_strict = false;
  std::string source;
};

DelPezzoFloor delpezzo_floor(int c1sq, int nu);

// Linear substitution z -> a z + b w, w -> c z + d w.
CurveGerm linear_change(const CurveGerm& g, const Rational& a, const Rational& b, const Rational& c,
                        const Rational& d);

}  // namespace krf
