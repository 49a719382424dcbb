#include "krf/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "krf/errors.hpp"

namespace krf {

namespace {

void require_alpha(const AlphaBound& a, const char* name) {
  if (a.value <= 0 || a.value > 1) fail(ErrorCode::InvalidArgument, std::string(name) + " must lie in (0, 1]");
}

void require_dimension(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "dimension n must be >= 1");
}

// a > t, or a = t with a strict floor.
bool exceeds(const AlphaBound& a, const Rational& t) { return a.value > t || (a.value == t && a.strict); }

CriterionVerdict simple(Theorem th, int n, const AlphaBound& a) {
  require_dimension(n);
  require_alpha(a, "alpha");
  CriterionVerdict v;
  v.theorem = th;
  v.n = n;
  v.alpha1 = a;
  v.threshold = ratio(n, n + 1);
  v.margin = a.value - v.threshold;
  v.pass = exceeds(a, v.threshold);
  v.reason = a.to_string() + (v.pass ? " > " : " not > ") + v.threshold.get_str();
  return v;
}

}  // namespace

std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::NuConv: return "nuconv";
    case Theorem::NuConvR: return "nuconvr";
    case Theorem::AlphaG: return "alphag";
  }
  return "?";
}

std::string AlphaBound::to_string() const { return (strict ? ">" : "") + value.get_str(); }

AlphaBound parse_alpha(std::string_view text) {
  AlphaBound a;
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    if (text.substr(colon + 1) != "strict") fail(ErrorCode::ParseError, "unknown alpha flag in '" + std::string(text) + "'");
    a.strict = true;
    text = text.substr(0, colon);
  }
  std::string s(text);
  const auto dot = s.find('.');
  try {
    if (dot != std::string::npos) {
      // Exact decimal: digits after the point become a power-of-ten denominator.
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      const size_t places = s.size() - dot - 1;
      if (places == 0 || digits.empty() || digits.find_first_not_of("0123456789-") != std::string::npos)
        fail(ErrorCode::ParseError, "bad alpha '" + s + "'");
      mpz_class den = 1;
      for (size_t i = 0; i < places; ++i) den *= 10;
      a.value = Rational(mpz_class(digits, 10), den);
    } else {
      if (s.empty() || s.find_first_not_of("0123456789-/") != std::string::npos)
        fail(ErrorCode::ParseError, "bad alpha '" + s + "'");
      a.value = Rational(s, 10);
    }
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::ParseError, "bad alpha '" + s + "'");
  }
  if (a.value.get_den() == 0) fail(ErrorCode::ParseError, "zero denominator in '" + s + "'");
  a.value.canonicalize();
  return a;
}

Rational nuconvr_threshold(int n, const Rational& alpha2) {
  require_dimension(n);
  if (alpha2 <= 0) fail(ErrorCode::ThresholdUndefined, "alpha2 must be positive");
  const Rational den = Rational(2) - Rational(n - 1) / (Rational(n + 1) * alpha2);
  if (den <= 0) fail(ErrorCode::ThresholdUndefined, "2 - (n-1)/((n+1) alpha2) = " + den.get_str() + " <= 0");
  Rational t = 1 / den;
  t.canonicalize();
  return t;
}

CriterionVerdict check_nuconv(int n, const AlphaBound& alpha1) { return simple(Theorem::NuConv, n, alpha1); }

CriterionVerdict check_alphag(int n, const AlphaBound& alphaG) { return simple(Theorem::AlphaG, n, alphaG); }

CriterionVerdict check_nuconvr(int n, const AlphaBound& alpha1, const AlphaBound& alpha2) {
  require_dimension(n);
  require_alpha(alpha1, "alpha1");
  require_alpha(alpha2, "alpha2");
  CriterionVerdict v;
  v.theorem = Theorem::NuConvR;
  v.n = n;
  v.alpha1 = alpha1;
  v.alpha2 = alpha2;
  v.threshold = nuconvr_threshold(n, alpha2.value);
  v.margin = alpha1.value - v.threshold;
  const Rational floor2 = ratio(n, n + 1);
  const bool second_ok = exceeds(alpha2, floor2);
  // The threshold decreases strictly in alpha2 for n >= 2, so a strict alpha2 floor lowers the true
  // threshold below the value at the floor.
  const bool first_ok = alpha1.value > v.threshold ||
                        (alpha1.value == v.threshold && (alpha1.strict || (alpha2.strict && n >= 2)));
  v.pass = second_ok && first_ok;
  if (!second_ok)
    v.reason = "alpha2 " + alpha2.to_string() + " not > " + floor2.get_str();
  else
    v.reason = "alpha1 " + alpha1.to_string() + (first_ok ? " clears " : " does not clear ") + "threshold " +
               v.threshold.get_str() + (alpha2.strict ? " (limit from above in alpha2)" : "");
  return v;
}

TamedVerdict tamed_verdict(std::span<const ScanRow> rows, std::span<const int> nus, const DriftRule& rule) {
  if (nus.empty()) fail(ErrorCode::InsufficientData, "no nu requested");
  TamedVerdict out;
  for (int nu : nus) {
    std::vector<ScanRow> sel;
    for (const auto& r : rows)
      if (r.nu == nu) sel.push_back(r);
    std::sort(sel.begin(), sel.end(), [](const ScanRow& a, const ScanRow& b) { return a.t < b.t; });
    if (sel.size() < 2 || sel.front().t == sel.back().t)
      fail(ErrorCode::InsufficientData, "scan for nu = " + std::to_string(nu) + " does not cover two time windows");
    std::vector<double> t, inf_F, sup_form;
    for (const auto& r : sel) {
      t.push_back(r.t);
      inf_F.push_back(r.inf_F);
      sup_form.push_back(nu * r.sup_F - std::log(static_cast<double>(nu)));
    }
    TamedNu tn;
    tn.nu = nu;
    try {
      tn.inf_F = make_series("inf_F", t, inf_F, rule);
      tn.sup_form = make_series("sup_form", t, sup_form, rule);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientSnapshots) throw;
      fail(ErrorCode::InsufficientData, "scan for nu = " + std::to_string(nu) + ": " + e.detail());
    }
    tn.bounded = tn.inf_F.bounded && tn.sup_form.bounded;
    out.tamed = out.tamed || tn.bounded;
    out.per_nu.push_back(std::move(tn));
  }
  return out;
}

}  // namespace krf
