#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace krf {

using Rational = mpq_class;

// n/d in lowest terms; mpq_class(n, d) does not canonicalize.
inline Rational ratio(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

// Dense univariate polynomial over Q, coefficient k multiplies x^k. Trailing zeros trimmed.
using UPoly = std::vector<Rational>;

namespace upoly {

void trim(UPoly& p);
int degree(const UPoly& p);  // -1 for zero
bool is_zero(const UPoly& p);
UPoly add(const UPoly& a, const UPoly& b);
UPoly sub(const UPoly& a, const UPoly& b);
UPoly mul(const UPoly& a, const UPoly& b);
UPoly scale(const UPoly& a, const Rational& c);
UPoly derivative(const UPoly& p);
Rational eval(const UPoly& p, const Rational& x);
// Euclidean division; b must be nonzero.
std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b);
UPoly exact_div(const UPoly& a, const UPoly& b);
UPoly monic(const UPoly& p);
UPoly gcd(const UPoly& a, const UPoly& b);  // monic, gcd(0, 0) = 0
// Yun: p = c * prod f_i^i with f_i squarefree, coprime, monic. Entry i-1 holds f_i.
std::vector<UPoly> squarefree(const UPoly& p);

struct RationalRoot {
  Rational value;
  int multiplicity;
};

struct RootSplit {
  std::vector<RationalRoot> rational;
  // Monic cofactors free of rational roots, indexed by multiplicity - 1.
  std::vector<UPoly> irrational;
};

RootSplit split_roots(const UPoly& p);

}  // namespace upoly

// Sparse bivariate polynomial over Q in (z, w); key (i, j) multiplies z^i w^j.
class Poly2 {
 public:
  using Key = std::pair<int, int>;

  Poly2() = default;
  static Poly2 constant(const Rational& c);
  static Poly2 monomial(const Rational& c, int i, int j);
  static Poly2 z() { return monomial(1, 1, 0); }
  static Poly2 w() { return monomial(1, 0, 1); }

  const std::map<Key, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational coeff(int i, int j) const;
  Rational constant_term() const { return coeff(0, 0); }
  void add_term(const Rational& c, int i, int j);

  int total_degree() const;
  int order() const;  // lowest total degree; -1 for zero
  int degree_z() const;
  int degree_w() const;
  // Lowest homogeneous part.
  Poly2 initial_form() const;

  Poly2 operator+(const Poly2& o) const;
  Poly2 operator-(const Poly2& o) const;
  Poly2 operator*(const Poly2& o) const;
  Poly2 operator-() const;
  Poly2 scaled(const Rational& c) const;
  bool operator==(const Poly2& o) const { return terms_ == o.terms_; }
  Poly2 pow(int m) const;

  Poly2 dz() const;
  Poly2 dw() const;
  // p(z_image, w_image).
  Poly2 compose(const Poly2& z_image, const Poly2& w_image) const;
  Poly2 shift_w(const Rational& a) const;  // p(z, w + a)
  Rational eval(const Rational& z, const Rational& w) const;
  // Exact division; fails with InvalidArgument when d does not divide this.
  Poly2 divide_exact(const Poly2& d) const;
  // Divides by z^a w^b; every term must be divisible.
  Poly2 divide_monomial(int a, int b) const;
  // Scales so that the leading coefficient in lex order is 1.
  Poly2 normalized() const;
  // Restriction to the line z = 0 / w = 0 as a univariate polynomial.
  UPoly restrict_z0() const;
  UPoly restrict_w0() const;

  std::string to_string(const std::string& zname = "z", const std::string& wname = "w") const;

 private:
  std::map<Key, Rational> terms_;
};

namespace poly2 {

Poly2 gcd(const Poly2& a, const Poly2& b);  // normalized

struct Factor {
  Poly2 poly;
  int multiplicity;
};

// f = c * prod g^e with g squarefree, pairwise coprime, normalized and nonconstant.
std::vector<Factor> squarefree(const Poly2& f);

}  // namespace poly2

}  // namespace krf
