#include <doctest.h>

#include <random>

#include "krf/errors.hpp"
#include "krf/lct.hpp"
#include "krf/poly.hpp"
#include "support/germs.hpp"

using namespace krf;
namespace up = krf::upoly;

namespace {

UPoly from_ints(std::initializer_list<long> c) {
  UPoly p;
  for (long x : c) p.push_back(Rational(x));
  up::trim(p);
  return p;
}

UPoly random_upoly(std::mt19937_64& rng, int deg) {
  UPoly p(deg + 1);
  for (auto& c : p) c = testing::small_rational(rng);
  if (p.back() == 0) p.back() = 1;
  return p;
}

}  // namespace

TEST_CASE("ratio canonicalizes") {
  CHECK(ratio(2, 4) == Rational(1, 2));
  CHECK(ratio(2, 4).get_num() == 1);
  CHECK(ratio(-3, -6).get_str() == "1/2");
  CHECK(ratio(6, 3).get_str() == "2");
}

TEST_CASE("univariate division and gcd") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const UPoly a = random_upoly(rng, testing::draw(rng, 1, 5));
    const UPoly b = random_upoly(rng, testing::draw(rng, 1, 4));
    const UPoly c = random_upoly(rng, testing::draw(rng, 0, 3));
    const auto [q, r] = up::divmod(a, b);
    CHECK(up::add(up::mul(q, b), r) == a);
    CHECK(up::degree(r) < up::degree(b));
    CHECK(up::exact_div(up::mul(a, b), b) == a);
    // gcd(a c, b c) is a multiple of c.
    const UPoly g = up::gcd(up::mul(a, c), up::mul(b, c));
    CHECK(up::is_zero(up::divmod(g, c).second));
    CHECK(g.back() == 1);
  }
  CHECK(up::is_zero(up::gcd(UPoly{}, UPoly{})));
}

TEST_CASE("univariate squarefree and rational roots") {
  // (x - 1)^3 (x + 1/2)^2 (x^2 - 2)
  const UPoly a = from_ints({-1, 1});
  const UPoly b = {Rational(1, 2), Rational(1)};
  const UPoly c = from_ints({-2, 0, 1});
  const UPoly p = up::mul(up::mul(up::mul(a, up::mul(a, a)), up::mul(b, b)), c);
  const auto sf = up::squarefree(p);
  REQUIRE(sf.size() == 3);
  CHECK(sf[0] == c);
  CHECK(sf[1] == b);
  CHECK(sf[2] == a);
  const up::RootSplit rs = up::split_roots(p);
  REQUIRE(rs.rational.size() == 2);
  for (const auto& r : rs.rational) {
    if (r.value == 1) CHECK(r.multiplicity == 3);
    else {
      CHECK(r.value == Rational(-1, 2));
      CHECK(r.multiplicity == 2);
    }
  }
  REQUIRE(rs.irrational.size() >= 1);
  CHECK(rs.irrational[0] == c);
}

TEST_CASE("bivariate arithmetic") {
  const Poly2 f = parse_germ("z^3 - w^2").poly;
  CHECK(f.order() == 2);
  CHECK(f.total_degree() == 3);
  CHECK(f.initial_form() == parse_germ("-w^2").poly);
  CHECK(f.dz() == parse_germ("3*z^2").poly);
  CHECK((f * f).divide_exact(f) == f);
  CHECK(f.pow(3) == f * f * f);
  CHECK(f.eval(2, 3) == -1);
  CHECK(f.compose(Poly2::w(), Poly2::z()) == parse_germ("w^3 - z^2").poly);
  CHECK(f.shift_w(1) == parse_germ("z^3 - w^2 - 2*w - 1", false).poly);
  CHECK(parse_germ("z^2*w^3 + z^3*w^4").poly.divide_monomial(2, 3) == parse_germ("1 + z*w").poly);
  CHECK_THROWS_AS(f.divide_exact(Poly2::z()), Error);
}

TEST_CASE("bivariate squarefree decomposition") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& fams = testing::table_families();
    const Poly2 a = parse_germ(fams[testing::draw(rng, 0, 7)].text).poly;
    const Poly2 b = parse_germ("z + w + z*w").poly;
    const int e = testing::draw(rng, 1, 3);
    const Poly2 f = a.pow(e) * b;
    Poly2 prod = Poly2::constant(1);
    for (const auto& fac : poly2::squarefree(f)) {
      CHECK(fac.multiplicity >= 1);
      CHECK_FALSE(fac.poly.is_constant());
      prod = prod * fac.poly.pow(fac.multiplicity);
    }
    CHECK(prod.normalized() == f.normalized());
  }
}
