#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "krf/lct.hpp"

namespace krf::testing {

// Germs of the tabulated local types with their thresholds.
struct FamilyGerm {
  const char* text;
  Rational lct;
};

inline const std::vector<FamilyGerm>& table_families() {
  static const std::vector<FamilyGerm> f = {
      {"z", 1},          {"z*w", 1},         {"z^2-w^2*(w+1)", 1},     {"z^3-w^2", ratio(5, 6)},
      {"z*(z+w^2)", ratio(3, 4)}, {"z*w*(z+w)", ratio(2, 3)}, {"z^2", ratio(1, 2)}, {"z^3", ratio(1, 3)},
  };
  return f;
}

// Integer draws straight from the engine so the sequence is the same on every standard library.
inline int draw(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline Rational small_rational(std::mt19937_64& rng) { return ratio(draw(rng, -4, 4), draw(rng, 1, 3)); }

struct LinearChange {
  Rational a, b, c, d;
};

inline LinearChange random_change(std::mt19937_64& rng) {
  LinearChange m;
  do {
    m = {small_rational(rng), small_rational(rng), small_rational(rng), small_rational(rng)};
  } while (m.a * m.d - m.b * m.c == 0);
  return m;
}

struct RandomGerm {
  std::string label;
  CurveGerm germ;
  Rational base_lct;  // threshold of the family member before the power
  int power = 1;
};

// Family member, raised to a power m <= 4, after a random invertible rational linear change.
inline RandomGerm random_family_germ(std::mt19937_64& rng) {
  const auto& fams = table_families();
  const auto& f = fams[draw(rng, 0, static_cast<int>(fams.size()) - 1)];
  RandomGerm r;
  r.power = draw(rng, 1, 4);
  r.base_lct = f.lct;
  CurveGerm g = parse_germ(f.text);
  g.poly = g.poly.pow(r.power);
  const LinearChange m = random_change(rng);
  r.germ = linear_change(g, m.a, m.b, m.c, m.d);
  r.label = "(" + std::string(f.text) + ")^" + std::to_string(r.power) + " under [" + m.a.get_str() + " " +
            m.b.get_str() + "; " + m.c.get_str() + " " + m.d.get_str() + "]";
  return r;
}

}  // namespace krf::testing
