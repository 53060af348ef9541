#include <catch2/catch_amalgamated.hpp>

#include "charp/poly.hpp"
#include "charp/random.hpp"

using namespace charp;

TEST_CASE("derivative examples") {
  RingPtr r3 = make_ring(3, std::vector<std::string>{"x"});
  ModPoly x = ModPoly::variable(r3, 0);
  CHECK(x.pow(3).derive(0).is_zero()); // 3 x^2 = 0 mod 3

  RingPtr r5 = make_ring(5, std::vector<std::string>{"x", "y"});
  ModPoly f = ModPoly::variable(r5, 0).pow(2) * ModPoly::variable(r5, 1);
  CHECK(f.derive(0) == (ModPoly::variable(r5, 0) * ModPoly::variable(r5, 1)).scale(2));
  CHECK(ModPoly::constant(r5, 4).derive(0).is_zero());
}

TEST_CASE("frobenius examples") {
  RingPtr r2 = make_ring(2, std::vector<std::string>{"x"});
  ModPoly x = ModPoly::variable(r2, 0);
  CHECK((x + ModPoly::one(r2)).frobenius() == x.pow(2) + ModPoly::one(r2));
  CHECK(ModPoly::zero(r2).frobenius().is_zero());

  RingPtr r3 = make_ring(3, std::vector<std::string>{"x"});
  ModPoly g = ModPoly::variable(r3, 0).scale(2);
  CHECK(g.frobenius() == ModPoly::variable(r3, 0).pow(3).scale(2)); // 2^3 = 8 = 2
}

TEST_CASE("frobenius additivity and substitution route agree") {
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    Rng rng(7 ^ p);
    RingPtr ring = make_ring(p, 2);
    for (int i = 0; i < 100; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 4), g = random_poly(rng, ring, 3, 4);
      CHECK((f + g).frobenius() == f.frobenius() + g.frobenius());
      CHECK(f.frobenius() == f.scale_exponents(p));
    }
  }
}

TEST_CASE("leibniz rule, exactly") {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(11 ^ p);
    RingPtr ring = make_ring(p, 2);
    for (int i = 0; i < 100; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 4), g = random_poly(rng, ring, 3, 4);
      for (std::size_t v = 0; v < 2; ++v)
        CHECK((f * g).derive(v) == f.derive(v) * g + f * g.derive(v));
    }
  }
}

TEST_CASE("canonical rendering") {
  RingPtr r = make_ring(5, std::vector<std::string>{"x", "y"});
  ModPoly x = ModPoly::variable(r, 0), y = ModPoly::variable(r, 1);
  CHECK((x.pow(2) + ModPoly::one(r)).render() == "x^2 + 1");
  CHECK((x * y.pow(3)).scale(2).render() == "2*x*y^3");
  CHECK(ModPoly::zero(r).render() == "0");
  CHECK((y + x).render() == "x + y"); // graded-lex tie broken toward earlier variables first
  ModPoly p = x.pow(2) + y.scale(3) + ModPoly::constant(r, 4);
  CHECK(p.render() == "x^2 + 3*y + 4");
}

TEST_CASE("t is an ordinary commuting variable with no derivation") {
  RingPtr r = make_ring(3, std::vector<std::string>{"x"}, true);
  ModPoly t = ModPoly::tvar(r), x = ModPoly::variable(r, 0);
  ModPoly f = t * x + t.pow(2);
  CHECK(f.derive(0) == t);
  CHECK(f.t_valuation() == 1);
  CHECK(f.t_degree() == 2);
  CHECK(f.subst_t(1) == ModPoly::variable(make_ring(3, std::vector<std::string>{"x"}), 0) +
                            ModPoly::one(make_ring(3, std::vector<std::string>{"x"})));
  CHECK(f.subst_t(0).is_zero());
  CHECK(f.t_coefficient(1) == ModPoly::variable(make_ring(3, std::vector<std::string>{"x"}), 0));
  CHECK(f.render() == "x*t + t^2");
}

TEST_CASE("ring mismatch is refused") {
  RingPtr a = make_ring(3, 1), b = make_ring(5, 1);
  CHECK_THROWS_AS(ModPoly::variable(a, 0) + ModPoly::variable(b, 0), precondition_error);
}
