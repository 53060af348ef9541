#include <catch2/catch_amalgamated.hpp>

#include "charp/pd.hpp"
#include "charp/random.hpp"

using namespace charp;

namespace {
RingPtr ring1(std::uint32_t p) { return make_ring(p, std::vector<std::string>{"x"}); }
} // namespace

TEST_CASE("pd product examples") {
  RingPtr r5 = ring1(5);
  PDElement t1 = PDElement::tau(r5, 0, 1, 4);
  CHECK(pd_mul(t1, t1) == PDElement::monomial(ModPoly::constant(r5, 2), ExpVec{2}, 4));

  RingPtr r2 = ring1(2);
  PDElement u1 = PDElement::tau(r2, 0, 1, 4);
  CHECK(pd_mul(u1, u1).is_zero()); // C(2,1) = 2 = 0 mod 2

  // (tau^[p])^k = k! (tau^[p])^[k] = k! (kp)!/(p!^k k!) tau^[pk]:
  // for (k, p) = (2, 3) the divided-power coefficient is 1 mod p, so the
  // plain square of tau^[3] is 2! * 1 * tau^[6]
  RingPtr r3 = ring1(3);
  PDElement a = PDElement::tau(r3, 0, 3, 6), b = PDElement::tau(r3, 0, 3, 6);
  std::uint32_t k_factorial = 2;
  CHECK(pd_mul(a, b) ==
        PDElement::monomial(
            ModPoly::constant(r3, k_factorial * pd_coefficient(2, 3).value), ExpVec{6}, 6));

  // tau^[pk] tau^[r] = C(kp + r, r) tau^[pk + r] with C(kp + r, r) = 1 mod p
  // for 0 <= r < p
  for (std::uint32_t p : {2u, 3u, 5u}) {
    RingPtr r = ring1(p);
    for (std::uint32_t k = 1; k <= 2; ++k)
      for (std::uint32_t rr = 1; rr < p; ++rr) {
        std::uint32_t lvl = p * k + rr;
        CHECK(pd_mul(PDElement::tau(r, 0, p * k, lvl), PDElement::tau(r, 0, rr, lvl)) ==
              PDElement::tau(r, 0, p * k + rr, lvl));
      }
  }

  // (tau^[1])^p = 0 in characteristic p
  for (std::uint32_t p : {2u, 3u, 5u}) {
    RingPtr r = ring1(p);
    PDElement acc = PDElement::tau(r, 0, 1, 2 * p);
    for (std::uint32_t i = 1; i < p; ++i) acc = pd_mul(acc, PDElement::tau(r, 0, 1, 2 * p));
    CHECK(acc.is_zero());
  }
  CHECK_THROWS_AS(pd_mul(PDElement::tau(r5, 0, 1, 2), PDElement::tau(r5, 0, 1, 3)),
                  precondition_error);
}

TEST_CASE("pd taylor examples") {
  RingPtr r5 = ring1(5);
  ModPoly x = ModPoly::variable(r5, 0);
  PDElement expand = pd_taylor(x.pow(2), 2);
  PDElement expect = PDElement::from_poly(x.pow(2), 2) +
                     PDElement::monomial(x.scale(2), ExpVec{1}, 2) +
                     PDElement::monomial(ModPoly::constant(r5, 2), ExpVec{2}, 2);
  CHECK(expand == expect);
  CHECK(pd_taylor(ModPoly::constant(r5, 3), 4) == PDElement::from_poly(ModPoly::constant(r5, 3), 4));
  CHECK(pd_taylor(x, 1) == PDElement::from_poly(x, 1) + PDElement::tau(r5, 0, 1, 1));
}

TEST_CASE("pd taylor is an O-algebra map") {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(23 ^ p);
    RingPtr ring = make_ring(p, 2);
    for (int i = 0; i < 100; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 3), g = random_poly(rng, ring, 3, 3);
      std::uint32_t n = 2 * p;
      CHECK(pd_taylor(f * g, n) == pd_mul(pd_taylor(f, n), pd_taylor(g, n)));
    }
  }
}

TEST_CASE("comultiplication examples") {
  RingPtr r3 = ring1(3);
  PDTensor d = comultiply(PDElement::tau(r3, 0, 2, 4));
  // tau^[2] -> tau^[2] (x) 1 + tau^[1] (x) tau^[1] + 1 (x) tau^[2]
  REQUIRE(d.terms().size() == 3);
  CHECK(d.render() == "T1^[2] (x) 1 + T1^[1] (x) T1^[1] + 1 (x) T1^[2]");

  PDTensor one = comultiply(PDElement::one(r3, 4));
  REQUIRE(one.terms().size() == 1);
  CHECK(one.terms().front().coeff == ModPoly::one(r3));

  ModPoly f = ModPoly::variable(r3, 0) + ModPoly::one(r3);
  PDTensor lin = comultiply(PDElement::monomial(f, ExpVec{1}, 4));
  REQUIRE(lin.terms().size() == 2);
  for (const auto& t : lin.terms()) CHECK(t.coeff == f);
}

TEST_CASE("coassociativity on all basis monomials up to level p^2") {
  for (std::uint32_t p : {2u, 3u}) {
    for (std::size_t m : {std::size_t(1), std::size_t(2)}) {
      RingPtr ring = make_ring(p, m);
      std::uint32_t level = p * p;
      for (const ExpVec& k : monomials_up_to(m, level)) {
        PDTensor d = comultiply(PDElement::monomial(ModPoly::one(ring), k, level));
        CHECK(comultiply_left(d) == comultiply_right(d));
      }
    }
  }
}

TEST_CASE("counit recovers the identity") {
  Rng rng(31);
  RingPtr ring = make_ring(3, 2);
  std::uint32_t level = 6;
  std::vector<ExpVec> mons = monomials_up_to(2, level);
  for (int i = 0; i < 50; ++i) {
    std::vector<PDElement::Term> buf;
    for (int t = 0; t < 3; ++t) {
      ModPoly c = random_poly(rng, ring, 2, 2);
      if (!c.is_zero()) buf.push_back(PDElement::Term{mons[rng.below(mons.size())], c});
    }
    PDElement a = PDElement::from_unsorted(ring, level, std::move(buf));
    CHECK(comultiply(a).counit_left() == a);
    CHECK(comultiply(a).counit_right() == a);
  }
}

TEST_CASE("quotient mod I examples") {
  RingPtr r3 = ring1(3);
  CHECK(quotient_mod_I(PDElement::tau(r3, 0, 1, 9)).is_zero());

  PDElement tp = PDElement::tau(r3, 0, 3, 9);
  PDElement q = quotient_mod_I(tp);
  CHECK(q == PDElement::tau(r3, 0, 1, 3)); // degree-1 generator of P/I

  ModPoly f = ModPoly::variable(r3, 0).pow(2);
  CHECK(quotient_mod_I(PDElement::monomial(f, ExpVec{4}, 9)).is_zero()); // p does not divide p+1
}

TEST_CASE("quotient is an algebra map with kernel the tau-ideal") {
  for (std::uint32_t p : {2u, 3u}) {
    RingPtr ring = make_ring(p, 2);
    std::uint32_t level = 4 * p;
    for (const ExpVec& a : monomials_up_to(2, 2 * p))
      for (const ExpVec& b : monomials_up_to(2, 2 * p)) {
        PDElement wa = PDElement::monomial(ModPoly::one(ring), a, level);
        PDElement wb = PDElement::monomial(ModPoly::one(ring), b, level);
        CHECK(quotient_mod_I(pd_mul(wa, wb)) ==
              pd_mul(quotient_mod_I(wa), quotient_mod_I(wb)));
      }
    for (const ExpVec& a : monomials_up_to(2, 2 * p)) {
      bool in_ideal = false;
      for (auto e : a) in_ideal |= (e % p != 0);
      CHECK(quotient_mod_I(PDElement::monomial(ModPoly::one(ring), a, level)).is_zero() ==
            in_ideal);
    }
  }
}

TEST_CASE("tensor normal form pushes right coefficients across as Taylor series") {
  RingPtr r3 = ring1(3);
  std::uint32_t level = 4;
  ModPoly x = ModPoly::variable(r3, 0);
  // 1 (x) x = (x + tau) (x) 1 in the middle relation
  PDTensor t = tensor_product(PDElement::one(r3, level), PDElement::from_poly(x, level));
  PDTensor expect =
      tensor_product(PDElement::from_poly(x, level) + PDElement::tau(r3, 0, 1, level),
                     PDElement::one(r3, level));
  CHECK(t == expect);
}

TEST_CASE("pd rendering") {
  RingPtr r = make_ring(3, std::vector<std::string>{"x", "y"});
  ModPoly f = ModPoly::variable(r, 0) + ModPoly::one(r);
  PDElement e = PDElement::monomial(f, ExpVec{2, 1}, 4) +
                PDElement::monomial(ModPoly::variable(r, 1), ExpVec{1, 0}, 4);
  CHECK(e.render() == "(x + 1)*T1^[2]T2^[1] + y*T1^[1]");
}
