// Batch verification suites: each check runs one of the library's structural
// identities over deterministic random instances and reports a verdict.
// These back both the selftest command and the acceptance run.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "charp/connection.hpp"
#include "charp/diffop.hpp"
#include "charp/filtration.hpp"
#include "charp/frobenius.hpp"
#include "charp/horizontal.hpp"
#include "charp/pd.hpp"
#include "charp/random.hpp"
#include "charp/rees_op.hpp"
#include "charp/stratification.hpp"
#include "charp/theta.hpp"

namespace charp {

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (detail.size() < 400) detail += why + "; ";
  }
};

namespace checks {

// ---------------------------------------------------------------- base-arith

inline CheckResult frobenius_additive(std::uint64_t seed, std::size_t n_instances = 100) {
  CheckResult r{"frobenius-additivity"};
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    Rng rng(seed ^ (p * 0x9e37ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < n_instances; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 3), g = random_poly(rng, ring, 3, 3);
      if (!((f + g).frobenius() == f.frobenius() + g.frobenius()))
        r.fail("(f+g)^p != f^p + g^p at p=" + std::to_string(p));
      if (!(f.frobenius() == f.scale_exponents(p)))
        r.fail("f^p != f(x^p) at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult lucas_vs_pascal(std::uint32_t n_max = 200) {
  CheckResult r{"lucas-vs-pascal"};
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    std::vector<std::vector<std::uint32_t>> row{{1 % p}};
    for (std::uint32_t n = 0; n <= n_max; ++n) {
      for (std::uint32_t k = 0; k <= n; ++k)
        if (binom_mod_p(n, k, p).value != row[0][k])
          r.fail("C(" + std::to_string(n) + "," + std::to_string(k) + ") mod " + std::to_string(p));
      std::vector<std::uint32_t> next(n + 2, 1 % p);
      for (std::uint32_t k = 1; k <= n; ++k) next[k] = add_mod(row[0][k - 1], row[0][k], p);
      row[0] = std::move(next);
    }
  }
  return r;
}

inline CheckResult derive_leibniz(std::uint64_t seed, std::size_t n_instances = 100) {
  CheckResult r{"derive-leibniz"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x51ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < n_instances; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 3), g = random_poly(rng, ring, 3, 3);
      for (std::size_t v = 0; v < 2; ++v)
        if (!((f * g).derive(v) == f.derive(v) * g + f * g.derive(v)))
          r.fail("Leibniz fails at p=" + std::to_string(p));
    }
  }
  return r;
}

// ---------------------------------------------------------------- pd-algebra

inline CheckResult pd_coassociativity() {
  CheckResult r{"pd-coassociativity"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    for (std::size_t m : {std::size_t(1), std::size_t(2)}) {
      if (p == 5 && m == 2) continue; // the m=1 sweep already covers level 25
      RingPtr ring = make_ring(p, m);
      std::uint32_t level = p * p;
      for (const ExpVec& k : monomials_up_to(m, level)) {
        PDElement w = PDElement::monomial(ModPoly::one(ring), k, level);
        PDTensor d = comultiply(w);
        if (!(comultiply_left(d) == comultiply_right(d)))
          r.fail("coassociativity fails on monomial at p=" + std::to_string(p));
      }
    }
  }
  return r;
}

inline CheckResult pd_taylor_algebra_map(std::uint64_t seed, std::size_t n_instances = 100) {
  CheckResult r{"pd-taylor-algebra-map"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x1234ULL));
    RingPtr ring = make_ring(p, 2);
    std::uint32_t level = 2 * p;
    for (std::size_t i = 0; i < n_instances; ++i) {
      ModPoly f = random_poly(rng, ring, 3, 3), g = random_poly(rng, ring, 3, 3);
      if (!(pd_taylor(f * g, level) == pd_mul(pd_taylor(f, level), pd_taylor(g, level))))
        r.fail("taylor(fg) != taylor(f)taylor(g) at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult pd_counit(std::uint64_t seed, std::size_t n_instances = 50) {
  CheckResult r{"pd-counit"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x77ULL));
    RingPtr ring = make_ring(p, 2);
    std::uint32_t level = p * p;
    std::vector<ExpVec> mons = monomials_up_to(2, level);
    for (std::size_t i = 0; i < n_instances; ++i) {
      std::vector<PDElement::Term> buf;
      for (std::size_t t = 0; t < 3; ++t) {
        ModPoly c = random_poly(rng, ring, 2, 2);
        if (!c.is_zero()) buf.push_back(PDElement::Term{mons[rng.below(mons.size())], c});
      }
      PDElement a = PDElement::from_unsorted(ring, level, std::move(buf));
      PDTensor d = comultiply(a);
      if (!(d.counit_left() == a) || !(d.counit_right() == a))
        r.fail("counit does not recover the identity at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult pd_quotient_algebra_map() {
  CheckResult r{"pd-quotient-algebra-map"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    RingPtr ring = make_ring(p, 2);
    std::uint32_t level = 4 * p;
    std::vector<ExpVec> mons = monomials_up_to(2, 2 * p);
    for (const ExpVec& a : mons)
      for (const ExpVec& b : mons) {
        PDElement wa = PDElement::monomial(ModPoly::one(ring), a, level);
        PDElement wb = PDElement::monomial(ModPoly::one(ring), b, level);
        if (!(quotient_mod_I(pd_mul(wa, wb)) == pd_mul(quotient_mod_I(wa), quotient_mod_I(wb))))
          r.fail("quotient is not an algebra map at p=" + std::to_string(p));
      }
    // kernel is exactly the ideal generated by the tau_i
    for (const ExpVec& a : mons) {
      bool in_ideal = false;
      for (auto e : a) in_ideal |= (e % p != 0);
      PDElement w = PDElement::monomial(ModPoly::one(ring), a, level);
      if (quotient_mod_I(w).is_zero() != in_ideal)
        r.fail("quotient kernel mismatch at p=" + std::to_string(p));
    }
  }
  return r;
}

// ------------------------------------------------------------------- diffops

inline CheckResult op_mul_associative(std::uint64_t seed, std::size_t n_instances = 100) {
  CheckResult r{"op-mul-associativity"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0xabcULL));
    RingPtr ring = make_ring(p, 2);
    std::vector<ExpVec> mons = monomials_up_to(2, 2);
    auto random_op = [&]() {
      std::vector<DiffOp::Term> buf;
      for (std::size_t t = 0; t < 2; ++t) {
        ModPoly c = random_poly(rng, ring, 2, 2);
        if (!c.is_zero()) buf.push_back(DiffOp::Term{mons[rng.below(mons.size())], c});
      }
      return DiffOp::from_unsorted(ring, std::move(buf));
    };
    for (std::size_t i = 0; i < n_instances; ++i) {
      DiffOp a = random_op(), b = random_op(), c = random_op();
      if (!(op_mul(op_mul(a, b), c) == op_mul(a, op_mul(b, c))))
        r.fail("op_mul not associative at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult action_homomorphism(std::uint64_t seed, std::size_t n_instances = 50) {
  CheckResult r{"action-homomorphism"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0xdefULL));
    RingPtr ring = make_ring(p, 2);
    std::vector<ExpVec> mons = monomials_up_to(2, 2);
    for (std::size_t i = 0; i < n_instances; ++i) {
      std::vector<DiffOp::Term> ba, bb;
      ModPoly ca = random_poly(rng, ring, 2, 2), cb = random_poly(rng, ring, 2, 2);
      if (!ca.is_zero()) ba.push_back(DiffOp::Term{mons[rng.below(mons.size())], ca});
      if (!cb.is_zero()) bb.push_back(DiffOp::Term{mons[rng.below(mons.size())], cb});
      DiffOp a = DiffOp::from_unsorted(ring, std::move(ba));
      DiffOp b = DiffOp::from_unsorted(ring, std::move(bb));
      ModPoly f = random_poly(rng, ring, 3, 3);
      if (!(op_apply(op_mul(a, b), f) == op_apply(a, op_apply(b, f))))
        r.fail("apply(ab) != apply(a)apply(b) at p=" + std::to_string(p));
    }
  }
  return r;
}

/// Operators of order < p are determined by their action on monomials of
/// bounded degree; D^p acts as zero so the bound is sharp.
inline CheckResult action_faithful_below_p(std::uint64_t seed) {
  CheckResult r{"action-faithful-below-p"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x31ULL));
    RingPtr ring = make_ring(p, 1);
    // D^p kills every polynomial
    DiffOp dp = partial(ring, 0, p);
    for (std::uint32_t mdeg = 0; mdeg <= 2 * p; ++mdeg) {
      ModPoly xm = ModPoly::variable(ring, 0).pow(mdeg);
      if (!op_apply(dp, xm).is_zero()) r.fail("D^p acts nontrivially at p=" + std::to_string(p));
    }
    // order < p: recover each coefficient by pairing the action against the
    // Taylor expansion of test monomials
    for (std::size_t inst = 0; inst < 10; ++inst) {
      std::vector<DiffOp::Term> buf;
      for (std::uint32_t o = 0; o < p; ++o) {
        ModPoly c = random_poly(rng, ring, 2, 2);
        if (!c.is_zero()) buf.push_back(DiffOp::Term{ExpVec{o}, c});
      }
      DiffOp a = DiffOp::from_unsorted(ring, std::move(buf));
      // solve for coefficients from values on x^0..x^{2p}: if two operators
      // of order < p act equally, they agree
      std::vector<DiffOp::Term> probe;
      bool mismatch = false;
      DiffOp recovered = DiffOp::zero(ring);
      for (std::uint32_t o = 0; o < p; ++o) {
        // <apply on x^o> = sum_k c_k * d^k(x^o); the top term k=o contributes
        // o! c_o, invertible for o < p
        ModPoly val = op_apply(a, ModPoly::variable(ring, 0).pow(o));
        ModPoly acc = ModPoly::zero(ring);
        for (const auto& t : recovered.terms())
          acc = acc + t.coeff * derive_multi(ModPoly::variable(ring, 0).pow(o), t.alpha);
        ModPoly c_o = (val - acc).scale(inv_mod(small_factorial_mod(o, p), p));
        recovered = recovered + DiffOp::term(ring, ExpVec{o}, c_o);
      }
      if (!(recovered == a)) mismatch = true;
      if (mismatch) r.fail("order < p reconstruction failed at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult duality_perfect() {
  CheckResult r{"duality-perfectness"};
  for (std::uint32_t p : {2u, 3u, 5u})
    for (std::size_t m : {std::size_t(1), std::size_t(2)}) {
      RingPtr ring = make_ring(p, m);
      std::uint32_t n = 2 * p;
      std::vector<ExpVec> basis = monomials_up_to(m, n);
      for (const ExpVec& k : basis)
        for (const ExpVec& alpha : basis) {
          PDElement w = PDElement::monomial(ModPoly::one(ring), k, n);
          DiffOp d = DiffOp::term(ring, alpha, ModPoly::one(ring));
          ModPoly expect = (k == alpha) ? ModPoly::one(ring) : ModPoly::zero(ring);
          if (!(pair(w, d) == expect)) r.fail("pairing matrix not identity at p=" + std::to_string(p));
        }
    }
  return r;
}

inline CheckResult mult_dual_to_comult(std::uint64_t seed) {
  CheckResult r{"multiplication-dual-to-comultiplication"};
  for (std::uint32_t p : {2u, 3u}) {
    RingPtr ring = make_ring(p, 1);
    std::uint32_t level = p * p;
    // all pairs (D^n, x^m), n, m <= p^2
    for (std::uint32_t n = 0; n <= level; ++n)
      for (std::uint32_t mm = 0; mm <= level; ++mm) {
        DiffOp u = partial(ring, 0, n);
        if (n == 0) u = DiffOp::from_coeff(ring, ModPoly::one(ring));
        DiffOp v = DiffOp::from_coeff(ring, ModPoly::variable(ring, 0).pow(mm));
        DiffOp prod = op_mul(u, v);
        for (std::uint32_t w = 0; w <= level; ++w) {
          PDElement tau = PDElement::tau(ring, 0, w, level);
          if (w == 0) tau = PDElement::one(ring, level);
          if (!(pair(tau, prod) == pair_tensor(comultiply(tau), u, v)))
            r.fail("duality of Theta fails at p=" + std::to_string(p) + " n=" + std::to_string(n) +
                   " m=" + std::to_string(mm));
        }
      }
    // random scalar operators, two variables
    Rng rng(seed ^ (p * 0x91ULL));
    RingPtr ring2 = make_ring(p, 2);
    std::uint32_t lvl2 = 2 * p;
    std::vector<ExpVec> mons = monomials_up_to(2, 2);
    for (std::size_t i = 0; i < 25; ++i) {
      std::vector<DiffOp::Term> bu, bv;
      ModPoly cu = random_poly(rng, ring2, 2, 2), cv = random_poly(rng, ring2, 2, 2);
      if (!cu.is_zero()) bu.push_back(DiffOp::Term{mons[rng.below(mons.size())], cu});
      if (!cv.is_zero()) bv.push_back(DiffOp::Term{mons[rng.below(mons.size())], cv});
      DiffOp u = DiffOp::from_unsorted(ring2, std::move(bu));
      DiffOp v = DiffOp::from_unsorted(ring2, std::move(bv));
      DiffOp prod = op_mul(u, v);
      if (prod.order() > lvl2) continue;
      for (const ExpVec& k : monomials_up_to(2, lvl2)) {
        PDElement w = PDElement::monomial(ModPoly::one(ring2), k, lvl2);
        if (!(pair(w, prod) == pair_tensor(comultiply(w), u, v)))
          r.fail("random duality of Theta fails at p=" + std::to_string(p));
      }
    }
  }
  return r;
}

inline CheckResult psi_p_linear(std::uint64_t seed, std::size_t n_instances = 100) {
  CheckResult r{"psi-p-linearity"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x5151ULL));
    std::size_t m = 2;
    std::uint32_t deg = p == 5 ? 1 : 2;
    RingPtr ring = make_ring(p, m);
    for (std::size_t i = 0; i < n_instances; ++i) {
      Derivation D = random_derivation(rng, ring, deg, 2);
      Derivation E = random_derivation(rng, ring, deg, 2);
      ModPoly f = random_poly(rng, ring, deg, 2);
      DiffOp psiD = p_curvature_derivation(D);
      DiffOp psiE = p_curvature_derivation(E);
      if (!(p_curvature_derivation(D + E) == psiD + psiE))
        r.fail("psi(D+E) != psi(D)+psi(E) at p=" + std::to_string(p));
      if (!(p_curvature_derivation(D.scale(f)) == psiD.scale_poly(f.frobenius())))
        r.fail("psi(fD) != f^p psi(D) at p=" + std::to_string(p));
      if (!(op_mul(psiD, psiE) == op_mul(psiE, psiD)))
        r.fail("psi images do not commute at p=" + std::to_string(p));
      ModPoly g = random_poly(rng, ring, deg, 2);
      DiffOp gop = DiffOp::from_coeff(ring, g);
      if (!(op_mul(psiD, gop) == op_mul(gop, psiD)))
        r.fail("psi image does not commute with O at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult euler_identity() {
  CheckResult r{"euler-p-power-identity"};
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    RingPtr ring = make_ring(p, 1);
    DiffOp xd = DiffOp::term(ring, ExpVec{1}, ModPoly::variable(ring, 0));
    DiffOp expect = xd + DiffOp::term(ring, ExpVec{p}, ModPoly::variable(ring, 0).pow(p));
    if (!(op_pow(xd, p) == expect)) r.fail("(xD)^p != xD + x^p D^p at p=" + std::to_string(p));
    Derivation D{ring, {ModPoly::variable(ring, 0)}};
    if (!(p_curvature_derivation(D) ==
          DiffOp::term(ring, ExpVec{p}, ModPoly::variable(ring, 0).pow(p))))
      r.fail("psi(xD) != x^p D^p at p=" + std::to_string(p));
  }
  return r;
}

inline CheckResult filtration_products(std::uint64_t seed) {
  CheckResult r{"operator-filtrations"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x606ULL));
    RingPtr ring = make_ring(p, 2);
    std::vector<ExpVec> mons = monomials_up_to(2, p + 1);
    for (std::size_t i = 0; i < 50; ++i) {
      std::vector<DiffOp::Term> ba, bb;
      ModPoly ca = random_poly(rng, ring, 2, 2), cb = random_poly(rng, ring, 2, 2);
      if (!ca.is_zero()) ba.push_back(DiffOp::Term{mons[rng.below(mons.size())], ca});
      if (!cb.is_zero()) bb.push_back(DiffOp::Term{mons[rng.below(mons.size())], cb});
      DiffOp a = DiffOp::from_unsorted(ring, std::move(ba));
      DiffOp b = DiffOp::from_unsorted(ring, std::move(bb));
      if (op_mul(a, b).order() > a.order() + b.order())
        r.fail("order filtration violated at p=" + std::to_string(p));
      // conjugate filtration: pad with central powers D_i^{p k}
      DiffOp ap = op_mul(a, partial(ring, 0, p));
      DiffOp bp = op_mul(partial(ring, 1, p), b);
      if (!conj_level_membership(ap, 1) || !conj_level_membership(bp, 1))
        r.fail("generator padding not in level 1 at p=" + std::to_string(p));
      if (!conj_level_membership(op_mul(ap, bp), 2))
        r.fail("conjugate filtration not multiplicative at p=" + std::to_string(p));
    }
  }
  return r;
}

// --------------------------------------------------------------- connections

/// The shared random corpus for the horizontal/equalizer equivalences:
/// half gauge-flat, a quarter integrable non-flat, a quarter unstructured;
/// ranks <= 2, two variables, connection-matrix degrees <= 3.
inline std::vector<Connection> equivalence_corpus(std::uint64_t seed, std::size_t count) {
  std::vector<Connection> out;
  std::uint32_t primes[3] = {2, 3, 5};
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t p = primes[i % 3];
    Rng rng(seed ^ (i * 0x9e3779b9ULL) ^ p);
    RingPtr ring = make_ring(p, 2);
    std::size_t rank = 1 + rng.below(2);
    if (i % 2 == 0) {
      // keep the gauge degree low enough that the connection entries stay
      // within degree 3
      PolyMatrix S = random_unimodular(rng, ring, rank, i % 4 == 0 ? 4 : 1,
                                       i % 4 == 0 ? 1 : 2);
      out.push_back(gauge_transform(Connection::trivial(ring, rank), S));
    } else if (i % 4 == 1) {
      out.push_back(random_integrable_nonflat(rng, ring, rank, 3));
    } else {
      out.push_back(random_connection(rng, ring, rank, 3));
    }
  }
  return out;
}

inline CheckResult leibniz_contract(std::uint64_t seed, std::size_t n_instances = 25) {
  CheckResult r{"connection-leibniz-contract"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x40ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < n_instances; ++i) {
      Connection c = random_connection(rng, ring, 2, 2);
      if (i % 3 == 0) c.mode = WeightMode::DOL;
      ModPoly f = random_poly(rng, ring, 2, 2);
      std::vector<ModPoly> v{random_poly(rng, ring, 2, 2), random_poly(rng, ring, 2, 2)};
      std::vector<ModPoly> fv{f * v[0], f * v[1]};
      for (std::size_t dir = 0; dir < 2; ++dir) {
        std::vector<ModPoly> lhs = c.apply_nabla(dir, fv);
        std::vector<ModPoly> rhs = c.apply_nabla(dir, v);
        ModPoly lf = c.lambda() * f.derive(dir);
        for (std::size_t q = 0; q < 2; ++q) rhs[q] = rhs[q] * f + lf * v[q];
        if (!(lhs[0] == rhs[0] && lhs[1] == rhs[1]))
          r.fail("lambda-Leibniz fails at p=" + std::to_string(p));
      }
    }
  }
  return r;
}

inline CheckResult horizontal_equivalences(std::uint64_t seed, std::size_t count = 50) {
  CheckResult r{"horizontal-subbundle-equivalences"};
  std::size_t n_flat_psi0 = 0, n_flat_psi = 0, n_curved = 0;
  for (const Connection& c : equivalence_corpus(seed, count)) {
    HorizontalField h = horizontal_fields(c);
    bool flat = is_integrable(c);
    if (flat != bracket_closure(h)) r.fail("bracket closure mismatch");
    PCurvature pc = p_curvature(c);
    bool psi_zero = pc.o_linear && pc.leading_ok;
    for (const auto& m : pc.psi) psi_zero = psi_zero && m.is_zero();
    if (psi_zero != p_power_closure(h)) r.fail("p-th power closure mismatch");
    (flat ? (psi_zero ? n_flat_psi0 : n_flat_psi) : n_curved) += 1;
    // the sharp identities behind both equivalences: the vertical part of
    // [H_i, H_j] is -K_ij and of H_k^{op} is -psi_k, computed by total-space
    // iteration on one side and operator expansion on the other
    for (std::size_t i = 0; i < c.nvars(); ++i) {
      for (std::size_t j = i + 1; j < c.nvars(); ++j)
        if (!(bracket(h.fields[i], h.fields[j]).emat == -curvature(c, i, j)))
          r.fail("bracket vertical part is not -K_ij");
      if (!(field_iterate_p(h.fields[i]).emat == -pc.psi[i]))
        r.fail("p-th iterate vertical part is not -psi");
    }
  }
  // both sides of both equivalences must actually occur in the corpus
  if (n_flat_psi0 == 0 || n_flat_psi == 0 || n_curved == 0)
    r.fail("corpus does not cover all integrability/p-curvature classes");
  return r;
}

inline CheckResult psi_o_linear_when_integrable(std::uint64_t seed, std::size_t count = 30) {
  CheckResult r{"psi-o-linearity"};
  for (const Connection& c : equivalence_corpus(seed ^ 0xf00dULL, count)) {
    if (!is_integrable(c)) continue;
    PCurvature pc = p_curvature(c);
    if (!pc.o_linear || !pc.leading_ok) r.fail("intermediate operator terms survive: " + pc.anomaly);
  }
  return r;
}

inline CheckResult stratification_suite(std::uint64_t seed, std::size_t count = 20) {
  CheckResult r{"stratification-cocycle-roundtrip"};
  std::size_t done = 0;
  for (const Connection& c : equivalence_corpus(seed ^ 0xbeefULL, count * 3)) {
    if (!is_integrable(c)) continue;
    if (done >= count) break;
    ++done;
    // level past p so the mixed splits of Delta exercise the non-commuting
    // coefficient bookkeeping
    std::uint32_t level = c.ring->p + 2;
    Stratification s = taylor_stratification(c, level);
    if (!cocycle_check(s)) r.fail("cocycle fails on integrable instance");
    Connection back = connection_of(s);
    for (std::size_t i = 0; i < c.nvars(); ++i)
      if (!(back.A[i] == c.A[i])) r.fail("level-1 truncation does not recover A");
    // perturb one coefficient at the top level; the mixed splits of
    // Delta(tau^[p]) have no counterpart on the composition side
    Stratification sp = s;
    ExpVec k(c.ring->nx(), 0);
    k[0] = level;
    sp.at(0, 0) = sp.at(0, 0) + PDElement::monomial(ModPoly::one(c.ring), k, level);
    if (cocycle_check(sp)) r.fail("perturbed stratification passes the cocycle check");
  }
  return r;
}

inline CheckResult equalizer_criterion(std::uint64_t seed, std::size_t count = 50) {
  CheckResult r{"equalizer-criterion"};
  std::size_t n_id = 0, n_not = 0;
  for (const Connection& c : equivalence_corpus(seed ^ 0xc0ffeeULL, count)) {
    if (!is_integrable(c)) {
      bool refused = false;
      try {
        taylor_stratification(c, c.ring->p);
      } catch (const precondition_error&) {
        refused = true;
      }
      if (!refused) r.fail("non-integrable input was not refused");
      continue;
    }
    Stratification s = taylor_stratification(c, c.ring->p);
    PCurvature pc = p_curvature(c);
    bool psi_zero = pc.o_linear && pc.leading_ok;
    for (const auto& m : pc.psi) psi_zero = psi_zero && m.is_zero();
    if (strat_mod_I_is_identity(s) != psi_zero) r.fail("equalizer criterion mismatch");
    (psi_zero ? n_id : n_not) += 1;
  }
  if (n_id == 0 || n_not == 0) r.fail("corpus does not cover both sides of the criterion");
  return r;
}

inline CheckResult flat_section_suite(std::uint64_t seed) {
  CheckResult r{"flat-sections"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x888ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < 5; ++i) {
      PolyMatrix S = random_unimodular(rng, ring, 2, 2, 2);
      Connection c = gauge_transform(Connection::trivial(ring, 2), S);
      // flat sections are constant combinations of the columns of S^{-1}
      std::uint32_t bound = std::uint32_t(S.adjugate().max_degree());
      FlatSections fs = flat_sections(c, bound);
      if (!fs.full_rank) r.fail("gauge-flat instance lacks a full frame at p=" + std::to_string(p));
    }
  }
  // rank 1, A = x, p = 2: psi != 0 obstructs every polynomial solution
  RingPtr ring = make_ring(2, std::vector<std::string>{"x"});
  Connection c = Connection::trivial(ring, 1);
  c.A[0].at(0, 0) = ModPoly::variable(ring, 0);
  FlatSections fs = flat_sections(c, 8);
  if (fs.kernel_dimension != 0) r.fail("rank-1 A=x p=2 has spurious flat sections");
  return r;
}

inline CheckResult gauge_invariance(std::uint64_t seed, std::size_t count = 10) {
  CheckResult r{"gauge-invariance"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x3232ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < count; ++i) {
      Connection c = random_gauge_flat(rng, ring, 2, 2);
      if (!is_integrable(c)) r.fail("gauge of trivial is not flat");
      if (!p_curvature_vanishes(c)) r.fail("gauge of trivial has p-curvature");
    }
  }
  return r;
}

inline CheckResult dol_higgs_degeneration(std::uint64_t seed, std::size_t count = 20) {
  CheckResult r{"dol-degeneration"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x99ULL));
    RingPtr ring = make_ring(p, 2);
    for (std::size_t i = 0; i < count; ++i) {
      Connection c = random_connection(rng, ring, 2, 2);
      c.mode = WeightMode::DOL;
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = a + 1; b < 2; ++b)
          if (!(curvature(c, a, b) == commutator(c.A[a], c.A[b])))
            r.fail("DOL curvature is not the commutator");
      ModPoly f = random_poly(rng, ring, 2, 2);
      std::vector<ModPoly> v{random_poly(rng, ring, 2, 2), random_poly(rng, ring, 2, 2)};
      std::vector<ModPoly> fv{f * v[0], f * v[1]};
      std::vector<ModPoly> lhs = c.apply_nabla(0, fv);
      std::vector<ModPoly> rhs = c.apply_nabla(0, v);
      if (!(lhs[0] == rhs[0] * f && lhs[1] == rhs[1] * f)) r.fail("DOL action is not O-linear");
    }
  }
  return r;
}

// ---------------------------------------------------------- frobenius-cartier

inline CheckResult untwist_ring_map(std::uint64_t seed, std::size_t count = 50) {
  CheckResult r{"untwist-ring-map"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x1001ULL));
    FrobeniusContext ctx = make_frobenius(make_ring(p, 2));
    for (std::size_t i = 0; i < count; ++i) {
      ModPoly a = random_poly(rng, ctx.twist, 3, 3), b = random_poly(rng, ctx.twist, 3, 3);
      if (!(untwist(ctx, a * b) == untwist(ctx, a) * untwist(ctx, b)))
        r.fail("untwist not multiplicative");
      if (!(untwist(ctx, a + b) == untwist(ctx, a) + untwist(ctx, b)))
        r.fail("untwist not additive");
      if (!(a == b) && untwist(ctx, a) == untwist(ctx, b)) r.fail("untwist not injective");
    }
  }
  return r;
}

inline CheckResult cartier_splitting_section(std::uint64_t seed, std::size_t count = 20) {
  CheckResult r{"cartier-splitting-section"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0xeeULL));
    FrobeniusContext ctx = make_frobenius(make_ring(p, 2));
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<ModPoly> h{random_poly(rng, ctx.base, 3, 2), random_poly(rng, ctx.base, 3, 2)};
      CartierSplitting z = cartier_splitting(ctx, h);
      for (std::size_t row = 0; row < 2; ++row) {
        OneForm w = z.row(row);
        if (!is_closed(w)) r.fail("zeta(dx') not closed at p=" + std::to_string(p));
        CartierResult cr = cartier_operator(ctx, w, std::uint32_t(p + 3));
        if (!cr.feasible) {
          r.fail("cartier infeasible on zeta's image at p=" + std::to_string(p));
          continue;
        }
        for (std::size_t j = 0; j < 2; ++j) {
          ModPoly expect = (j == row) ? ModPoly::one(ctx.twist) : ModPoly::zero(ctx.twist);
          if (!(cr.u[j] == expect)) r.fail("D o zeta != id at p=" + std::to_string(p));
        }
      }
    }
  }
  return r;
}

inline CheckResult cartier_operator_linearity(std::uint64_t seed, std::size_t count = 20) {
  CheckResult r{"cartier-operator-linearity"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x2110ULL));
    FrobeniusContext ctx = make_frobenius(make_ring(p, 2));
    for (std::size_t i = 0; i < count; ++i) {
      ModPoly f = random_poly(rng, ctx.base, 3, 3);
      CartierResult exact = cartier_operator(ctx, d_of(f), 4);
      if (!exact.feasible) {
        r.fail("C(df) infeasible");
        continue;
      }
      for (const auto& u : exact.u)
        if (!u.is_zero()) r.fail("C(df) != 0 at p=" + std::to_string(p));
      // twisted linearity on the standard closed generators x_i^{p-1} dx_i
      ModPoly utw = random_poly(rng, ctx.twist, 1, 2);
      OneForm w(2, ModPoly::zero(ctx.base));
      w[0] = untwist(ctx, utw) * ModPoly::variable(ctx.base, 0).pow(p - 1);
      CartierResult cr = cartier_operator(ctx, w, std::uint32_t(2 * p + 2));
      if (!cr.feasible) {
        r.fail("C(u(x^p) x^{p-1} dx) infeasible");
        continue;
      }
      if (!(cr.u[0] == utw) || !cr.u[1].is_zero())
        r.fail("twisted linearity fails at p=" + std::to_string(p));
      // additivity on closed forms built as df + u(x^p) x^{p-1} dx
      OneForm w2 = d_of(random_poly(rng, ctx.base, 3, 3));
      std::uint32_t bound = std::uint32_t(2 * p + 3);
      OneForm sum{w[0] + w2[0], w[1] + w2[1]};
      CartierResult ca = cartier_operator(ctx, sum, bound);
      CartierResult cb = cartier_operator(ctx, w2, bound);
      CartierResult cw = cartier_operator(ctx, w, bound);
      if (!ca.feasible || !cb.feasible || !cw.feasible) {
        r.fail("additivity instances infeasible at p=" + std::to_string(p));
        continue;
      }
      for (std::size_t j = 0; j < 2; ++j)
        if (!(ca.u[j] == cb.u[j] + cw.u[j]))
          r.fail("cartier operator not additive at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult cartier_roundtrip(std::uint64_t seed, std::size_t per_prime = 20) {
  CheckResult r{"cartier-roundtrip"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x7e57ULL));
    RingPtr ring = make_ring(p, 2);
    FrobeniusContext ctx = make_frobenius(ring);
    for (std::size_t i = 0; i < per_prime; ++i) {
      std::size_t rank = 1 + rng.below(2);
      // descended data: a canonical pullback, regauged to hide the frame
      CanonicalPullback can = frobenius_pullback(ctx, rank);
      if (!is_integrable(can.conn) || !p_curvature_vanishes(can.conn))
        r.fail("canonical connection is not flat with zero p-curvature");
      PolyMatrix S = random_unimodular(rng, ring, rank, 2);
      Connection hidden = gauge_transform(can.conn, S);
      if (!is_integrable(hidden) || !p_curvature_vanishes(hidden))
        r.fail("gauge of canonical is not flat with zero p-curvature");
      DescendResult dr = cartier_descend(hidden, std::uint32_t(S.adjugate().max_degree()));
      if (!dr.ok) r.fail("descend failed: " + dr.reason);
    }
  }
  // the rank-1 A=x, p=2 obstruction
  RingPtr ring = make_ring(2, std::vector<std::string>{"x"});
  Connection c = Connection::trivial(ring, 1);
  c.A[0].at(0, 0) = ModPoly::variable(ring, 0);
  DescendResult dr = cartier_descend(c, 8);
  if (dr.ok) r.fail("descend succeeded despite nonzero p-curvature");
  return r;
}

inline CheckResult theta_diagrams() {
  CheckResult r{"theta-coalgebra"};
  for (std::uint32_t p : {2u, 3u}) {
    for (std::size_t m : {std::size_t(1), std::size_t(2)}) {
      RingPtr ring = make_ring(p, m);
      ThetaDiagrams d = theta_coalgebra_check(ring, p * p);
      if (!d.all_ok()) r.fail("diagram fails at p=" + std::to_string(p) + ": " + d.witness);
    }
  }
  // the divided-power coefficients (kp)!/(p!^k k!) are 1 mod p
  for (std::uint32_t p : {2u, 3u, 5u})
    for (std::uint64_t k = 1; k <= 4; ++k)
      if (pd_coefficient(k, p).value != 1 % p)
        r.fail("pd coefficient != 1 at p=" + std::to_string(p) + " k=" + std::to_string(k));
  return r;
}

// ------------------------------------------------------------ rees-hodge-conj

inline CheckResult rees_griffiths_suite(std::uint64_t seed, std::size_t count = 30) {
  CheckResult r{"rees-griffiths"};
  std::uint32_t primes[3] = {2, 3, 5};
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t p = primes[i % 3];
    Rng rng(seed ^ (i * 0x7777ULL) ^ p);
    RingPtr ring = make_ring(p, 2);
    std::size_t rank = 2 + rng.below(2);
    FilteredModule v = random_filtered_module(rng, ring, rank, 2);
    Connection c = random_filtered_connection(rng, v, 2, i % 2 == 0 ? 0 : 1);
    if (!is_integrable(c)) {
      r.fail("filtered generator produced a non-integrable connection");
      continue;
    }
    GriffithsClass g = griffiths_check(v, c);
    if (g != griffiths_check_rees(v, c)) r.fail("direct and Rees classifications disagree");
    if (g == GriffithsClass::NEITHER) {
      r.fail("generator produced a non-Griffiths instance");
      continue;
    }
    std::vector<PolyMatrix> higgs = associated_higgs(v, c);
    bool higgs_zero = true;
    for (const auto& h : higgs) higgs_zero = higgs_zero && h.is_zero();
    if ((g == GriffithsClass::PRESERVES) != higgs_zero)
      r.fail("PRESERVES <=> vanishing associated Higgs fails");
    // Rees fibers
    ReesModule rm = rees_build(v);
    ReesFiberModule f1 = rees_fiber(rm, 1), f0 = rees_fiber(rm, 0);
    if (f1.at_zero || f0.grading != v.weights) r.fail("Rees fibers incorrect");
    if (rm.filtered.frame.rank() != rank) r.fail("Rees presentation has torsion");
  }
  return r;
}

inline CheckResult hodge_fiber_commutative(std::uint64_t seed, std::size_t count = 20) {
  CheckResult r{"hodge-fiber-commutativity"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0xadadULL));
    RingPtr tring = make_ring(p, 2, true);
    std::vector<ExpVec> mons = monomials_up_to(2, 2);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<DiffOp::Term> buf;
      for (std::size_t t = 0; t < 2; ++t) {
        ExpVec alpha = mons[rng.below(mons.size())];
        std::uint32_t extra = std::uint32_t(rng.below(2));
        ModPoly c = random_poly(rng, make_ring(p, 2), 2, 2).embed_t();
        c = c.mul_t_power(std::uint32_t(total_degree(alpha)) + extra);
        if (!c.is_zero()) buf.push_back(DiffOp::Term{alpha, c});
      }
      DiffOp a = DiffOp::from_unsorted(tring, std::move(buf));
      if (a.is_zero()) continue;
      ReesOpElement ha = ReesOpElement::hodge(a);
      ModPoly f = random_poly(rng, make_ring(p, 2), 2, 2).embed_t();
      DiffOp fop = DiffOp::from_coeff(tring, f);
      DiffOp comm = op_mul(a, fop) - op_mul(fop, a);
      if (comm.is_zero()) continue;
      ReesFiber fib = rees_specialize(ReesOpElement::hodge(comm), 0);
      if (!fib.dr.is_zero()) r.fail("[a, f] survives at t=0 for p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult mconj_gauge_invariance(std::uint64_t seed, std::size_t count = 10) {
  CheckResult r{"mconj-gauge-invariance"};
  for (std::uint32_t p : {2u, 3u}) {
    Rng rng(seed ^ (p * 0x6b6bULL));
    RingPtr base = make_ring(p, 1);
    FrobeniusContext ctx = make_frobenius(base);
    for (std::size_t i = 0; i < count; ++i) {
      // rank-2 nilpotent twisted Higgs
      PolyMatrix B(ctx.twist, 2, 2);
      B.at(0, 1) = random_poly(rng, ctx.twist, 2, 2);
      CartierSplitting z = cartier_splitting(ctx, {random_poly(rng, base, 2, 2)});
      DeformResult dfm = conj_deform({B}, z, p);
      if (!dfm.mconj_ok) {
        r.fail("deformation not in M_conj before gauge");
        continue;
      }
      RingPtr tring = dfm.triple.nabla.ring;
      PolyMatrix S = random_unimodular(rng, tring, 2, 1);
      auto Sinv = S.inverse_const_det();
      ConjTriple gauged{gauge_transform(dfm.triple.nabla, S), {}};
      for (const auto& psi : dfm.triple.psi) gauged.psi.push_back((*Sinv) * psi * S);
      if (!mconj_member(gauged).member) r.fail("membership broken by gauge at p=" + std::to_string(p));
    }
  }
  return r;
}

inline CheckResult deformation_suite(std::uint64_t seed) {
  CheckResult r{"key-deformation"};
  for (std::uint32_t p : {2u, 3u, 5u}) {
    Rng rng(seed ^ (p * 0x4242ULL));
    RingPtr base = make_ring(p, 2);
    FrobeniusContext ctx = make_frobenius(base);
    for (int lift = 0; lift < 2; ++lift) {
      std::vector<ModPoly> h;
      for (std::size_t i = 0; i < 2; ++i)
        h.push_back(lift == 0 ? ModPoly::zero(base) : random_poly(rng, base, 2, 2));
      CartierSplitting z = cartier_splitting(ctx, h);
      for (std::size_t rank : {std::size_t(2), std::size_t(3)}) {
        // commuting nilpotent family with B^p = 0: polynomials in a Jordan
        // block when rank <= p, else the square-zero span of E_{i,rank}
        std::vector<PolyMatrix> B;
        if (rank <= p) {
          PolyMatrix N(ctx.twist, rank, rank);
          for (std::size_t q = 0; q + 1 < rank; ++q) N.at(q, q + 1) = ModPoly::one(ctx.twist);
          for (std::size_t i = 0; i < 2; ++i) {
            PolyMatrix Bi = N.scale(random_poly(rng, ctx.twist, 1, 2));
            if (rank == 3 && rng.flip()) Bi = Bi + (N * N).scale(random_poly(rng, ctx.twist, 1, 1));
            B.push_back(Bi);
          }
        } else {
          for (std::size_t i = 0; i < 2; ++i) {
            PolyMatrix Bi(ctx.twist, rank, rank);
            for (std::size_t q = 0; q + 1 < rank; ++q)
              Bi.at(q, rank - 1) = random_poly(rng, ctx.twist, 1, 2);
            B.push_back(Bi);
          }
        }
        DeformResult dfm = conj_deform(B, z, p);
        if (!dfm.integrable) r.fail("deformed connection not integrable at p=" + std::to_string(p));
        if (!dfm.o_linear) r.fail("deformed p-curvature not O-linear at p=" + std::to_string(p));
        if (!dfm.mconj_ok) r.fail("e=p deformation fails M_conj membership at p=" + std::to_string(p));
        if (!dfm.matches_scaled) r.fail("p-curvature != t^e kappa F*psi at p=" + std::to_string(p));
        bool nonzero = false;
        for (const auto& b : B) nonzero |= !b.is_zero();
        if (nonzero && dfm.measured_t_exponent != std::int64_t(p))
          r.fail("e=p deformation has unexpected t-exponent");
        DeformResult lin = conj_deform(B, z, 1);
        if (nonzero && lin.measured_t_exponent != 1)
          r.fail("e=1 deformation's measured exponent is not 1");
        if (nonzero && lin.mconj_ok)
          r.fail("e=1 deformation unexpectedly satisfies M_conj");
      }
    }
    // psi' = 0: canonical connection, p-curvature 0 for all t
    CartierSplitting z0 = cartier_splitting(ctx, {ModPoly::zero(base), ModPoly::zero(base)});
    DeformResult none = conj_deform(
        {PolyMatrix::zero(ctx.twist, 2, 2), PolyMatrix::zero(ctx.twist, 2, 2)}, z0, p);
    if (none.measured_t_exponent != -1 || !none.mconj_ok)
      r.fail("zero Higgs field does not give the canonical connection");
  }
  return r;
}

inline CheckResult theta_filtration_compat() {
  CheckResult r{"theta-filtration-compatibility"};
  for (std::uint32_t p : {2u, 3u, 5u})
    for (std::size_t m : {std::size_t(1), std::size_t(2)}) {
      RingPtr ring = make_ring(p, m);
      ThetaReesCompat c = theta_rees_compat(ring, 3);
      if (!c.ok) r.fail("P^{<pr} -> F_r fails at p=" + std::to_string(p) + ": " + c.witness);
    }
  return r;
}

} // namespace checks

/// The full invariant suite, sized down by `scale` (1 = spec-sized runs).
inline std::vector<CheckResult> run_selftest(std::uint64_t seed, std::size_t scale = 1) {
  auto n = [scale](std::size_t base) { return std::max<std::size_t>(1, base * scale); };
  std::vector<CheckResult> out;
  out.push_back(checks::frobenius_additive(seed, n(100)));
  out.push_back(checks::lucas_vs_pascal());
  out.push_back(checks::derive_leibniz(seed, n(100)));
  out.push_back(checks::pd_coassociativity());
  out.push_back(checks::pd_taylor_algebra_map(seed, n(100)));
  out.push_back(checks::pd_counit(seed, n(50)));
  out.push_back(checks::pd_quotient_algebra_map());
  out.push_back(checks::op_mul_associative(seed, n(100)));
  out.push_back(checks::action_homomorphism(seed, n(50)));
  out.push_back(checks::action_faithful_below_p(seed));
  out.push_back(checks::duality_perfect());
  out.push_back(checks::mult_dual_to_comult(seed));
  out.push_back(checks::psi_p_linear(seed, n(100)));
  out.push_back(checks::euler_identity());
  out.push_back(checks::filtration_products(seed));
  out.push_back(checks::leibniz_contract(seed, n(25)));
  out.push_back(checks::horizontal_equivalences(seed, n(50)));
  out.push_back(checks::psi_o_linear_when_integrable(seed, n(30)));
  out.push_back(checks::stratification_suite(seed, n(20)));
  out.push_back(checks::equalizer_criterion(seed, n(50)));
  out.push_back(checks::flat_section_suite(seed));
  out.push_back(checks::gauge_invariance(seed, n(10)));
  out.push_back(checks::dol_higgs_degeneration(seed, n(20)));
  out.push_back(checks::untwist_ring_map(seed, n(50)));
  out.push_back(checks::cartier_splitting_section(seed, n(20)));
  out.push_back(checks::cartier_operator_linearity(seed, n(20)));
  out.push_back(checks::cartier_roundtrip(seed, n(20)));
  out.push_back(checks::theta_diagrams());
  out.push_back(checks::rees_griffiths_suite(seed, n(30)));
  out.push_back(checks::hodge_fiber_commutative(seed, n(20)));
  out.push_back(checks::mconj_gauge_invariance(seed, n(10)));
  out.push_back(checks::deformation_suite(seed));
  out.push_back(checks::theta_filtration_compat());
  return out;
}

} // namespace charp
