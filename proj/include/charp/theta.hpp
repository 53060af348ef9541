// The p-curvature coalgebra morphism theta: P -> F_* Gamma Omega',
// tau^[p k] -> (dx')^[k], its three coalgebra diagrams, and the filtration
// compatibility that extends it over the Rees deformation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "charp/pd.hpp"
#include "charp/poly.hpp"

namespace charp {

/// Renders graded Dolbeault monomials as dx1'^[k] etc.
inline PDNamer dol_namer(const RingPtr& ring) {
  return [ring](std::size_t i) { return "d" + ring->xvars[i] + "'"; };
}

/// quotient_mod_I followed by the relabeling tau_i^[pk] -> (dx'_i)^[k];
/// coefficients pass through untouched. The result is graded by the
/// relabeled exponent.
inline PDElement theta_map(const PDElement& a) { return quotient_mod_I(a); }

namespace detail {
/// tau-exponent k -> k/p when every entry is divisible, else reject.
inline bool divide_exponent_by_p(const ExpVec& k, ExpVec& out, std::uint32_t p) {
  out = k;
  for (auto& e : out) {
    if (e % p != 0) return false;
    e /= p;
  }
  return true;
}
} // namespace detail

struct ThetaDiagrams {
  bool counit_ok = true;
  bool source_target_ok = true;
  bool comultiplication_ok = true;
  std::string witness;

  bool all_ok() const { return counit_ok && source_target_ok && comultiplication_ok; }
};

/// Verify the three coalgebra diagrams on every PD basis monomial of total
/// degree <= level:
///   1. theta is compatible with the counit (the diagonal sections agree);
///   2. theta equalizes the two O-structures, theta(x_i w) = theta((x_i+tau_i) w);
///   3. (theta (x) theta) o Delta = Delta_Dol o theta.
inline ThetaDiagrams theta_coalgebra_check(const RingPtr& ring, std::uint32_t level) {
  std::uint32_t p = ring->p;
  std::size_t m = ring->nx();
  ThetaDiagrams out;
  for (const ExpVec& k : monomials_up_to(m, level)) {
    PDElement w = PDElement::monomial(ModPoly::one(ring), k, level);

    if (!(theta_map(w).counit() == w.counit())) {
      out.counit_ok = false;
      out.witness += "counit fails on " + PDElement::render_pd_monomial(k, tau_namer()) + "; ";
    }

    for (std::size_t i = 0; i < m && level >= 1; ++i) {
      PDElement xw = w.scale(ModPoly::variable(ring, i));
      PDElement xtw = pd_mul(
          PDElement::from_poly(ModPoly::variable(ring, i), level) + PDElement::tau(ring, i, 1, level),
          w);
      if (!(theta_map(xw) == theta_map(xtw))) {
        out.source_target_ok = false;
        out.witness += "source/target fails on " +
                       PDElement::render_pd_monomial(k, tau_namer()) + " with " +
                       ring->xvars[i] + "; ";
      }
    }

    PDTensor lhs = comultiply(w).map_factors(
        [p](const ExpVec& e, ExpVec& o) { return detail::divide_exponent_by_p(e, o, p); },
        level / p);
    PDTensor rhs = comultiply(theta_map(w));
    if (!(lhs == rhs)) {
      out.comultiplication_ok = false;
      out.witness += "comultiplication fails on " +
                     PDElement::render_pd_monomial(k, tau_namer()) + "; ";
    }
  }
  return out;
}

struct ThetaReesCompat {
  bool ok = true;
  std::string witness;
};

/// Filtration compatibility: theta maps P^{< p r} into the step F_r
/// of P/I (graded weight < r), so the Rees-extended morphism is defined on
/// basis elements t^{pk} tau^[pk + r'].
inline ThetaReesCompat theta_rees_compat(const RingPtr& ring, std::uint32_t r_bound) {
  std::uint32_t p = ring->p;
  std::size_t m = ring->nx();
  ThetaReesCompat out;
  for (std::uint32_t r = 1; r <= r_bound; ++r) {
    std::uint32_t level = p * r - 1; // P^{< pr} = span of |k| <= pr - 1
    for (const ExpVec& k : monomials_up_to(m, level)) {
      PDElement w = PDElement::monomial(ModPoly::one(ring), k, level);
      PDElement img = theta_map(w);
      for (const auto& t : img.terms()) {
        if (total_degree(t.k) < r) continue;
        out.ok = false;
        out.witness += PDElement::render_pd_monomial(k, tau_namer()) + " leaves F_" +
                       std::to_string(r) + "; ";
      }
    }
  }
  return out;
}

} // namespace charp
