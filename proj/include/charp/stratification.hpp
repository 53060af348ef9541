// Taylor stratification of an integrable connection over the truncated PD
// neighbourhood, its cocycle conditions, and the mod-I equalizer criterion
// for p-curvature vanishing.
#pragma once

#include <cstdint>
#include <vector>

#include "charp/connection.hpp"
#include "charp/pd.hpp"

namespace charp {

/// e_j -> sum_alpha tau^[alpha] (x) nabla^alpha(e_j); entry (i,j) collects
/// the e_i-component. Reduction mod all tau is the identity matrix.
struct Stratification {
  RingPtr ring;
  std::size_t rank = 0;
  std::uint32_t level = 0;
  std::vector<PDElement> eps; // row-major rank x rank

  const PDElement& at(std::size_t i, std::size_t j) const { return eps[i * rank + j]; }
  PDElement& at(std::size_t i, std::size_t j) { return eps[i * rank + j]; }
};

inline Stratification taylor_stratification(const Connection& c, std::uint32_t level) {
  if (c.mode != WeightMode::DR)
    throw precondition_error("taylor_stratification: dr mode only");
  if (!is_integrable(c))
    throw precondition_error("taylor_stratification: connection is not integrable");
  std::size_t m = c.nvars(), d = c.rank;

  // nabla^alpha on the standard frame, by increasing |alpha|; integrability
  // makes the order of composition immaterial.
  std::map<ExpVec, PolyMatrix, bool (*)(const ExpVec&, const ExpVec&)> M(grlex_less);
  for (const ExpVec& alpha : monomials_up_to(m, level)) {
    if (total_degree(alpha) == 0) {
      M.emplace(alpha, PolyMatrix::identity(c.ring, d));
      continue;
    }
    std::size_t i = 0;
    while (alpha[i] == 0) ++i;
    ExpVec prev = alpha;
    prev[i] -= 1;
    const PolyMatrix& Mp = M.at(prev);
    M.emplace(alpha, Mp.derive(i) + c.A[i] * Mp);
  }

  Stratification s;
  s.ring = c.ring;
  s.rank = d;
  s.level = level;
  s.eps.assign(d * d, PDElement::zero(c.ring, level));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<PDElement::Term> buf;
      for (const auto& [alpha, mat] : M) {
        const ModPoly& coeff = mat.at(i, j);
        if (!coeff.is_zero()) buf.push_back(PDElement::Term{alpha, coeff});
      }
      s.at(i, j) = PDElement::from_unsorted(c.ring, level, std::move(buf));
    }
  return s;
}

/// Recover the connection matrices from the tau_i^[1] coefficients.
inline Connection connection_of(const Stratification& s) {
  Connection c = Connection::trivial(s.ring, s.rank, WeightMode::DR);
  for (std::size_t v = 0; v < s.ring->nx(); ++v) {
    ExpVec e(s.ring->nx(), 0);
    e[v] = 1;
    for (std::size_t i = 0; i < s.rank; ++i)
      for (std::size_t j = 0; j < s.rank; ++j) c.A[v].at(i, j) = s.at(i, j).coeff(e);
  }
  return c;
}

/// Both cocycle conditions: restriction to the diagonal is the identity, and
/// comultiplying every PD coefficient agrees with (id (x) eps) o eps in
/// tensor normal form.
inline bool cocycle_check(const Stratification& s) {
  ModPoly one = ModPoly::one(s.ring);
  for (std::size_t i = 0; i < s.rank; ++i)
    for (std::size_t j = 0; j < s.rank; ++j) {
      const ModPoly c = s.at(i, j).counit();
      if (!(c == (i == j ? one : ModPoly::zero(s.ring)))) return false;
    }
  // Delta(eps_ij) = sum_k eps_ik (x) eps_kj, the slot-1 factor carrying the
  // outer derivative: nabla^{a+b} e_j = sum_r C(a,r) M_{a-r} d^r(M_b)
  // componentwise, which is exactly the tensor normal form of the right side.
  for (std::size_t i = 0; i < s.rank; ++i)
    for (std::size_t j = 0; j < s.rank; ++j) {
      PDTensor lhs = comultiply(s.at(i, j));
      PDTensor rhs = PDTensor::zero(s.ring, s.level);
      for (std::size_t k = 0; k < s.rank; ++k)
        rhs = rhs + tensor_product(s.at(i, k), s.at(k, j));
      if (!(lhs == rhs)) return false;
    }
  return true;
}

/// The equalizer criterion: the image of eps in P/I is the identity iff the
/// p-curvature vanishes.
inline bool strat_mod_I_is_identity(const Stratification& s) {
  std::uint32_t qlevel = s.level / s.ring->p;
  for (std::size_t i = 0; i < s.rank; ++i)
    for (std::size_t j = 0; j < s.rank; ++j) {
      PDElement q = quotient_mod_I(s.at(i, j));
      PDElement expect = (i == j) ? PDElement::one(s.ring, qlevel)
                                  : PDElement::zero(s.ring, qlevel);
      if (!(q == expect)) return false;
    }
  return true;
}

} // namespace charp
