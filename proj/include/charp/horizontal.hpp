// Horizontal vector fields on the total space of a connection. Coordinates
// are (x_1..x_m, e_1..e_d); every field kept here has e-free x-components
// and e-components linear in e, a class closed under brackets and p-th
// iterates.
#pragma once

#include <cstdint>
#include <vector>

#include "charp/connection.hpp"
#include "charp/matrix.hpp"

namespace charp {

/// sum_k xpart_k d/dx_k + sum_{i,j} emat_{ij} e_j d/de_i.
struct TotalField {
  RingPtr ring;
  std::vector<ModPoly> xpart;
  PolyMatrix emat;

  static TotalField zero(RingPtr ring, std::size_t rank) {
    TotalField f;
    f.xpart.assign(ring->nx(), ModPoly::zero(ring));
    f.emat = PolyMatrix::zero(ring, rank, rank);
    f.ring = std::move(ring);
    return f;
  }

  std::size_t rank() const { return emat.rows(); }

  bool is_zero() const {
    for (const auto& a : xpart)
      if (!a.is_zero()) return false;
    return emat.is_zero();
  }

  /// Derivation action on an e-free function.
  ModPoly apply_scalar(const ModPoly& g) const {
    ModPoly acc = ModPoly::zero(ring);
    for (std::size_t k = 0; k < xpart.size(); ++k) acc = acc + xpart[k] * g.derive(k);
    return acc;
  }

  /// Derivation action on sum h_i e_i, returning the new h-vector.
  std::vector<ModPoly> apply_linear(const std::vector<ModPoly>& h) const {
    std::vector<ModPoly> out(h.size(), ModPoly::zero(ring));
    for (std::size_t j = 0; j < h.size(); ++j) {
      out[j] = apply_scalar(h[j]);
      for (std::size_t i = 0; i < h.size(); ++i)
        out[j] = out[j] + h[i] * emat.at(i, j);
    }
    return out;
  }
};

inline TotalField bracket(const TotalField& F, const TotalField& G) {
  TotalField out = TotalField::zero(F.ring, F.rank());
  for (std::size_t k = 0; k < F.xpart.size(); ++k)
    out.xpart[k] = F.apply_scalar(G.xpart[k]) - G.apply_scalar(F.xpart[k]);
  PolyMatrix dD = PolyMatrix::zero(F.ring, F.rank(), F.rank());
  PolyMatrix dC = PolyMatrix::zero(F.ring, F.rank(), F.rank());
  for (std::size_t k = 0; k < F.xpart.size(); ++k) {
    dD = dD + G.emat.derive(k).scale(F.xpart[k]);
    dC = dC + F.emat.derive(k).scale(G.xpart[k]);
  }
  out.emat = dD - dC + G.emat * F.emat - F.emat * G.emat;
  return out;
}

/// The p-th iterate F^{op}, determined by applying F p times to each
/// coordinate function; in characteristic p this is again a derivation.
inline TotalField field_iterate_p(const TotalField& F) {
  std::uint32_t p = F.ring->p;
  TotalField out = TotalField::zero(F.ring, F.rank());
  for (std::size_t k = 0; k < F.xpart.size(); ++k) {
    ModPoly g = ModPoly::variable(F.ring, k);
    for (std::uint32_t it = 0; it < p; ++it) g = F.apply_scalar(g);
    out.xpart[k] = g;
  }
  for (std::size_t i = 0; i < F.rank(); ++i) {
    std::vector<ModPoly> h(F.rank(), ModPoly::zero(F.ring));
    h[i] = ModPoly::one(F.ring);
    for (std::uint32_t it = 0; it < p; ++it) h = F.apply_linear(h);
    for (std::size_t j = 0; j < F.rank(); ++j) out.emat.at(i, j) = h[j];
  }
  return out;
}

/// H_k = d/dx_k - sum_{i,j} (A_k)_{ij} e_j d/de_i, one per variable.
struct HorizontalField {
  std::vector<TotalField> fields;
};

inline HorizontalField horizontal_fields(const Connection& c) {
  if (c.mode != WeightMode::DR) throw precondition_error("horizontal_fields: dr mode only");
  HorizontalField h;
  for (std::size_t k = 0; k < c.nvars(); ++k) {
    TotalField f = TotalField::zero(c.ring, c.rank);
    f.xpart[k] = ModPoly::one(c.ring);
    f.emat = -c.A[k];
    h.fields.push_back(std::move(f));
  }
  return h;
}

/// Whether F lies in the span of the H_k over total-space functions:
/// subtract sum_k F(x_k) H_k and check the e-components vanish.
inline bool in_horizontal_span(const TotalField& F, const HorizontalField& h) {
  TotalField rem = F;
  for (std::size_t k = 0; k < h.fields.size(); ++k) {
    const ModPoly coeff = F.xpart[k];
    if (coeff.is_zero()) continue;
    for (std::size_t l = 0; l < rem.xpart.size(); ++l)
      rem.xpart[l] = rem.xpart[l] - h.fields[k].xpart[l] * coeff;
    rem.emat = rem.emat - h.fields[k].emat.scale(coeff);
  }
  return rem.is_zero();
}

inline bool bracket_closure(const HorizontalField& h) {
  for (std::size_t i = 0; i < h.fields.size(); ++i)
    for (std::size_t j = i + 1; j < h.fields.size(); ++j)
      if (!in_horizontal_span(bracket(h.fields[i], h.fields[j]), h)) return false;
  return true;
}

inline bool p_power_closure(const HorizontalField& h) {
  for (const auto& f : h.fields)
    if (!in_horizontal_span(field_iterate_p(f), h)) return false;
  return true;
}

} // namespace charp
