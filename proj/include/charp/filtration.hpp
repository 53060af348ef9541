// Filtered free modules and their Rees deformation over F_p[x][t]; Griffiths
// transversality; the associated Higgs field on the graded pieces; the
// conjugate-triple membership test (p-curvature = t^p psi); and the key
// deformation nabla_can + t^e zeta(F* psi).
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "charp/connection.hpp"
#include "charp/frobenius.hpp"
#include "charp/matrix.hpp"
#include "charp/poly.hpp"

namespace charp {

/// Decreasing exhaustive filtration by free direct summands with constant,
/// refining bases: column j of the frame has weight w_j, and F^n is spanned
/// by the columns of weight >= n.
struct FilteredModule {
  RingPtr ring;
  std::size_t rank = 0;
  FpMat frame{0, 0, 2};
  std::vector<std::uint32_t> weights;

  static FilteredModule make(RingPtr ring, FpMat frame, std::vector<std::uint32_t> weights) {
    FilteredModule v;
    v.rank = frame.rows();
    if (frame.cols() != v.rank || weights.size() != v.rank)
      throw precondition_error("FilteredModule: square frame, one weight per column");
    if (frame.rank() != v.rank)
      throw precondition_error("FilteredModule: frame must be invertible");
    v.ring = std::move(ring);
    v.frame = std::move(frame);
    v.weights = std::move(weights);
    return v;
  }

  std::uint32_t depth() const {
    std::uint32_t n = 0;
    for (auto w : weights) n = std::max(n, w + 1);
    return n;
  }

  /// Basis columns of F^n (indices into the frame).
  std::vector<std::size_t> level_columns(std::uint32_t n) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < rank; ++j)
      if (weights[j] >= n) out.push_back(j);
    return out;
  }

  PolyMatrix frame_poly() const {
    PolyMatrix S(ring, rank, rank);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < rank; ++j)
        S.at(i, j) = ModPoly::constant(ring, frame.at(i, j));
    return S;
  }
};

/// Rees module of a filtration: generated by t^{-w_j} v_j, stored with the
/// shifted nonnegative weights. The t=1 fiber is the module, the t=0 fiber
/// its associated graded.
struct ReesModule {
  RingPtr tring;
  FilteredModule filtered;

  static ReesModule build(const FilteredModule& v) {
    return ReesModule{with_t(v.ring), v};
  }

  /// t^{-shift} u lies in the Rees module iff u is an O-combination of the
  /// frame columns of weight >= shift (u given over the t-free ring).
  bool contains_shifted(const std::vector<ModPoly>& u, std::uint32_t shift) const {
    std::vector<ModPoly> coords = frame_coordinates(u);
    for (std::size_t j = 0; j < filtered.rank; ++j)
      if (filtered.weights[j] < shift && !coords[j].is_zero()) return false;
    return true;
  }

  /// Coordinates of a column with respect to the frame (constant inverse).
  std::vector<ModPoly> frame_coordinates(const std::vector<ModPoly>& u) const {
    if (u.size() != filtered.rank) throw precondition_error("frame_coordinates: bad column");
    FpMat inv = constant_inverse();
    std::vector<ModPoly> out(filtered.rank, ModPoly::zero(filtered.ring));
    for (std::size_t i = 0; i < filtered.rank; ++i)
      for (std::size_t j = 0; j < filtered.rank; ++j)
        out[i] = out[i] + u[j].scale(inv.at(i, j));
    return out;
  }

  FpMat constant_inverse() const {
    std::size_t d = filtered.rank;
    std::uint32_t p = filtered.ring->p;
    FpMat aug(d, 2 * d, p);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) aug.at(i, j) = filtered.frame.at(i, j);
      aug.at(i, d + i) = 1;
    }
    if (aug.rref().size() != d) throw invariant_error("ReesModule: frame not invertible");
    FpMat inv(d, d, p);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) inv.at(i, j) = aug.at(i, d + j);
    return inv;
  }
};

struct ReesFiberModule {
  bool at_zero = false;
  FpMat basis{0, 0, 2};                 // t=1: the underlying module's frame
  std::vector<std::uint32_t> grading;   // t=0: weight of each graded basis column
};

inline ReesModule rees_build(const FilteredModule& v) { return ReesModule::build(v); }

inline ReesFiberModule rees_fiber(const ReesModule& r, std::uint32_t t0) {
  if (t0 != 0 && t0 != 1) throw precondition_error("rees_fiber: fiber must be t=0 or t=1");
  ReesFiberModule out;
  out.at_zero = (t0 == 0);
  out.basis = r.filtered.frame;
  if (out.at_zero) out.grading = r.filtered.weights;
  return out;
}

enum class GriffithsClass { PRESERVES, GRIFFITHS, NEITHER };

inline const char* griffiths_name(GriffithsClass g) {
  switch (g) {
    case GriffithsClass::PRESERVES: return "PRESERVES";
    case GriffithsClass::GRIFFITHS: return "GRIFFITHS";
    default: return "NEITHER";
  }
}

namespace detail {
/// nabla_{D_i} applied to frame column j: the frame is constant, so only the
/// connection matrix acts.
inline std::vector<ModPoly> nabla_of_column(const Connection& c, const FilteredModule& v,
                                            std::size_t i, std::size_t j) {
  std::vector<ModPoly> col(v.rank, ModPoly::zero(v.ring));
  for (std::size_t r = 0; r < v.rank; ++r) col[r] = ModPoly::constant(v.ring, v.frame.at(r, j));
  return op_apply(c.nabla_op(i), col);
}
} // namespace detail

namespace detail {
/// u in F^n (x) O, decided monomial by monomial: each coefficient vector of
/// u must lie in the constant span of the level-n frame columns.
inline bool in_level_span(const FilteredModule& v, const std::vector<ModPoly>& u,
                          std::uint32_t n) {
  std::vector<std::size_t> cols = v.level_columns(n);
  std::uint32_t p = v.ring->p;
  // collect the monomials appearing anywhere in u
  std::vector<ExpVec> mons;
  for (const auto& f : u)
    for (const auto& t : f.terms()) mons.push_back(t.exp);
  std::sort(mons.begin(), mons.end(), grlex_less);
  mons.erase(std::unique(mons.begin(), mons.end()), mons.end());
  FpMat span(cols.size(), v.rank, p);
  for (std::size_t r = 0; r < cols.size(); ++r)
    for (std::size_t i = 0; i < v.rank; ++i) span.at(r, i) = v.frame.at(i, cols[r]);
  for (const ExpVec& mu : mons) {
    std::vector<std::uint32_t> vec(v.rank, 0);
    for (std::size_t i = 0; i < v.rank; ++i) vec[i] = u[i].coeff(mu);
    if (!span.row_span_contains(vec)) return false;
  }
  return true;
}
} // namespace detail

/// Classify nabla against the filtration, directly on filtration levels.
inline GriffithsClass griffiths_check(const FilteredModule& v, const Connection& c) {
  if (c.mode != WeightMode::DR) throw precondition_error("griffiths_check: dr mode only");
  if (c.rank != v.rank) throw precondition_error("griffiths_check: rank mismatch");
  bool preserves = true, griffiths = true;
  for (std::size_t i = 0; i < c.nvars(); ++i)
    for (std::size_t j = 0; j < v.rank; ++j) {
      std::vector<ModPoly> u = detail::nabla_of_column(c, v, i, j);
      std::uint32_t w = v.weights[j];
      if (!detail::in_level_span(v, u, w)) preserves = false;
      if (w > 0 && !detail::in_level_span(v, u, w - 1)) griffiths = false;
    }
  if (preserves) return GriffithsClass::PRESERVES;
  return griffiths ? GriffithsClass::GRIFFITHS : GriffithsClass::NEITHER;
}

/// The equivalent Rees-module formulation: nabla (resp. t nabla) maps the
/// generators t^{-w} v into the Rees module.
inline GriffithsClass griffiths_check_rees(const FilteredModule& v, const Connection& c) {
  ReesModule rees = rees_build(v);
  bool preserves = true, griffiths = true;
  for (std::size_t i = 0; i < c.nvars(); ++i)
    for (std::size_t j = 0; j < v.rank; ++j) {
      std::vector<ModPoly> u = detail::nabla_of_column(c, v, i, j);
      std::uint32_t w = v.weights[j];
      // nabla(t^{-w} v) = t^{-w} u: membership needs u in F^w (x) O
      if (!rees.contains_shifted(u, w)) preserves = false;
      // t nabla(t^{-w} v) = t^{-(w-1)} u
      if (!rees.contains_shifted(u, w == 0 ? 0 : w - 1)) griffiths = false;
    }
  if (preserves) return GriffithsClass::PRESERVES;
  return griffiths ? GriffithsClass::GRIFFITHS : GriffithsClass::NEITHER;
}

/// The induced O-linear maps gr^n -> gr^{n-1} (x) Omega: in the adapted
/// frame, the weight-(w_c - 1) block of S^{-1} A_i S. This is the t=0
/// specialization of t nabla on the Rees module.
inline std::vector<PolyMatrix> associated_higgs(const FilteredModule& v, const Connection& c) {
  GriffithsClass g = griffiths_check_rees(v, c);
  if (g == GriffithsClass::NEITHER)
    throw precondition_error("associated_higgs: connection is not Griffiths-transverse");
  ReesModule rees = rees_build(v);
  std::vector<PolyMatrix> out;
  for (std::size_t i = 0; i < c.nvars(); ++i) {
    PolyMatrix th(v.ring, v.rank, v.rank);
    for (std::size_t j = 0; j < v.rank; ++j) {
      std::vector<ModPoly> coords = rees.frame_coordinates(detail::nabla_of_column(c, v, i, j));
      for (std::size_t r = 0; r < v.rank; ++r)
        if (v.weights[r] + 1 == v.weights[j]) th.at(r, j) = coords[r];
    }
    out.push_back(std::move(th));
  }
  return out;
}

/// (V, nabla, psi) with nabla an integrable connection over F_p[x][t] and
/// psi a commuting family of O-linear F-Higgs matrices.
struct ConjTriple {
  Connection nabla;             // DR weights, ring carries t
  std::vector<PolyMatrix> psi;  // one per variable, over the t-ring

  void validate() const {
    if (!nabla.ring->has_t) throw precondition_error("ConjTriple: t-ring expected");
    if (psi.size() != nabla.nvars())
      throw precondition_error("ConjTriple: one psi matrix per variable");
    for (std::size_t i = 0; i < psi.size(); ++i)
      for (std::size_t j = i + 1; j < psi.size(); ++j)
        if (!commutator(psi[i], psi[j]).is_zero())
          throw precondition_error("ConjTriple: psi matrices must commute");
  }
};

struct MconjResult {
  bool member = false;
  bool integrable = false;
  bool o_linear = false;
  std::vector<PolyMatrix> measured; // the p-curvature matrices
};

/// Conjugate-family membership: the p-curvature of nabla equals t^p psi,
/// as matrices over F_p[x][t].
inline MconjResult mconj_member(const ConjTriple& T) {
  T.validate();
  MconjResult out;
  out.integrable = is_integrable(T.nabla);
  PCurvature pc = p_curvature(T.nabla);
  out.o_linear = pc.o_linear && pc.leading_ok;
  out.measured = pc.psi;
  if (!out.integrable || !out.o_linear) return out;
  std::uint32_t p = T.nabla.ring->p;
  ModPoly tp = ModPoly::tvar(T.nabla.ring).pow(p);
  out.member = true;
  for (std::size_t i = 0; i < pc.psi.size(); ++i)
    if (!(pc.psi[i] == T.psi[i].scale(tp))) out.member = false;
  return out;
}

struct DeformResult {
  ConjTriple triple;                  // psi stored with the kappa normalization
  std::vector<PolyMatrix> raw_pcurv;  // measured p-curvature of nabla
  std::uint32_t kappa = 1;            // (p-1)! = -1 mod p
  bool integrable = false;
  bool o_linear = false;
  bool matches_scaled = false;        // p-curvature == t^e kappa F*psi per direction
  bool mconj_ok = false;              // membership with the stored psi (expects e = p)
  std::int64_t measured_t_exponent = -1; // t-adic valuation of the p-curvature; -1 if zero
};

/// The key deformation: nabla = nabla_can + t^e sum_i zeta(dx'_i) F*psi_i on
/// F* E', for commuting nilpotent twisted Higgs matrices B'_i with
/// (B'_i)^p = 0. Reports the measured t-exponent of the p-curvature and the
/// membership verdict for the kappa-normalized psi.
inline DeformResult conj_deform(const std::vector<PolyMatrix>& twisted_higgs,
                                const CartierSplitting& zeta, std::uint32_t exponent) {
  const FrobeniusContext& ctx = zeta.ctx;
  std::uint32_t p = ctx.base->p;
  std::size_t m = ctx.base->nx();
  if (twisted_higgs.size() != m)
    throw precondition_error("conj_deform: one twisted Higgs matrix per variable");
  std::size_t d = twisted_higgs.front().rows();
  for (const auto& b : twisted_higgs) {
    if (b.rows() != d || b.cols() != d) throw precondition_error("conj_deform: square matrices");
    if (!b.matpow(p).is_zero())
      throw precondition_error("conj_deform: Higgs matrices must be nilpotent with B^p = 0");
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (!commutator(twisted_higgs[i], twisted_higgs[j]).is_zero())
        throw precondition_error("conj_deform: Higgs matrices must commute");

  RingPtr tring = with_t(ctx.base);
  std::vector<PolyMatrix> pulled; // F* psi_i over the base
  for (const auto& b : twisted_higgs) pulled.push_back(untwist(ctx, b));

  DeformResult out;
  out.kappa = small_factorial_mod(p - 1, p);
  ModPoly te = ModPoly::tvar(tring).pow(exponent);

  Connection nabla = Connection::trivial(tring, d, WeightMode::DR);
  for (std::size_t j = 0; j < m; ++j) {
    PolyMatrix Bj = PolyMatrix::zero(tring, d, d);
    for (std::size_t i = 0; i < m; ++i)
      Bj = Bj + pulled[i].embed_t().scale(zeta.zeta.at(i, j).embed_t());
    nabla.A[j] = Bj.scale(te);
  }

  out.integrable = is_integrable(nabla);
  PCurvature pc = p_curvature(nabla);
  out.o_linear = pc.o_linear && pc.leading_ok;
  out.raw_pcurv = pc.psi;

  std::uint32_t val = UINT32_MAX;
  for (const auto& psi : pc.psi) val = std::min(val, psi.t_valuation());
  out.measured_t_exponent = (val == UINT32_MAX) ? -1 : std::int64_t(val);

  out.matches_scaled = true;
  for (std::size_t j = 0; j < m; ++j) {
    PolyMatrix expect = pulled[j].embed_t().scale(te.scale(out.kappa));
    if (!(pc.psi[j] == expect)) out.matches_scaled = false;
  }

  std::vector<PolyMatrix> stored;
  for (std::size_t j = 0; j < m; ++j)
    stored.push_back(pulled[j].embed_t().scale(ModPoly::constant(tring, out.kappa)));
  out.triple = ConjTriple{nabla, std::move(stored)};
  out.mconj_ok = mconj_member(out.triple).member;
  return out;
}

} // namespace charp
