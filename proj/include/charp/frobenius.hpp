// Frobenius twist and pullback, the canonical connection, the Cartier
// operator on closed 1-forms, splittings of Cartier from a lift of
// Frobenius mod p^2, and Cartier descent.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "charp/connection.hpp"
#include "charp/matrix.hpp"
#include "charp/poly.hpp"

namespace charp {

/// Base patch X together with its Frobenius twist X'; the twisted ring
/// carries primed variable names.
struct FrobeniusContext {
  RingPtr base;
  RingPtr twist;
};

inline FrobeniusContext make_frobenius(const RingPtr& base) {
  if (base->has_t) throw precondition_error("make_frobenius: t-free base expected");
  std::vector<std::string> primed;
  primed.reserve(base->nx());
  for (const auto& n : base->xvars) primed.push_back(n + "'");
  return FrobeniusContext{base, make_ring(base->p, std::move(primed), false)};
}

/// Relative Frobenius pullback of functions: x'_i -> x_i^p.
inline ModPoly untwist(const FrobeniusContext& ctx, const ModPoly& f) {
  if (!compatible(f.ring(), ctx.twist))
    throw precondition_error("untwist: twisted ring expected");
  std::vector<ModPoly::Term> buf;
  for (const auto& t : f.terms()) {
    ExpVec e = t.exp;
    for (auto& k : e) k *= ctx.base->p;
    buf.push_back(ModPoly::Term{std::move(e), t.coeff});
  }
  return ModPoly::from_unsorted(ctx.base, std::move(buf));
}

inline PolyMatrix untwist(const FrobeniusContext& ctx, const PolyMatrix& m) {
  PolyMatrix out(ctx.base, m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = untwist(ctx, m.at(i, j));
  return out;
}

/// A 1-form sum w_i dx_i as its component list.
using OneForm = std::vector<ModPoly>;

inline OneForm d_of(const ModPoly& f) {
  OneForm out;
  out.reserve(f.ring()->nx());
  for (std::size_t i = 0; i < f.ring()->nx(); ++i) out.push_back(f.derive(i));
  return out;
}

inline bool is_closed(const OneForm& w) {
  if (w.empty()) return true;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (!(w[i].derive(j) == w[j].derive(i))) return false;
  return true;
}

inline std::string render_one_form(const OneForm& w, const RingPtr& ring, bool primed) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].is_zero()) continue;
    if (!out.empty()) out += " + ";
    std::string c = w[i].render();
    if (w[i].terms().size() > 1) c = "(" + c + ")";
    std::string dx = "d" + ring->xvars[i] + (primed ? "" : "");
    out += (c == "1" ? "" : c + "*") + dx;
  }
  return out.empty() ? "0" : out;
}

/// F^* E' with its canonical connection (zero matrices in the pulled-back
/// frame) and, when twisted Higgs matrices are supplied, their pullbacks
/// B_i(x) = B'_i(x^p).
struct CanonicalPullback {
  Connection conn;
  std::vector<PolyMatrix> higgs; // empty when no Higgs data was supplied
};

inline CanonicalPullback frobenius_pullback(const FrobeniusContext& ctx, std::size_t rank,
                                            const std::vector<PolyMatrix>& twisted_higgs = {}) {
  CanonicalPullback out{Connection::trivial(ctx.base, rank, WeightMode::DR), {}};
  for (const auto& b : twisted_higgs) out.higgs.push_back(untwist(ctx, b));
  return out;
}

struct CartierResult {
  bool closed_input = false;
  bool feasible = false;
  OneForm u; // twisted components: C(w) = sum u_i(x') dx'_i
};

/// Cartier operator on a closed 1-form, by exact solve of the decomposition
/// w = dg + sum_i u_i(x^p) x_i^{p-1} dx_i at the given degree bound. The
/// u-part is unique; g is determined only up to p-th powers.
inline CartierResult cartier_operator(const FrobeniusContext& ctx, const OneForm& w,
                                      std::uint32_t degree_bound) {
  CartierResult res;
  res.closed_input = is_closed(w);
  if (!res.closed_input) return res;
  std::uint32_t p = ctx.base->p;
  std::size_t m = ctx.base->nx();

  std::uint64_t wdeg = 0;
  for (const auto& f : w) wdeg = std::max(wdeg, f.is_zero() ? 0 : f.degree());
  std::uint32_t gd = degree_bound + 1; // caller raises the bound on infeasibility
  std::uint32_t ud = gd / p + 1;

  detail::MonomialIndex gmon(m, gd);
  detail::MonomialIndex umon(m, ud);
  std::uint32_t eqd = std::max<std::uint32_t>(std::uint32_t(wdeg), std::max(gd, p * ud + p - 1));
  detail::MonomialIndex eqn(m, eqd);

  std::size_t ncols = gmon.size() + m * umon.size();
  FpMat sys(m * eqn.size(), ncols, p);
  std::vector<std::uint32_t> rhs(m * eqn.size(), 0);

  for (std::size_t i = 0; i < m; ++i) {
    // d_i g
    for (std::size_t mu = 0; mu < gmon.size(); ++mu) {
      const ExpVec& eta = gmon.mons[mu];
      if (eta[i] == 0) continue;
      std::uint32_t f = eta[i] % p;
      if (!f) continue;
      ExpVec e = eta;
      e[i] -= 1;
      sys.at(i * eqn.size() + eqn.index.at(e), mu) = f;
    }
    // u_i(x^p) x_i^{p-1}
    for (std::size_t mu = 0; mu < umon.size(); ++mu) {
      ExpVec e = umon.mons[mu];
      for (auto& k : e) k *= p;
      e[i] += p - 1;
      sys.at(i * eqn.size() + eqn.index.at(e), gmon.size() + i * umon.size() + mu) = 1 % p;
    }
    for (const auto& t : w[i].terms()) rhs[i * eqn.size() + eqn.index.at(t.exp)] = t.coeff;
  }

  auto sol = sys.solve(rhs);
  if (!sol) return res;
  res.feasible = true;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<ModPoly::Term> terms;
    for (std::size_t mu = 0; mu < umon.size(); ++mu) {
      std::uint32_t c = (*sol)[gmon.size() + i * umon.size() + mu];
      if (c) terms.push_back(ModPoly::Term{umon.mons[mu], c});
    }
    res.u.push_back(ModPoly::from_unsorted(ctx.twist, std::move(terms)));
  }
  return res;
}

namespace detail {

/// Minimal integer-coefficient polynomials for the mixed-characteristic
/// expansion of a Frobenius lift: variables x_1..x_m, tau_1..tau_m.
struct ZPoly {
  std::size_t m = 0;
  std::map<ExpVec, long long> terms; // arity 2m

  static ZPoly zero(std::size_t m) { return ZPoly{m, {}}; }

  void add_term(const ExpVec& e, long long c) {
    if (!c) return;
    auto [it, fresh] = terms.emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  static ZPoly lift(const ModPoly& f) {
    ZPoly out = zero(f.ring()->nx());
    for (const auto& t : f.terms()) {
      ExpVec e = t.exp;
      e.resize(2 * out.m, 0);
      out.add_term(e, (long long)t.coeff);
    }
    return out;
  }

  friend ZPoly operator+(const ZPoly& a, const ZPoly& b) {
    ZPoly out = a;
    for (const auto& [e, c] : b.terms) out.add_term(e, c);
    return out;
  }

  ZPoly scale(long long s) const {
    ZPoly out = zero(m);
    for (const auto& [e, c] : terms) out.add_term(e, c * s);
    return out;
  }

  friend ZPoly operator-(const ZPoly& a, const ZPoly& b) { return a + b.scale(-1); }

  /// Substitute x_i -> x_i + tau_i, by binomial expansion of each monomial.
  ZPoly shift_by_tau() const {
    ZPoly out = zero(m);
    for (const auto& [e, c] : terms) {
      std::vector<std::pair<ExpVec, long long>> partial{{ExpVec(2 * m, 0), c}};
      for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<ExpVec, long long>> next;
        for (const auto& [pe, pc] : partial) {
          long long binom = 1;
          for (std::uint32_t k = 0; k <= e[i]; ++k) {
            ExpVec ne = pe;
            ne[i] += e[i] - k;
            ne[m + i] += k;
            next.emplace_back(std::move(ne), pc * binom);
            binom = binom * (long long)(e[i] - k) / (long long)(k + 1);
          }
        }
        partial = std::move(next);
      }
      for (auto& [pe, pc] : partial) {
        // carry along any tau-exponent already present
        for (std::size_t i = 0; i < m; ++i) pe[m + i] += e[m + i];
        out.add_term(pe, pc);
      }
    }
    return out;
  }

  /// Coefficient of tau_j among the tau-linear terms, as an integer
  /// polynomial in x alone (exponent vectors of arity m).
  std::map<ExpVec, long long> tau_linear_coefficient(std::size_t j) const {
    std::map<ExpVec, long long> out;
    for (const auto& [e, c] : terms) {
      std::uint64_t taudeg = 0;
      for (std::size_t i = 0; i < m; ++i) taudeg += e[m + i];
      if (taudeg != 1 || e[m + j] != 1) continue;
      out[ExpVec(e.begin(), e.begin() + m)] += c;
    }
    return out;
  }
};

} // namespace detail

/// Splitting of Cartier attached to a coordinate lift of Frobenius
/// F(x_i) = x_i^p + p h_i. Row i of zeta holds the components of
/// zeta(dx'_i) = x_i^{p-1} dx_i + dh_i, obtained as the tau-linear part of
/// (F(x_i + tau) - F(x_i)) / p reduced mod p.
struct CartierSplitting {
  FrobeniusContext ctx;
  std::vector<ModPoly> h; // lift correction terms, over the base ring
  PolyMatrix zeta;        // m x m, entry (i, j) = coefficient of dx_j in zeta(dx'_i)

  OneForm row(std::size_t i) const {
    OneForm out;
    for (std::size_t j = 0; j < zeta.cols(); ++j) out.push_back(zeta.at(i, j));
    return out;
  }
};

inline CartierSplitting cartier_splitting(const FrobeniusContext& ctx,
                                          const std::vector<ModPoly>& h) {
  std::uint32_t p = ctx.base->p;
  std::size_t m = ctx.base->nx();
  if (h.size() != m) throw precondition_error("cartier_splitting: one lift term per variable");
  CartierSplitting out{ctx, h, PolyMatrix::zero(ctx.base, m, m)};
  for (std::size_t i = 0; i < m; ++i) {
    if (!compatible(h[i].ring(), ctx.base))
      throw precondition_error("cartier_splitting: lift terms live on the base patch");
    // F(x_i) = x_i^p + p h_i over Z, in variables (x, tau)
    detail::ZPoly xi = detail::ZPoly::zero(m);
    {
      ExpVec e(2 * m, 0);
      e[i] = p;
      xi.add_term(e, 1);
    }
    detail::ZPoly lift = xi + detail::ZPoly::lift(h[i]).scale((long long)p);
    detail::ZPoly delta = lift.shift_by_tau() - lift;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<ModPoly::Term> terms;
      for (const auto& [e, c] : delta.tau_linear_coefficient(j)) {
        if (c % (long long)p != 0)
          throw invariant_error("cartier_splitting: tau-linear part not divisible by p");
        long long r = (c / (long long)p) % (long long)p;
        if (r < 0) r += p;
        if (r) terms.push_back(ModPoly::Term{e, std::uint32_t(r)});
      }
      out.zeta.at(i, j) = ModPoly::from_unsorted(ctx.base, std::move(terms));
    }
    if (!is_closed(out.row(i)))
      throw invariant_error("cartier_splitting: zeta(dx') is not closed");
  }
  return out;
}

struct DescendResult {
  bool ok = false;
  std::string reason;
  PolyMatrix frame; // columns are flat sections spanning the descended module
};

/// Cartier descent: an integrable connection with zero p-curvature is the
/// canonical connection of a descent to X'. Finds a flat frame and verifies
/// that gauging the trivial connection by its inverse reproduces the input.
inline DescendResult cartier_descend(const Connection& c, std::uint32_t degree_bound) {
  DescendResult out;
  out.frame = PolyMatrix::zero(c.ring, c.rank, c.rank);
  if (c.mode != WeightMode::DR) {
    out.reason = "dr mode required";
    return out;
  }
  if (!is_integrable(c)) {
    out.reason = "connection is not integrable";
    return out;
  }
  if (!p_curvature_vanishes(c)) {
    out.reason = "p-curvature does not vanish";
    return out;
  }
  FlatSections fs = flat_sections(c, degree_bound);
  if (!fs.full_rank) {
    out.reason = "flat sections span rank " + std::to_string(fs.basis.size()) + " < " +
                 std::to_string(c.rank) + " (raise the degree bound?)";
    return out;
  }
  PolyMatrix T = sections_as_matrix(c, fs);
  auto Tinv = T.inverse_const_det();
  if (!Tinv) {
    out.reason = "flat frame is not invertible over the patch";
    return out;
  }
  Connection regauged = gauge_transform(Connection::trivial(c.ring, c.rank), *Tinv);
  for (std::size_t i = 0; i < c.nvars(); ++i)
    if (!(regauged.A[i] == c.A[i])) {
      out.reason = "regauged canonical connection does not reproduce the input";
      return out;
    }
  out.ok = true;
  out.frame = std::move(T);
  return out;
}

} // namespace charp
