// Rank-d lambda-weighted connections on an affine patch: nabla_{D_i} =
// lambda D_i + A_i. Curvature, p-curvature by operator expansion, gauge
// transformations, and polynomial flat sections by exact linear solve.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "charp/diffop.hpp"
#include "charp/matrix.hpp"
#include "charp/poly.hpp"

namespace charp {

enum class WeightMode { DR, DOL, HOD };

inline const char* mode_name(WeightMode m) {
  switch (m) {
    case WeightMode::DR: return "dr";
    case WeightMode::DOL: return "dol";
    default: return "hod";
  }
}

struct Connection {
  RingPtr ring;
  std::size_t rank = 0;
  WeightMode mode = WeightMode::DR;
  std::vector<PolyMatrix> A; // one d x d matrix per x-variable

  static Connection trivial(RingPtr ring, std::size_t rank, WeightMode mode = WeightMode::DR) {
    Connection c;
    c.rank = rank;
    c.mode = mode;
    c.A.assign(ring->nx(), PolyMatrix::zero(ring, rank, rank));
    c.ring = std::move(ring);
    return c;
  }

  std::size_t nvars() const { return ring->nx(); }

  ModPoly lambda() const {
    switch (mode) {
      case WeightMode::DR: return ModPoly::one(ring);
      case WeightMode::DOL: return ModPoly::zero(ring);
      default:
        if (!ring->has_t) throw precondition_error("Connection: hod mode needs a t-ring");
        return ModPoly::tvar(ring);
    }
  }

  /// The operator form lambda D_i + A_i.
  MatOp nabla_op(std::size_t i) const {
    ExpVec e(ring->nx(), 0);
    e[i] = 1;
    MatOp out = MatOp::from_coeff(ring, A[i]);
    ModPoly l = lambda();
    if (!l.is_zero())
      out = out + MatOp::term(ring, std::move(e), PolyMatrix::identity(ring, rank).scale(l));
    return out;
  }

  std::vector<ModPoly> apply_nabla(std::size_t i, const std::vector<ModPoly>& v) const {
    return op_apply(nabla_op(i), v);
  }

  void validate() const {
    if (A.size() != ring->nx()) throw precondition_error("Connection: one matrix per variable");
    for (const auto& m : A)
      if (m.rows() != rank || m.cols() != rank)
        throw precondition_error("Connection: matrices must be rank x rank");
  }
};

/// K_{ij} = lambda d_i(A_j) - lambda d_j(A_i) + [A_i, A_j].
inline PolyMatrix curvature(const Connection& c, std::size_t i, std::size_t j) {
  if (i == j) throw precondition_error("curvature: indices must differ");
  ModPoly l = c.lambda();
  PolyMatrix out = commutator(c.A[i], c.A[j]);
  if (!l.is_zero())
    out = out + c.A[j].derive(i).scale(l) - c.A[i].derive(j).scale(l);
  return out;
}

inline bool is_integrable(const Connection& c) {
  for (std::size_t i = 0; i < c.nvars(); ++i)
    for (std::size_t j = i + 1; j < c.nvars(); ++j)
      if (!curvature(c, i, j).is_zero()) return false;
  return true;
}

/// Result of expanding (lambda D_i + A_i)^p. The order-0 matrices are the
/// p-curvature; the order-p term acts as zero on polynomial sections and is
/// checked to be exactly lambda^p D_i^p; anything in between is reported
/// instead of silently dropped.
struct PCurvature {
  std::vector<PolyMatrix> psi;
  bool o_linear = true;   // no terms of order strictly between 0 and p
  bool leading_ok = true; // order-p coefficient is lambda^p times the identity
  std::string anomaly;
};

inline PCurvature p_curvature(const Connection& c) {
  if (c.mode == WeightMode::DOL)
    throw precondition_error("p_curvature: defined for dr (or hod) weights");
  std::uint32_t p = c.ring->p;
  PCurvature out;
  ModPoly lp = c.lambda().pow(p);
  for (std::size_t i = 0; i < c.nvars(); ++i) {
    MatOp power = op_pow(c.nabla_op(i), p);
    ExpVec zero_e(c.ring->nx(), 0);
    ExpVec lead_e(c.ring->nx(), 0);
    lead_e[i] = p;
    PolyMatrix psi = power.coeff(zero_e, PolyMatrix::zero(c.ring, c.rank, c.rank));
    PolyMatrix lead = power.coeff(lead_e, PolyMatrix::zero(c.ring, c.rank, c.rank));
    if (!(lead == PolyMatrix::identity(c.ring, c.rank).scale(lp))) {
      out.leading_ok = false;
      out.anomaly += "direction " + std::to_string(i + 1) + ": leading term " + lead.render() + "; ";
    }
    for (const auto& t : power.terms()) {
      std::uint64_t d = total_degree(t.alpha);
      if (d != 0 && t.alpha != lead_e) {
        out.o_linear = false;
        out.anomaly += "direction " + std::to_string(i + 1) + ": order " + std::to_string(d) +
                       " term survives; ";
      }
    }
    out.psi.push_back(std::move(psi));
  }
  return out;
}

inline bool p_curvature_vanishes(const Connection& c) {
  PCurvature pc = p_curvature(c);
  for (const auto& m : pc.psi)
    if (!m.is_zero()) return false;
  return pc.o_linear;
}

/// A_i -> S^{-1} A_i S + lambda S^{-1} d_i(S). Requires det(S) to be a
/// nonzero constant so the result stays polynomial.
inline Connection gauge_transform(const Connection& c, const PolyMatrix& S) {
  auto Sinv = S.inverse_const_det();
  if (!Sinv) throw precondition_error("gauge_transform: det(S) must be a nonzero constant");
  Connection out = c;
  ModPoly l = c.lambda();
  for (std::size_t i = 0; i < c.nvars(); ++i) {
    out.A[i] = (*Sinv) * c.A[i] * S;
    if (!l.is_zero()) out.A[i] = out.A[i] + ((*Sinv) * S.derive(i)).scale(l);
  }
  return out;
}

namespace detail {

struct MonomialIndex {
  std::vector<ExpVec> mons;
  std::map<ExpVec, std::size_t, bool (*)(const ExpVec&, const ExpVec&)> index{grlex_less};

  explicit MonomialIndex(std::size_t arity, std::uint32_t bound) {
    mons = monomials_up_to(arity, bound);
    for (std::size_t i = 0; i < mons.size(); ++i) index.emplace(mons[i], i);
  }
  std::size_t size() const { return mons.size(); }
};

inline std::vector<std::uint32_t> coeff_vector(const std::vector<ModPoly>& column,
                                               const MonomialIndex& mi) {
  std::vector<std::uint32_t> v(column.size() * mi.size(), 0);
  for (std::size_t j = 0; j < column.size(); ++j)
    for (const auto& t : column[j].terms()) {
      auto it = mi.index.find(t.exp);
      if (it == mi.index.end()) throw invariant_error("coeff_vector: monomial out of range");
      v[j * mi.size() + it->second] = t.coeff;
    }
  return v;
}

} // namespace detail

struct FlatSections {
  std::vector<std::vector<ModPoly>> basis; // module generators over F_p[x^p]
  std::size_t kernel_dimension = 0;        // F_p-dimension at the degree bound
  bool full_rank = false;                  // basis.size() == rank
};

/// Default search bound from the spec's rationale: p * (max entry degree + 1).
inline std::uint32_t default_flat_degree_bound(const Connection& c) {
  std::uint64_t d = 0;
  for (const auto& m : c.A) d = std::max(d, m.max_degree());
  return std::uint32_t(c.ring->p * (d + 1));
}

/// Solve nabla v = 0 over polynomial sections of degree <= bound, then
/// reduce the F_p-kernel to a generating set over the subring F_p[x^p]
/// (flat sections form a module over twisted functions, not just a vector
/// space).
inline FlatSections flat_sections(const Connection& c, std::uint32_t bound) {
  if (c.mode != WeightMode::DR) throw precondition_error("flat_sections: dr mode only");
  if (c.ring->has_t) throw precondition_error("flat_sections: t-free ring expected");
  std::uint32_t p = c.ring->p;
  std::size_t m = c.nvars(), d = c.rank;
  std::uint64_t adeg = 0;
  for (const auto& mat : c.A) adeg = std::max(adeg, mat.max_degree());
  detail::MonomialIndex unk(m, bound);
  detail::MonomialIndex eqn(m, bound + std::uint32_t(adeg));

  FpMat sys(m * d * eqn.size(), d * unk.size(), p);
  auto row_of = [&](std::size_t dir, std::size_t comp, std::size_t mon) {
    return (dir * d + comp) * eqn.size() + mon;
  };
  for (std::size_t dir = 0; dir < m; ++dir) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t mu = 0; mu < unk.size(); ++mu) {
        std::size_t col = j * unk.size() + mu;
        const ExpVec& eta = unk.mons[mu];
        // d_dir contribution to component j
        if (eta[dir] > 0) {
          ExpVec e = eta;
          std::uint32_t f = e[dir] % p;
          e[dir] -= 1;
          if (f) {
            std::size_t r = row_of(dir, j, eqn.index.at(e));
            sys.at(r, col) = add_mod(sys.at(r, col), f, p);
          }
        }
        // A_dir contribution to every component r
        for (std::size_t r = 0; r < d; ++r) {
          for (const auto& t : c.A[dir].at(r, j).terms()) {
            ExpVec e = exp_add(t.exp, eta);
            std::size_t row = row_of(dir, r, eqn.index.at(e));
            sys.at(row, col) = add_mod(sys.at(row, col), t.coeff, p);
          }
        }
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> kernel = sys.kernel_basis();
  FlatSections out;
  out.kernel_dimension = kernel.size();

  // materialize kernel vectors as polynomial columns
  std::vector<std::vector<ModPoly>> sections;
  for (const auto& v : kernel) {
    std::vector<ModPoly> col;
    col.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<ModPoly::Term> terms;
      for (std::size_t mu = 0; mu < unk.size(); ++mu) {
        std::uint32_t cval = v[j * unk.size() + mu];
        if (cval) terms.push_back(ModPoly::Term{unk.mons[mu], cval});
      }
      col.push_back(ModPoly::from_unsorted(c.ring, std::move(terms)));
    }
    sections.push_back(std::move(col));
  }
  std::sort(sections.begin(), sections.end(),
            [](const std::vector<ModPoly>& a, const std::vector<ModPoly>& b) {
              std::uint64_t da = 0, db = 0;
              std::string ra, rb;
              for (const auto& f : a) {
                da = std::max(da, f.is_zero() ? 0 : f.degree());
                ra += f.render() + ";";
              }
              for (const auto& f : b) {
                db = std::max(db, f.is_zero() ? 0 : f.degree());
                rb += f.render() + ";";
              }
              if (da != db) return da < db;
              return ra < rb;
            });

  // greedy reduction to F_p[x^p]-module generators
  detail::MonomialIndex full(m, bound);
  auto in_module_span = [&](const std::vector<ModPoly>& v,
                            const std::vector<std::vector<ModPoly>>& gens) {
    if (gens.empty()) return false;
    std::vector<std::vector<std::uint32_t>> rows;
    for (const auto& w : gens) {
      std::uint64_t wdeg = 0;
      for (const auto& f : w) wdeg = std::max(wdeg, f.is_zero() ? 0 : f.degree());
      std::uint32_t room = bound >= wdeg ? std::uint32_t((bound - wdeg) / p) : 0;
      for (const ExpVec& gamma : monomials_up_to(m, room)) {
        ExpVec pg = gamma;
        for (auto& e : pg) e *= p;
        ModPoly mono = ModPoly::monomial(c.ring, [&] {
          ExpVec e = pg;
          e.resize(c.ring->arity(), 0);
          return e;
        }(), 1);
        std::vector<ModPoly> scaled;
        scaled.reserve(w.size());
        bool in_range = true;
        for (const auto& f : w) {
          ModPoly g = f * mono;
          if (!g.is_zero() && g.degree() > bound) {
            in_range = false;
            break;
          }
          scaled.push_back(std::move(g));
        }
        if (in_range) rows.push_back(detail::coeff_vector(scaled, full));
      }
    }
    FpMat span(rows.size(), d * full.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t jj = 0; jj < rows[i].size(); ++jj) span.at(i, jj) = rows[i][jj];
    return span.row_span_contains(detail::coeff_vector(v, full));
  };

  for (const auto& s : sections)
    if (!in_module_span(s, out.basis)) out.basis.push_back(s);
  out.full_rank = out.basis.size() == d;
  return out;
}

inline PolyMatrix sections_as_matrix(const Connection& c, const FlatSections& fs) {
  PolyMatrix T(c.ring, c.rank, fs.basis.size());
  for (std::size_t j = 0; j < fs.basis.size(); ++j)
    for (std::size_t i = 0; i < c.rank; ++i) T.at(i, j) = fs.basis[j][i];
  return T;
}

} // namespace charp
