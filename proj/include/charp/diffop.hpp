// The ring of crystalline differential operators in normal form
// sum f_alpha(x) D^alpha with coefficients on the left, over scalar or
// matrix coefficients. Carries the duality pairing with P^n, p-curvature
// of derivations, and the conjugate filtration by ideals (D_i^{pk}).
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "charp/fp.hpp"
#include "charp/matrix.hpp"
#include "charp/pd.hpp"
#include "charp/poly.hpp"

namespace charp {

inline bool coeff_is_zero(const ModPoly& c) { return c.is_zero(); }
inline bool coeff_is_zero(const PolyMatrix& c) { return c.is_zero(); }
inline ModPoly coeff_add(const ModPoly& a, const ModPoly& b) { return a + b; }
inline PolyMatrix coeff_add(const PolyMatrix& a, const PolyMatrix& b) { return a + b; }
inline ModPoly coeff_mul(const ModPoly& a, const ModPoly& b) { return a * b; }
inline PolyMatrix coeff_mul(const PolyMatrix& a, const PolyMatrix& b) { return a * b; }
inline ModPoly coeff_neg(const ModPoly& a) { return -a; }
inline PolyMatrix coeff_neg(const PolyMatrix& a) { return -a; }
inline ModPoly coeff_derive(const ModPoly& a, std::size_t i) { return a.derive(i); }
inline PolyMatrix coeff_derive(const PolyMatrix& a, std::size_t i) { return a.derive(i); }
inline ModPoly coeff_scale(const ModPoly& a, const ModPoly& f) { return a * f; }
inline PolyMatrix coeff_scale(const PolyMatrix& a, const ModPoly& f) { return a.scale(f); }
inline bool coeff_eq(const ModPoly& a, const ModPoly& b) { return a == b; }
inline bool coeff_eq(const PolyMatrix& a, const PolyMatrix& b) { return a == b; }
inline std::string coeff_render(const ModPoly& a) { return a.render(); }
inline std::string coeff_render(const PolyMatrix& a) { return a.render(); }

template <class C>
class Operator {
public:
  struct Term {
    ExpVec alpha; // D-exponent over the x-variables
    C coeff;
  };

  Operator() = default;

  static Operator zero(RingPtr ring) { return Operator(std::move(ring), {}); }

  static Operator from_coeff(RingPtr ring, const C& c) {
    Operator out = zero(std::move(ring));
    if (!coeff_is_zero(c)) out.terms_.push_back(Term{ExpVec(out.ring_->nx(), 0), c});
    return out;
  }

  static Operator term(RingPtr ring, ExpVec alpha, const C& c) {
    if (alpha.size() != ring->nx()) throw precondition_error("Operator::term: bad arity");
    Operator out = zero(std::move(ring));
    if (!coeff_is_zero(c)) out.terms_.push_back(Term{std::move(alpha), c});
    return out;
  }

  const RingPtr& ring() const { return ring_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  std::uint64_t order() const {
    std::uint64_t d = 0;
    for (const auto& t : terms_) d = std::max(d, total_degree(t.alpha));
    return d;
  }

  C coeff(const ExpVec& alpha, const C& zero_like) const {
    for (const auto& t : terms_)
      if (t.alpha == alpha) return t.coeff;
    return zero_like;
  }

  bool has_term(const ExpVec& alpha) const {
    for (const auto& t : terms_)
      if (t.alpha == alpha) return true;
    return false;
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    require_compatible(a.ring_, b.ring_, "Operator::+");
    std::vector<Term> buf = a.terms_;
    buf.insert(buf.end(), b.terms_.begin(), b.terms_.end());
    return from_unsorted(a.ring_, std::move(buf));
  }

  Operator operator-() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = coeff_neg(t.coeff);
    return Operator(ring_, std::move(out));
  }

  friend Operator operator-(const Operator& a, const Operator& b) { return a + (-b); }

  /// Left multiplication by a coefficient.
  Operator scale_left(const C& c) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      C nc = coeff_mul(c, t.coeff);
      if (!coeff_is_zero(nc)) out.push_back(Term{t.alpha, std::move(nc)});
    }
    return Operator(ring_, std::move(out));
  }

  Operator scale_poly(const ModPoly& f) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      C nc = coeff_scale(t.coeff, f);
      if (!coeff_is_zero(nc)) out.push_back(Term{t.alpha, std::move(nc)});
    }
    return Operator(ring_, std::move(out));
  }

  friend bool operator==(const Operator& a, const Operator& b) {
    if (!compatible(a.ring_, b.ring_)) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].alpha != b.terms_[i].alpha ||
          !coeff_eq(a.terms_[i].coeff, b.terms_[i].coeff))
        return false;
    return true;
  }
  friend bool operator!=(const Operator& a, const Operator& b) { return !(a == b); }

  std::string render() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!out.empty()) out += " + ";
      out += render_term(*it);
    }
    return out;
  }

  static Operator from_unsorted(RingPtr ring, std::vector<Term> buf) {
    std::sort(buf.begin(), buf.end(),
              [](const Term& a, const Term& b) { return grlex_less(a.alpha, b.alpha); });
    std::vector<Term> out;
    for (auto& t : buf) {
      if (coeff_is_zero(t.coeff)) continue;
      if (!out.empty() && out.back().alpha == t.alpha)
        out.back().coeff = coeff_add(out.back().coeff, t.coeff);
      else
        out.push_back(std::move(t));
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return coeff_is_zero(t.coeff); }),
              out.end());
    return Operator(std::move(ring), std::move(out));
  }

private:
  Operator(RingPtr ring, std::vector<Term> terms)
      : ring_(std::move(ring)), terms_(std::move(terms)) {}

  std::string render_term(const Term& t) const {
    std::string mono;
    for (std::size_t i = 0; i < t.alpha.size(); ++i) {
      if (t.alpha[i] == 0) continue;
      if (!mono.empty()) mono += " ";
      mono += "D" + std::to_string(i + 1);
      if (t.alpha[i] > 1) mono += "^" + std::to_string(t.alpha[i]);
    }
    std::string c = coeff_render(t.coeff);
    if (mono.empty()) return c;
    if (c == "1") return mono;
    bool paren = false;
    if constexpr (std::is_same_v<C, ModPoly>) paren = t.coeff.terms().size() > 1;
    if (paren) c = "(" + c + ")";
    return c + " " + mono;
  }

  RingPtr ring_;
  std::vector<Term> terms_;
};

using DiffOp = Operator<ModPoly>;
using MatOp = Operator<PolyMatrix>;

inline DiffOp partial(RingPtr ring, std::size_t i, std::uint32_t power = 1) {
  ExpVec a(ring->nx(), 0);
  a[i] = power;
  return DiffOp::term(ring, std::move(a), ModPoly::one(ring));
}

inline MatOp mat_partial(RingPtr ring, std::size_t dim, std::size_t i, std::uint32_t power = 1) {
  ExpVec a(ring->nx(), 0);
  a[i] = power;
  return MatOp::term(ring, std::move(a), PolyMatrix::identity(ring, dim));
}

/// Normal-form product, by iterated application of the rewrite
/// D^alpha g = sum_{k <= alpha} C(alpha, k) d^{alpha-k}(g) D^k.
template <class C>
Operator<C> op_mul(const Operator<C>& a, const Operator<C>& b) {
  require_compatible(a.ring(), b.ring(), "op_mul");
  std::uint32_t p = a.ring()->p;
  std::size_t m = a.ring()->nx();
  std::vector<typename Operator<C>::Term> buf;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      // enumerate k <= alpha componentwise; prune zero binomials and zero
      // derivatives along the way
      ExpVec k(m, 0);
      auto rec = [&](auto&& self, std::size_t pos, std::uint32_t binom, const C& derived) -> void {
        if (binom == 0 || coeff_is_zero(derived)) return;
        if (pos == m) {
          C nc = coeff_mul(ta.coeff, derived);
          if (binom != 1) nc = coeff_scale(nc, ModPoly::constant(a.ring(), binom));
          if (coeff_is_zero(nc)) return;
          buf.push_back(typename Operator<C>::Term{exp_add(k, tb.alpha), std::move(nc)});
          return;
        }
        C cur = derived; // k[pos] = alpha[pos] first: no derivative in this slot
        for (std::uint32_t kp = ta.alpha[pos] + 1; kp-- > 0;) {
          k[pos] = kp;
          std::uint32_t c2 =
              mul_mod(binom, binom_mod_p(ta.alpha[pos], kp, p).value, p);
          if (c2 != 0 && !coeff_is_zero(cur)) self(self, pos + 1, c2, cur);
          if (kp > 0) {
            cur = coeff_derive(cur, pos);
            if (coeff_is_zero(cur)) break;
          }
        }
        k[pos] = 0;
      };
      rec(rec, 0, 1 % p, tb.coeff);
    }
  return Operator<C>::from_unsorted(a.ring(), std::move(buf));
}

template <class C>
Operator<C> op_pow(const Operator<C>& a, std::uint64_t e) {
  Operator<C> acc = a;
  if (e == 0) throw precondition_error("op_pow: zero power needs a unit prototype");
  for (std::uint64_t i = 1; i < e; ++i) acc = op_mul(acc, a);
  return acc;
}

/// Evaluate a scalar operator on a polynomial.
inline ModPoly op_apply(const DiffOp& a, const ModPoly& f) {
  require_compatible(a.ring(), f.ring(), "op_apply");
  ModPoly acc = ModPoly::zero(a.ring());
  for (const auto& t : a.terms()) acc = acc + t.coeff * derive_multi(f, t.alpha);
  return acc;
}

/// Evaluate a matrix operator on a column of polynomials.
inline std::vector<ModPoly> op_apply(const MatOp& a, const std::vector<ModPoly>& v) {
  if (v.empty()) return v;
  std::vector<ModPoly> acc(v.size(), ModPoly::zero(v.front().ring()));
  for (const auto& t : a.terms()) {
    if (t.coeff.cols() != v.size()) throw precondition_error("op_apply: shape mismatch");
    std::vector<ModPoly> dv(v.size(), ModPoly::zero(v.front().ring()));
    for (std::size_t i = 0; i < v.size(); ++i) dv[i] = derive_multi(v[i], t.alpha);
    for (std::size_t i = 0; i < t.coeff.rows(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        acc[i] = acc[i] + t.coeff.at(i, j) * dv[j];
  }
  return acc;
}

/// Left-O-bilinear duality pairing: <tau^[k], D^alpha> = delta_{k,alpha}.
inline ModPoly pair(const PDElement& a, const DiffOp& b) {
  require_compatible(a.ring(), b.ring(), "pair");
  if (b.order() > a.level()) throw precondition_error("pair: operator order exceeds level");
  ModPoly acc = ModPoly::zero(a.ring());
  for (const auto& t : b.terms()) acc = acc + a.coeff(t.alpha) * t.coeff;
  return acc;
}

/// Pair a tensor in normal form against u (x) v: the right factor contracts
/// with v, and the scalar it produces enters the left factor through the
/// second O-structure (PD Taylor rewrite); then the left factor contracts
/// with u. This is the dual of the multiplication on Lambda.
inline ModPoly pair_tensor(const PDTensor& t, const DiffOp& u, const DiffOp& v) {
  require_compatible(t.ring(), u.ring(), "pair_tensor");
  PDElement acc = PDElement::zero(t.ring(), t.level());
  for (const auto& term : t.terms()) {
    ModPoly h = v.coeff(term.right, ModPoly::zero(v.ring()));
    if (h.is_zero()) continue;
    PDElement left = PDElement::monomial(term.coeff, term.left, t.level());
    acc = acc + pd_mul(left, pd_taylor(h, t.level()));
  }
  return pair(acc, u);
}

/// A derivation D = sum g_i D_i.
struct Derivation {
  RingPtr ring;
  std::vector<ModPoly> g; // one per x-variable

  static Derivation zero(RingPtr r) {
    std::vector<ModPoly> g(r->nx(), ModPoly::zero(r));
    return Derivation{std::move(r), std::move(g)};
  }

  DiffOp to_op() const {
    DiffOp acc = DiffOp::zero(ring);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ExpVec a(ring->nx(), 0);
      a[i] = 1;
      acc = acc + DiffOp::term(ring, std::move(a), g[i]);
    }
    return acc;
  }

  ModPoly apply(const ModPoly& f) const {
    ModPoly acc = ModPoly::zero(ring);
    for (std::size_t i = 0; i < g.size(); ++i) acc = acc + g[i] * f.derive(i);
    return acc;
  }

  friend Derivation operator+(const Derivation& a, const Derivation& b) {
    require_compatible(a.ring, b.ring, "Derivation::+");
    Derivation out = a;
    for (std::size_t i = 0; i < out.g.size(); ++i) out.g[i] = out.g[i] + b.g[i];
    return out;
  }

  Derivation scale(const ModPoly& f) const {
    Derivation out = *this;
    for (auto& c : out.g) c = c * f;
    return out;
  }
};

/// The p-th iterate D^{op} as a derivation: determined by its values on the
/// coordinates, each obtained by applying D p times.
inline Derivation iterate_p(const Derivation& d) {
  Derivation out = Derivation::zero(d.ring);
  std::uint32_t p = d.ring->p;
  for (std::size_t i = 0; i < d.ring->nx(); ++i) {
    ModPoly f = ModPoly::variable(d.ring, i);
    for (std::uint32_t k = 0; k < p; ++k) f = d.apply(f);
    out.g[i] = f;
  }
  return out;
}

/// psi(D) = D^p - D^{op}.
inline DiffOp p_curvature_derivation(const Derivation& d) {
  std::uint32_t p = d.ring->p;
  DiffOp dp = d.to_op();
  if (dp.is_zero()) return dp;
  return op_pow(dp, p) - iterate_p(d).to_op();
}

/// Conjugate weight of a D-monomial: sum_i floor(alpha_i / p).
inline std::uint64_t conj_weight(const ExpVec& alpha, std::uint32_t p) {
  std::uint64_t w = 0;
  for (auto a : alpha) w += a / p;
  return w;
}

/// Membership in Lambda^{>= pk}, the two-sided ideal generated by D_i^{pk}.
/// Since the D_i^{p} are central, the ideal is the left O-span of monomials
/// whose conjugate weight is at least k.
template <class C>
bool conj_level_membership(const Operator<C>& a, std::uint64_t k) {
  std::uint32_t p = a.ring()->p;
  for (const auto& t : a.terms())
    if (conj_weight(t.alpha, p) < k) return false;
  return true;
}

/// Drop the part lying in Lambda^{>= pk}; what remains represents the class
/// modulo that ideal in the normal-form basis.
template <class C>
Operator<C> conj_reduce(const Operator<C>& a, std::uint64_t k) {
  std::uint32_t p = a.ring()->p;
  std::vector<typename Operator<C>::Term> buf;
  for (const auto& t : a.terms())
    if (conj_weight(t.alpha, p) < k) buf.push_back(t);
  return Operator<C>::from_unsorted(a.ring(), std::move(buf));
}

} // namespace charp
