// Multivariate polynomials over F_p, with an optional commuting deformation
// parameter t on which no derivation acts. Terms are kept in ascending
// graded-lexicographic order, so iteration (and rendering) is deterministic.
#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "charp/fp.hpp"

namespace charp {

using ExpVec = std::vector<std::uint32_t>;

/// Shared descriptor of a polynomial ring F_p[x_1..x_m] or F_p[x_1..x_m][t].
struct PolyRing {
  std::uint32_t p;
  std::vector<std::string> xvars;
  bool has_t = false;

  std::size_t nx() const { return xvars.size(); }
  std::size_t arity() const { return xvars.size() + (has_t ? 1 : 0); }
  std::size_t t_index() const { return xvars.size(); }
};

using RingPtr = std::shared_ptr<const PolyRing>;

inline RingPtr make_ring(std::uint32_t p, std::vector<std::string> names, bool has_t = false) {
  if (!is_prime(p)) throw precondition_error("make_ring: modulus must be prime");
  auto r = std::make_shared<PolyRing>();
  r->p = p;
  r->xvars = std::move(names);
  r->has_t = has_t;
  return r;
}

inline RingPtr make_ring(std::uint32_t p, std::size_t m, bool has_t = false) {
  std::vector<std::string> names;
  names.reserve(m);
  for (std::size_t i = 0; i < m; ++i) names.push_back("x" + std::to_string(i + 1));
  return make_ring(p, std::move(names), has_t);
}

inline bool compatible(const RingPtr& a, const RingPtr& b) {
  return a && b && a->p == b->p && a->nx() == b->nx() && a->has_t == b->has_t;
}

inline void require_compatible(const RingPtr& a, const RingPtr& b, const char* who) {
  if (!compatible(a, b)) throw precondition_error(std::string(who) + ": ring mismatch");
}

inline RingPtr with_t(const RingPtr& r) {
  if (r->has_t) return r;
  return make_ring(r->p, r->xvars, true);
}

inline RingPtr without_t(const RingPtr& r) {
  if (!r->has_t) return r;
  return make_ring(r->p, r->xvars, false);
}

inline std::uint64_t total_degree(const ExpVec& e) {
  std::uint64_t d = 0;
  for (auto k : e) d += k;
  return d;
}

/// Ascending graded-lex: lower total degree first; ties broken so that the
/// first differing exponent decides, smaller exponent first.
inline bool grlex_less(const ExpVec& a, const ExpVec& b) {
  std::uint64_t da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

inline ExpVec exp_add(const ExpVec& a, const ExpVec& b) {
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

class ModPoly {
public:
  struct Term {
    ExpVec exp;
    std::uint32_t coeff;
  };

  ModPoly() = default;

  static ModPoly zero(RingPtr ring) { return ModPoly(std::move(ring), {}); }

  static ModPoly constant(RingPtr ring, std::uint64_t c) {
    std::uint32_t v = std::uint32_t(c % ring->p);
    if (v == 0) return zero(std::move(ring));
    ExpVec e(ring->arity(), 0);
    return ModPoly(std::move(ring), {Term{std::move(e), v}});
  }

  static ModPoly one(RingPtr ring) { return constant(std::move(ring), 1); }

  static ModPoly variable(RingPtr ring, std::size_t i) {
    if (i >= ring->nx()) throw precondition_error("ModPoly::variable: index out of range");
    ExpVec e(ring->arity(), 0);
    e[i] = 1;
    return ModPoly(std::move(ring), {Term{std::move(e), 1}});
  }

  static ModPoly tvar(RingPtr ring) {
    if (!ring->has_t) throw precondition_error("ModPoly::tvar: ring has no t");
    ExpVec e(ring->arity(), 0);
    e.back() = 1;
    return ModPoly(std::move(ring), {Term{std::move(e), 1}});
  }

  static ModPoly monomial(RingPtr ring, ExpVec e, std::uint64_t c) {
    if (e.size() != ring->arity()) throw precondition_error("ModPoly::monomial: bad arity");
    std::uint32_t v = std::uint32_t(c % ring->p);
    if (v == 0) return zero(std::move(ring));
    return ModPoly(std::move(ring), {Term{std::move(e), v}});
  }

  const RingPtr& ring() const { return ring_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::uint32_t p() const { return ring_->p; }

  std::uint32_t coeff(const ExpVec& e) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e, [](const Term& t, const ExpVec& k) {
      return grlex_less(t.exp, k);
    });
    if (it != terms_.end() && it->exp == e) return it->coeff;
    return 0;
  }

  std::uint32_t constant_term() const {
    return terms_.empty() ? 0 : (total_degree(terms_.front().exp) == 0 ? terms_.front().coeff : 0);
  }

  /// Total degree including t (zero polynomial reports 0).
  std::uint64_t degree() const {
    return terms_.empty() ? 0 : total_degree(terms_.back().exp);
  }

  /// Total degree in the x-variables only.
  std::uint64_t degree_x() const {
    std::uint64_t d = 0;
    for (const auto& t : terms_) {
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < ring_->nx(); ++i) s += t.exp[i];
      d = std::max(d, s);
    }
    return d;
  }

  friend ModPoly operator+(const ModPoly& a, const ModPoly& b) {
    require_compatible(a.ring_, b.ring_, "ModPoly::+");
    std::vector<Term> out;
    out.reserve(a.terms_.size() + b.terms_.size());
    auto ia = a.terms_.begin(), ib = b.terms_.begin();
    std::uint32_t p = a.p();
    while (ia != a.terms_.end() && ib != b.terms_.end()) {
      if (ia->exp == ib->exp) {
        std::uint32_t c = add_mod(ia->coeff, ib->coeff, p);
        if (c) out.push_back(Term{ia->exp, c});
        ++ia;
        ++ib;
      } else if (grlex_less(ia->exp, ib->exp)) {
        out.push_back(*ia++);
      } else {
        out.push_back(*ib++);
      }
    }
    out.insert(out.end(), ia, a.terms_.end());
    out.insert(out.end(), ib, b.terms_.end());
    return ModPoly(a.ring_, std::move(out));
  }

  ModPoly operator-() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = neg_mod(t.coeff, p());
    return ModPoly(ring_, std::move(out));
  }

  friend ModPoly operator-(const ModPoly& a, const ModPoly& b) { return a + (-b); }

  ModPoly scale(std::uint64_t c) const {
    std::uint32_t v = std::uint32_t(c % p());
    if (v == 0) return zero(ring_);
    if (v == 1) return *this;
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = mul_mod(t.coeff, v, p());
    return ModPoly(ring_, std::move(out));
  }

  friend ModPoly operator*(const ModPoly& a, const ModPoly& b) {
    require_compatible(a.ring_, b.ring_, "ModPoly::*");
    std::vector<Term> buf;
    buf.reserve(a.terms_.size() * b.terms_.size());
    std::uint32_t p = a.p();
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_)
        buf.push_back(Term{exp_add(ta.exp, tb.exp), mul_mod(ta.coeff, tb.coeff, p)});
    return from_unsorted(a.ring_, std::move(buf));
  }

  ModPoly pow(std::uint64_t e) const {
    ModPoly acc = one(ring_);
    ModPoly base = *this;
    while (e) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  /// Partial derivative with respect to x_i; t admits no derivation.
  ModPoly derive(std::size_t xi) const {
    if (xi >= ring_->nx()) throw precondition_error("ModPoly::derive: not an x-variable");
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (t.exp[xi] == 0) continue;
      std::uint32_t c = mul_mod(t.coeff, t.exp[xi] % p(), p());
      if (!c) continue;
      Term nt{t.exp, c};
      nt.exp[xi] -= 1;
      out.push_back(std::move(nt));
    }
    // derivative preserves graded-lex order within fixed xi-decrement? it does
    // not in general; re-sort.
    return from_unsorted(ring_, std::move(out));
  }

  /// f^p. Coefficients are Frobenius-fixed, so this equals exponent scaling.
  ModPoly frobenius() const { return pow(p()); }

  /// Substitute every variable v (including t) by v^s.
  ModPoly scale_exponents(std::uint32_t s) const {
    std::vector<Term> out = terms_;
    for (auto& t : out)
      for (auto& e : t.exp) e *= s;
    return ModPoly(ring_, std::move(out)); // grlex order is preserved by uniform scaling
  }

  /// View a t-free polynomial inside the corresponding t-ring.
  ModPoly embed_t() const {
    if (ring_->has_t) return *this;
    RingPtr r = with_t(ring_);
    std::vector<Term> out = terms_;
    for (auto& t : out) t.exp.push_back(0);
    return ModPoly(std::move(r), std::move(out));
  }

  /// Substitute t = value; the result lives in the t-free ring.
  ModPoly subst_t(std::uint32_t value) const {
    if (!ring_->has_t) return *this;
    RingPtr r = without_t(ring_);
    std::vector<Term> buf;
    buf.reserve(terms_.size());
    for (const auto& t : terms_) {
      std::uint32_t c = mul_mod(t.coeff, pow_mod(value, t.exp.back(), p()), p());
      if (!c) continue;
      ExpVec e(t.exp.begin(), t.exp.end() - 1);
      buf.push_back(Term{std::move(e), c});
    }
    return from_unsorted(std::move(r), std::move(buf));
  }

  ModPoly mul_t_power(std::uint32_t j) const {
    if (!ring_->has_t) throw precondition_error("ModPoly::mul_t_power: ring has no t");
    std::vector<Term> out = terms_;
    for (auto& t : out) t.exp.back() += j;
    return from_unsorted(ring_, std::move(out));
  }

  /// Smallest t-exponent appearing; zero polynomial reports UINT32_MAX.
  std::uint32_t t_valuation() const {
    if (!ring_->has_t) return is_zero() ? UINT32_MAX : 0;
    std::uint32_t v = UINT32_MAX;
    for (const auto& t : terms_) v = std::min(v, t.exp.back());
    return v;
  }

  std::uint32_t t_degree() const {
    if (!ring_->has_t || is_zero()) return 0;
    std::uint32_t v = 0;
    for (const auto& t : terms_) v = std::max(v, t.exp.back());
    return v;
  }

  /// Coefficient of t^j, as a polynomial in the t-free ring.
  ModPoly t_coefficient(std::uint32_t j) const {
    if (!ring_->has_t) throw precondition_error("ModPoly::t_coefficient: ring has no t");
    RingPtr r = without_t(ring_);
    std::vector<Term> buf;
    for (const auto& t : terms_) {
      if (t.exp.back() != j) continue;
      ExpVec e(t.exp.begin(), t.exp.end() - 1);
      buf.push_back(Term{std::move(e), t.coeff});
    }
    return from_unsorted(std::move(r), std::move(buf));
  }

  friend bool operator==(const ModPoly& a, const ModPoly& b) {
    if (!compatible(a.ring_, b.ring_)) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].exp != b.terms_[i].exp || a.terms_[i].coeff != b.terms_[i].coeff)
        return false;
    return true;
  }
  friend bool operator!=(const ModPoly& a, const ModPoly& b) { return !(a == b); }

  /// Canonical ASCII form, terms in descending graded-lex order.
  std::string render() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!out.empty()) out += " + ";
      out += render_term(*it);
    }
    return out;
  }

  /// Build from possibly unsorted, possibly duplicated terms.
  static ModPoly from_unsorted(RingPtr ring, std::vector<Term> buf) {
    std::sort(buf.begin(), buf.end(),
              [](const Term& a, const Term& b) { return grlex_less(a.exp, b.exp); });
    std::vector<Term> out;
    out.reserve(buf.size());
    std::uint32_t p = ring->p;
    for (auto& t : buf) {
      if (!out.empty() && out.back().exp == t.exp) {
        out.back().coeff = add_mod(out.back().coeff, t.coeff, p);
      } else {
        out.push_back(std::move(t));
      }
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coeff == 0; }),
              out.end());
    return ModPoly(std::move(ring), std::move(out));
  }

private:
  ModPoly(RingPtr ring, std::vector<Term> terms) : ring_(std::move(ring)), terms_(std::move(terms)) {}

  std::string render_term(const Term& t) const {
    std::string mono;
    for (std::size_t i = 0; i < ring_->arity(); ++i) {
      if (t.exp[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += (i < ring_->nx()) ? ring_->xvars[i] : "t";
      if (t.exp[i] > 1) mono += "^" + std::to_string(t.exp[i]);
    }
    if (mono.empty()) return std::to_string(t.coeff);
    if (t.coeff == 1) return mono;
    return std::to_string(t.coeff) + "*" + mono;
  }

  RingPtr ring_;
  std::vector<Term> terms_;
};

/// Iterated partial derivative: d^alpha f over the x-variables.
inline ModPoly derive_multi(const ModPoly& f, const ExpVec& alpha) {
  ModPoly g = f;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (std::uint32_t k = 0; k < alpha[i] && !g.is_zero(); ++k) g = g.derive(i);
  return g;
}

/// All exponent vectors of the given arity with total degree <= bound,
/// in ascending graded-lex order.
inline std::vector<ExpVec> monomials_up_to(std::size_t arity, std::uint32_t bound) {
  std::vector<ExpVec> out;
  ExpVec cur(arity, 0);
  // enumerate by total degree, lexicographic within a degree
  auto rec = [&](auto&& self, std::size_t pos, std::uint32_t remaining) -> void {
    if (pos + 1 == arity) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (std::uint32_t k = 0; k <= remaining; ++k) {
      cur[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  if (arity == 0) {
    out.push_back({});
    return out;
  }
  for (std::uint32_t d = 0; d <= bound; ++d) rec(rec, 0, d);
  std::sort(out.begin(), out.end(), grlex_less);
  return out;
}

} // namespace charp
