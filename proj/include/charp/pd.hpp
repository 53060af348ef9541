// Truncated divided-power algebra P^n = O<tau_1..tau_m> / J^[n+1] over
// O = F_p[x], its comultiplication into P (x)_{2,O,1} P, and the quotient
// P/I that drives the p-curvature morphism. The left O-structure is the
// stored coefficient; the right structure enters through the PD Taylor
// expansion g(x + tau).
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "charp/fp.hpp"
#include "charp/poly.hpp"

namespace charp {

/// tau-exponent naming scheme used by renderers.
using PDNamer = std::function<std::string(std::size_t)>;

inline PDNamer tau_namer() {
  return [](std::size_t i) { return "T" + std::to_string(i + 1); };
}

class PDElement {
public:
  struct Term {
    ExpVec k;      // PD multi-index, arity = number of x-variables
    ModPoly coeff; // left O-coefficient
  };

  PDElement() = default;

  static PDElement zero(RingPtr ring, std::uint32_t level) {
    return PDElement(std::move(ring), level, {});
  }

  static PDElement from_poly(const ModPoly& f, std::uint32_t level) {
    PDElement out = zero(f.ring(), level);
    if (!f.is_zero()) out.terms_.push_back(Term{ExpVec(f.ring()->nx(), 0), f});
    return out;
  }

  static PDElement one(RingPtr ring, std::uint32_t level) {
    return from_poly(ModPoly::one(ring), level);
  }

  /// f * tau^[k].
  static PDElement monomial(const ModPoly& f, ExpVec k, std::uint32_t level) {
    if (k.size() != f.ring()->nx()) throw precondition_error("PDElement::monomial: bad arity");
    if (total_degree(k) > level)
      throw precondition_error("PDElement::monomial: degree exceeds level");
    PDElement out = zero(f.ring(), level);
    if (!f.is_zero()) out.terms_.push_back(Term{std::move(k), f});
    return out;
  }

  static PDElement tau(RingPtr ring, std::size_t i, std::uint32_t pd_degree, std::uint32_t level) {
    ExpVec k(ring->nx(), 0);
    k[i] = pd_degree;
    return monomial(ModPoly::one(ring), std::move(k), level);
  }

  const RingPtr& ring() const { return ring_; }
  std::uint32_t level() const { return level_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t nvars() const { return ring_->nx(); }

  ModPoly coeff(const ExpVec& k) const {
    for (const auto& t : terms_)
      if (t.k == k) return t.coeff;
    return ModPoly::zero(ring_);
  }

  /// Image under killing all tau, i.e. the counit.
  ModPoly counit() const { return coeff(ExpVec(ring_->nx(), 0)); }

  friend PDElement operator+(const PDElement& a, const PDElement& b) {
    a.check(b, "PDElement::+");
    std::vector<Term> buf = a.terms_;
    buf.insert(buf.end(), b.terms_.begin(), b.terms_.end());
    return from_unsorted(a.ring_, a.level_, std::move(buf));
  }

  PDElement operator-() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = -t.coeff;
    return PDElement(ring_, level_, std::move(out));
  }

  friend PDElement operator-(const PDElement& a, const PDElement& b) { return a + (-b); }

  /// Left multiplication by a coefficient.
  PDElement scale(const ModPoly& f) const {
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      ModPoly c = t.coeff * f;
      if (!c.is_zero()) out.push_back(Term{t.k, std::move(c)});
    }
    return PDElement(ring_, level_, std::move(out));
  }

  friend bool operator==(const PDElement& a, const PDElement& b) {
    if (!compatible(a.ring_, b.ring_) || a.level_ != b.level_) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].k != b.terms_[i].k || !(a.terms_[i].coeff == b.terms_[i].coeff))
        return false;
    return true;
  }
  friend bool operator!=(const PDElement& a, const PDElement& b) { return !(a == b); }

  std::string render(const PDNamer& name = tau_namer()) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!out.empty()) out += " + ";
      out += render_term(*it, name);
    }
    return out;
  }

  static PDElement from_unsorted(RingPtr ring, std::uint32_t level, std::vector<Term> buf) {
    std::sort(buf.begin(), buf.end(),
              [](const Term& a, const Term& b) { return grlex_less(a.k, b.k); });
    std::vector<Term> out;
    for (auto& t : buf) {
      if (total_degree(t.k) > level || t.coeff.is_zero()) continue;
      if (!out.empty() && out.back().k == t.k)
        out.back().coeff = out.back().coeff + t.coeff;
      else
        out.push_back(std::move(t));
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return t.coeff.is_zero(); }),
              out.end());
    return PDElement(std::move(ring), level, std::move(out));
  }

  static std::string render_pd_monomial(const ExpVec& k, const PDNamer& name) {
    std::string mono;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] == 0) continue;
      mono += name(i) + "^[" + std::to_string(k[i]) + "]";
    }
    return mono;
  }

private:
  PDElement(RingPtr ring, std::uint32_t level, std::vector<Term> terms)
      : ring_(std::move(ring)), level_(level), terms_(std::move(terms)) {}

  void check(const PDElement& b, const char* who) const {
    require_compatible(ring_, b.ring_, who);
    if (level_ != b.level_) throw precondition_error(std::string(who) + ": level mismatch");
  }

  std::string render_term(const Term& t, const PDNamer& name) const {
    std::string mono = render_pd_monomial(t.k, name);
    if (mono.empty()) return t.coeff.render();
    if (t.coeff == ModPoly::one(ring_)) return mono;
    std::string c = t.coeff.render();
    if (t.coeff.terms().size() > 1) c = "(" + c + ")";
    return c + "*" + mono;
  }

  RingPtr ring_;
  std::uint32_t level_ = 0;
  std::vector<Term> terms_;

  friend PDElement pd_mul(const PDElement&, const PDElement&);
};

/// Product in P^n: tau_i^[a] tau_i^[b] = C(a+b, a) tau_i^[a+b] per variable,
/// truncated above the level. Coefficients multiply in O.
inline PDElement pd_mul(const PDElement& a, const PDElement& b) {
  require_compatible(a.ring(), b.ring(), "pd_mul");
  if (a.level() != b.level()) throw precondition_error("pd_mul: level mismatch");
  std::uint32_t p = a.ring()->p;
  std::vector<PDElement::Term> buf;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      ExpVec k = exp_add(ta.k, tb.k);
      if (total_degree(k) > a.level()) continue;
      std::uint32_t c = 1 % p;
      for (std::size_t i = 0; i < k.size() && c; ++i)
        c = mul_mod(c, binom_mod_p(k[i], ta.k[i], p).value, p);
      if (!c) continue;
      ModPoly coeff = (ta.coeff * tb.coeff).scale(c);
      if (coeff.is_zero()) continue;
      buf.push_back(PDElement::Term{std::move(k), std::move(coeff)});
    }
  return PDElement::from_unsorted(a.ring(), a.level(), std::move(buf));
}

/// PD Taylor expansion g(x + tau) = sum_{|k| <= n} d^k(g) tau^[k].
inline PDElement pd_taylor(const ModPoly& g, std::uint32_t level) {
  std::vector<PDElement::Term> buf;
  std::size_t m = g.ring()->nx();
  for (const ExpVec& k : monomials_up_to(m, level)) {
    ModPoly d = derive_multi(g, k);
    if (!d.is_zero()) buf.push_back(PDElement::Term{k, std::move(d)});
  }
  return PDElement::from_unsorted(g.ring(), level, std::move(buf));
}

/// Right multiplication by a coefficient: f enters through the second
/// O-structure, i.e. as the PD Taylor series f(x + tau).
inline PDElement pd_scale_right(const PDElement& a, const ModPoly& f) {
  return pd_mul(a, pd_taylor(f, a.level()));
}

/// Image in P/I: PD monomials whose multi-index has an entry not divisible
/// by p die; survivors tau^[p k] are relabeled as PD generators of degree k.
inline PDElement quotient_mod_I(const PDElement& a) {
  std::uint32_t p = a.ring()->p;
  std::vector<PDElement::Term> buf;
  for (const auto& t : a.terms()) {
    ExpVec k = t.k;
    bool survives = true;
    for (auto& e : k) {
      if (e % p != 0) {
        survives = false;
        break;
      }
      e /= p;
    }
    if (survives) buf.push_back(PDElement::Term{std::move(k), t.coeff});
  }
  return PDElement::from_unsorted(a.ring(), a.level() / p, std::move(buf));
}

/// Element of P^n (x)_{2,O,1} P^n in normal form: all O-coefficients on the
/// far left, basis tau_(1)^[i] (x) tau_(2)^[j], total degree bounded by the
/// level. A coefficient entering from the right factor is rewritten across
/// the left factor by pd_taylor.
class PDTensor {
public:
  struct Term {
    ExpVec left;
    ExpVec right;
    ModPoly coeff;
  };

  static PDTensor zero(RingPtr ring, std::uint32_t level) {
    return PDTensor(std::move(ring), level, {});
  }

  const RingPtr& ring() const { return ring_; }
  std::uint32_t level() const { return level_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  friend PDTensor operator+(const PDTensor& a, const PDTensor& b) {
    require_compatible(a.ring_, b.ring_, "PDTensor::+");
    if (a.level_ != b.level_) throw precondition_error("PDTensor::+: level mismatch");
    std::vector<Term> buf = a.terms_;
    buf.insert(buf.end(), b.terms_.begin(), b.terms_.end());
    return from_unsorted(a.ring_, a.level_, std::move(buf));
  }

  PDTensor operator-() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = -t.coeff;
    return PDTensor(ring_, level_, std::move(out));
  }

  friend PDTensor operator-(const PDTensor& a, const PDTensor& b) { return a + (-b); }

  PDElement counit_left() const {
    std::vector<PDElement::Term> buf;
    for (const auto& t : terms_)
      if (total_degree(t.left) == 0) buf.push_back(PDElement::Term{t.right, t.coeff});
    return PDElement::from_unsorted(ring_, level_, std::move(buf));
  }

  PDElement counit_right() const {
    std::vector<PDElement::Term> buf;
    for (const auto& t : terms_)
      if (total_degree(t.right) == 0) buf.push_back(PDElement::Term{t.left, t.coeff});
    return PDElement::from_unsorted(ring_, level_, std::move(buf));
  }

  /// Apply a monomial relabeling to both factors, dropping terms the map
  /// rejects (used for theta (x) theta).
  PDTensor map_factors(const std::function<bool(const ExpVec&, ExpVec&)>& f,
                       std::uint32_t new_level) const {
    std::vector<Term> buf;
    for (const auto& t : terms_) {
      ExpVec l, r;
      if (!f(t.left, l) || !f(t.right, r)) continue;
      buf.push_back(Term{std::move(l), std::move(r), t.coeff});
    }
    return from_unsorted(ring_, new_level, std::move(buf));
  }

  friend bool operator==(const PDTensor& a, const PDTensor& b) {
    if (!compatible(a.ring_, b.ring_) || a.level_ != b.level_) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      const auto& x = a.terms_[i];
      const auto& y = b.terms_[i];
      if (x.left != y.left || x.right != y.right || !(x.coeff == y.coeff)) return false;
    }
    return true;
  }
  friend bool operator!=(const PDTensor& a, const PDTensor& b) { return !(a == b); }

  std::string render(const PDNamer& name = tau_namer()) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!out.empty()) out += " + ";
      std::string lm = PDElement::render_pd_monomial(it->left, name);
      std::string rm = PDElement::render_pd_monomial(it->right, name);
      if (lm.empty()) lm = "1";
      if (rm.empty()) rm = "1";
      std::string c;
      if (!(it->coeff == ModPoly::one(ring_))) {
        c = it->coeff.render();
        if (it->coeff.terms().size() > 1) c = "(" + c + ")";
        c += "*";
      }
      out += c + lm + " (x) " + rm;
    }
    return out;
  }

  static PDTensor from_unsorted(RingPtr ring, std::uint32_t level, std::vector<Term> buf) {
    auto less = [](const Term& a, const Term& b) {
      if (a.left != b.left) return grlex_less(a.left, b.left);
      return grlex_less(a.right, b.right);
    };
    std::sort(buf.begin(), buf.end(), less);
    std::vector<Term> out;
    for (auto& t : buf) {
      if (total_degree(t.left) + total_degree(t.right) > level || t.coeff.is_zero()) continue;
      if (!out.empty() && out.back().left == t.left && out.back().right == t.right)
        out.back().coeff = out.back().coeff + t.coeff;
      else
        out.push_back(std::move(t));
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return t.coeff.is_zero(); }),
              out.end());
    return PDTensor(std::move(ring), level, std::move(out));
  }

private:
  PDTensor(RingPtr ring, std::uint32_t level, std::vector<Term> terms)
      : ring_(std::move(ring)), level_(level), terms_(std::move(terms)) {}

  RingPtr ring_;
  std::uint32_t level_ = 0;
  std::vector<Term> terms_;
};

/// Comultiplication Delta(tau^[n]) = sum_{i+j=n} tau^[i] (x) tau^[j],
/// coordinatewise on multi-indices; left coefficients pass through.
inline PDTensor comultiply(const PDElement& a) {
  std::vector<PDTensor::Term> buf;
  for (const auto& t : a.terms()) {
    // enumerate componentwise splits i + j = k
    ExpVec i(t.k.size(), 0);
    auto rec = [&](auto&& self, std::size_t pos) -> void {
      if (pos == t.k.size()) {
        ExpVec j(t.k.size());
        for (std::size_t q = 0; q < t.k.size(); ++q) j[q] = t.k[q] - i[q];
        buf.push_back(PDTensor::Term{i, std::move(j), t.coeff});
        return;
      }
      for (std::uint32_t v = 0; v <= t.k[pos]; ++v) {
        i[pos] = v;
        self(self, pos + 1);
      }
    };
    rec(rec, 0);
  }
  return PDTensor::from_unsorted(a.ring(), a.level(), std::move(buf));
}

/// Normal form of a (x) b: the right factor's coefficients cross the left
/// factor as PD Taylor series.
inline PDTensor tensor_product(const PDElement& a, const PDElement& b) {
  require_compatible(a.ring(), b.ring(), "tensor_product");
  if (a.level() != b.level()) throw precondition_error("tensor_product: level mismatch");
  std::vector<PDTensor::Term> buf;
  for (const auto& tb : b.terms()) {
    PDElement left = pd_mul(a, pd_taylor(tb.coeff, a.level()));
    for (const auto& tl : left.terms())
      buf.push_back(PDTensor::Term{tl.k, tb.k, tl.coeff});
  }
  return PDTensor::from_unsorted(a.ring(), a.level(), std::move(buf));
}

/// Three-factor tensors, only needed to state coassociativity.
struct PDTriple {
  std::map<std::tuple<ExpVec, ExpVec, ExpVec>, ModPoly> terms;

  friend bool operator==(const PDTriple& a, const PDTriple& b) {
    if (a.terms.size() != b.terms.size()) return false;
    auto ia = a.terms.begin();
    auto ib = b.terms.begin();
    for (; ia != a.terms.end(); ++ia, ++ib)
      if (ia->first != ib->first || !(ia->second == ib->second)) return false;
    return true;
  }
};

namespace detail {
inline void triple_add(PDTriple& acc, ExpVec a, ExpVec b, ExpVec c, const ModPoly& coeff) {
  auto key = std::make_tuple(std::move(a), std::move(b), std::move(c));
  auto it = acc.terms.find(key);
  if (it == acc.terms.end())
    acc.terms.emplace(std::move(key), coeff);
  else {
    it->second = it->second + coeff;
    if (it->second.is_zero()) acc.terms.erase(it);
  }
}

inline void splits(const ExpVec& k, const std::function<void(ExpVec, ExpVec)>& emit) {
  ExpVec i(k.size(), 0);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == k.size()) {
      ExpVec j(k.size());
      for (std::size_t q = 0; q < k.size(); ++q) j[q] = k[q] - i[q];
      emit(i, std::move(j));
      return;
    }
    for (std::uint32_t v = 0; v <= k[pos]; ++v) {
      i[pos] = v;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
}
} // namespace detail

/// (Delta (x) id) applied to a tensor in normal form. Pure monomial splits;
/// coefficients stay on the far left.
inline PDTriple comultiply_left(const PDTensor& t) {
  PDTriple acc;
  for (const auto& term : t.terms())
    detail::splits(term.left, [&](ExpVec a, ExpVec b) {
      detail::triple_add(acc, std::move(a), std::move(b), term.right, term.coeff);
    });
  return acc;
}

/// (id (x) Delta) applied to a tensor in normal form.
inline PDTriple comultiply_right(const PDTensor& t) {
  PDTriple acc;
  for (const auto& term : t.terms())
    detail::splits(term.right, [&](ExpVec a, ExpVec b) {
      detail::triple_add(acc, term.left, std::move(a), std::move(b), term.coeff);
    });
  return acc;
}

} // namespace charp
