// Elements of the Rees algebras of Lambda attached to its two filtrations:
// Lambda_Hod (order filtration, generated by t^m Lambda_m) and Lambda_conj
// (conjugate filtration, with t^{-pk} Lambda^{>= pk} stored as weighted
// pairs so no Laurent polynomials are materialized).
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "charp/diffop.hpp"
#include "charp/poly.hpp"

namespace charp {

enum class ReesFiltration { HODGE, CONJ };

struct ConjClass {
  std::uint64_t weight; // the k in t^{-pk} Lambda^{>= pk}
  DiffOp op;            // class representative modulo Lambda^{>= p(k+1)}
};

struct HodgeFiber {
  DiffOp value; // at t=0, only the symbol terms with t-power == order survive
};

/// Result of specializing a Rees element at t = 0 or t = 1.
struct ReesFiber {
  bool at_zero = false;
  DiffOp dr;                    // t = 1 fiber, or the Hodge symbol at t = 0
  std::vector<ConjClass> gr;    // conjugate associated-graded classes at t = 0
};

class ReesOpElement {
public:
  /// HODGE: op lives over the t-ring, every monomial t^j f D^alpha has
  /// j >= |alpha|.
  static ReesOpElement hodge(DiffOp op) {
    if (!op.ring()->has_t) throw precondition_error("ReesOpElement::hodge: t-ring expected");
    for (const auto& term : op.terms()) {
      std::uint64_t ord = total_degree(term.alpha);
      for (const auto& mono : term.coeff.terms())
        if (mono.exp.back() < ord)
          throw precondition_error("ReesOpElement::hodge: t-power below operator order");
    }
    ReesOpElement e;
    e.tag_ = ReesFiltration::HODGE;
    e.hodge_ = std::move(op);
    return e;
  }

  /// CONJ: pairs (k, op_k) meaning sum t^{-pk} op_k with op_k in
  /// Lambda^{>= pk}; operators live over the t-free ring.
  static ReesOpElement conj(std::vector<std::pair<std::uint64_t, DiffOp>> parts) {
    ReesOpElement e;
    e.tag_ = ReesFiltration::CONJ;
    for (auto& [k, op] : parts) {
      if (op.ring()->has_t) throw precondition_error("ReesOpElement::conj: t-free ops expected");
      if (!conj_level_membership(op, k))
        throw precondition_error("ReesOpElement::conj: operator not in Lambda^{>= pk}");
      e.conj_.emplace_back(k, std::move(op));
    }
    return e;
  }

  ReesFiltration tag() const { return tag_; }
  const DiffOp& hodge_op() const { return hodge_; }
  const std::vector<std::pair<std::uint64_t, DiffOp>>& conj_parts() const { return conj_; }

  friend ReesOpElement rees_mul(const ReesOpElement& a, const ReesOpElement& b) {
    if (a.tag_ != b.tag_) throw precondition_error("rees_mul: filtration mismatch");
    if (a.tag_ == ReesFiltration::HODGE) return hodge(op_mul(a.hodge_, b.hodge_));
    std::vector<std::pair<std::uint64_t, DiffOp>> parts;
    for (const auto& [ka, oa] : a.conj_)
      for (const auto& [kb, ob] : b.conj_) parts.emplace_back(ka + kb, op_mul(oa, ob));
    return conj(std::move(parts));
  }

private:
  ReesFiltration tag_ = ReesFiltration::HODGE;
  DiffOp hodge_;
  std::vector<std::pair<std::uint64_t, DiffOp>> conj_;
};

/// Fiber extraction. HODGE at t=1 recovers Lambda; at t=0 the commutative
/// associated graded (symbol terms only, t dropped). CONJ at t=1 sums the
/// parts; at t=0 each part reduces modulo Lambda^{>= p(k+1)}.
inline ReesFiber rees_specialize(const ReesOpElement& a, std::uint32_t t0) {
  if (t0 != 0 && t0 != 1)
    throw precondition_error("rees_specialize: fiber must be t=0 or t=1");
  ReesFiber out;
  out.at_zero = (t0 == 0);
  if (a.tag() == ReesFiltration::HODGE) {
    const DiffOp& op = a.hodge_op();
    RingPtr plain = without_t(op.ring());
    std::vector<DiffOp::Term> buf;
    for (const auto& term : op.terms()) {
      std::uint64_t ord = total_degree(term.alpha);
      ModPoly c = out.at_zero ? term.coeff.t_coefficient(std::uint32_t(ord))
                              : term.coeff.subst_t(1);
      if (!c.is_zero()) buf.push_back(DiffOp::Term{term.alpha, std::move(c)});
    }
    out.dr = DiffOp::from_unsorted(plain, std::move(buf));
    return out;
  }
  if (!out.at_zero) {
    DiffOp acc;
    bool first = true;
    for (const auto& [k, op] : a.conj_parts()) {
      acc = first ? op : acc + op;
      first = false;
    }
    out.dr = acc;
    return out;
  }
  for (const auto& [k, op] : a.conj_parts())
    out.gr.push_back(ConjClass{k, conj_reduce(op, k + 1)});
  return out;
}

} // namespace charp
