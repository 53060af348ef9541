// Seeded deterministic generators for the property suites. splitmix64 keeps
// runs reproducible across platforms; standard distributions are not.
#pragma once

#include <cstdint>
#include <vector>

#include "charp/connection.hpp"
#include "charp/filtration.hpp"
#include "charp/matrix.hpp"
#include "charp/poly.hpp"

namespace charp {

struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  bool flip() { return next() & 1; }
};

inline ModPoly random_poly(Rng& rng, const RingPtr& ring, std::uint32_t max_degree,
                           std::size_t max_terms) {
  std::vector<ExpVec> mons = monomials_up_to(ring->arity(), max_degree);
  std::vector<ModPoly::Term> buf;
  std::size_t n = 1 + rng.below(max_terms);
  for (std::size_t i = 0; i < n; ++i) {
    ExpVec e = mons[rng.below(mons.size())];
    std::uint32_t c = std::uint32_t(rng.below(ring->p));
    if (c) buf.push_back(ModPoly::Term{std::move(e), c});
  }
  return ModPoly::from_unsorted(ring, std::move(buf));
}

inline PolyMatrix random_matrix(Rng& rng, const RingPtr& ring, std::size_t rows, std::size_t cols,
                                std::uint32_t max_degree, std::size_t max_terms) {
  PolyMatrix m(ring, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = random_poly(rng, ring, max_degree, max_terms);
  return m;
}

inline Derivation random_derivation(Rng& rng, const RingPtr& ring, std::uint32_t max_degree,
                                    std::size_t max_terms) {
  Derivation d = Derivation::zero(ring);
  for (std::size_t i = 0; i < ring->nx(); ++i) d.g[i] = random_poly(rng, ring, max_degree, max_terms);
  return d;
}

inline FpMat random_invertible_const(Rng& rng, std::uint32_t p, std::size_t d) {
  for (;;) {
    FpMat m(d, d, p);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m.at(i, j) = std::uint32_t(rng.below(p));
    if (m.rank() == d) return m;
  }
}

/// Product of elementary matrices I + f E_{ij} and an invertible constant;
/// the determinant stays a nonzero constant.
inline PolyMatrix random_unimodular(Rng& rng, const RingPtr& ring, std::size_t d,
                                    std::uint32_t max_degree, std::size_t elementary_steps = 3) {
  PolyMatrix S(ring, d, d);
  FpMat c = random_invertible_const(rng, ring->p, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) S.at(i, j) = ModPoly::constant(ring, c.at(i, j));
  for (std::size_t s = 0; s < elementary_steps; ++s) {
    if (d < 2) break;
    std::size_t i = rng.below(d), j = rng.below(d);
    if (i == j) continue;
    PolyMatrix E = PolyMatrix::identity(ring, d);
    E.at(i, j) = random_poly(rng, ring, max_degree, 2);
    S = (rng.flip() ? S * E : E * S);
  }
  return S;
}

/// Gauge transform of the trivial connection: flat with zero p-curvature.
inline Connection random_gauge_flat(Rng& rng, const RingPtr& ring, std::size_t rank,
                                    std::uint32_t max_degree) {
  PolyMatrix S = random_unimodular(rng, ring, rank, max_degree);
  return gauge_transform(Connection::trivial(ring, rank), S);
}

/// Unstructured connection; for two or more variables this is typically not
/// integrable and has nonzero p-curvature.
inline Connection random_connection(Rng& rng, const RingPtr& ring, std::size_t rank,
                                    std::uint32_t max_degree, std::size_t max_terms = 2) {
  Connection c = Connection::trivial(ring, rank);
  for (std::size_t i = 0; i < ring->nx(); ++i)
    c.A[i] = random_matrix(rng, ring, rank, rank, max_degree, max_terms);
  return c;
}

/// Integrable but usually with nonzero p-curvature: only A_1 is nonzero and
/// it depends on x_1 alone, so all curvature pairs vanish.
inline Connection random_integrable_nonflat(Rng& rng, const RingPtr& ring, std::size_t rank,
                                            std::uint32_t max_degree) {
  Connection c = Connection::trivial(ring, rank);
  std::vector<ExpVec> mons = monomials_up_to(1, max_degree);
  for (std::size_t r = 0; r < rank; ++r)
    for (std::size_t s = 0; s < rank; ++s) {
      std::vector<ModPoly::Term> buf;
      std::size_t n = 1 + rng.below(2);
      for (std::size_t k = 0; k < n; ++k) {
        ExpVec e(ring->arity(), 0);
        e[0] = mons[rng.below(mons.size())][0];
        std::uint32_t cv = std::uint32_t(rng.below(ring->p));
        if (cv) buf.push_back(ModPoly::Term{std::move(e), cv});
      }
      c.A[0].at(r, s) = ModPoly::from_unsorted(ring, std::move(buf));
    }
  return c;
}

/// Random filtration by constant free summands.
inline FilteredModule random_filtered_module(Rng& rng, const RingPtr& ring, std::size_t rank,
                                             std::uint32_t max_weight) {
  FpMat frame = random_invertible_const(rng, ring->p, rank);
  std::vector<std::uint32_t> weights;
  for (std::size_t j = 0; j < rank; ++j) weights.push_back(std::uint32_t(rng.below(max_weight + 1)));
  bool has_zero = false;
  for (auto w : weights) has_zero |= (w == 0);
  if (!has_zero) weights[rng.below(rank)] = 0;
  return FilteredModule::make(ring, std::move(frame), std::move(weights));
}

/// Integrable connection interacting with the filtration: entries of the
/// adapted-frame matrices drop at most `max_drop` filtration levels and
/// depend on x_1 alone (so curvature vanishes). max_drop 0 gives PRESERVES,
/// 1 gives Griffiths transversality.
inline Connection random_filtered_connection(Rng& rng, const FilteredModule& v,
                                             std::uint32_t max_degree, std::uint32_t max_drop) {
  const RingPtr& ring = v.ring;
  PolyMatrix adapted(ring, v.rank, v.rank);
  std::vector<ExpVec> mons = monomials_up_to(1, max_degree);
  for (std::size_t r = 0; r < v.rank; ++r)
    for (std::size_t j = 0; j < v.rank; ++j) {
      if (v.weights[r] + max_drop < v.weights[j]) continue;
      std::vector<ModPoly::Term> buf;
      if (rng.below(3) == 0) continue; // keep some entries zero
      ExpVec e(ring->arity(), 0);
      e[0] = mons[rng.below(mons.size())][0];
      std::uint32_t cv = std::uint32_t(rng.below(ring->p));
      if (cv) buf.push_back(ModPoly::Term{std::move(e), cv});
      adapted.at(r, j) = ModPoly::from_unsorted(ring, std::move(buf));
    }
  // conjugate back from the adapted frame to the standard one
  PolyMatrix S = v.frame_poly();
  auto Sinv = S.inverse_const_det();
  if (!Sinv) throw invariant_error("random_filtered_connection: frame not invertible");
  Connection c = Connection::trivial(ring, v.rank);
  c.A[0] = S * adapted * (*Sinv);
  return c;
}

} // namespace charp
