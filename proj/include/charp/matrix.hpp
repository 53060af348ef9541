// Dense matrices of polynomials (connection matrices, Higgs fields) and
// dense F_p matrices with Gaussian elimination for the exact linear solves.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "charp/poly.hpp"

namespace charp {

class PolyMatrix {
public:
  PolyMatrix() = default;

  PolyMatrix(RingPtr ring, std::size_t rows, std::size_t cols)
      : ring_(std::move(ring)), rows_(rows), cols_(cols),
        e_(rows * cols, ModPoly::zero(ring_)) {}

  static PolyMatrix zero(RingPtr ring, std::size_t rows, std::size_t cols) {
    return PolyMatrix(std::move(ring), rows, cols);
  }

  static PolyMatrix identity(RingPtr ring, std::size_t n) {
    PolyMatrix m(ring, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = ModPoly::one(ring);
    return m;
  }

  const RingPtr& ring() const { return ring_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  ModPoly& at(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const ModPoly& at(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  bool is_zero() const {
    for (const auto& x : e_)
      if (!x.is_zero()) return false;
    return true;
  }

  bool is_square() const { return rows_ == cols_; }

  friend PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b) {
    a.check_shape(b, "PolyMatrix::+");
    PolyMatrix out(a.ring_, a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.e_.size(); ++i) out.e_[i] = a.e_[i] + b.e_[i];
    return out;
  }

  friend PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b) {
    a.check_shape(b, "PolyMatrix::-");
    PolyMatrix out(a.ring_, a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.e_.size(); ++i) out.e_[i] = a.e_[i] - b.e_[i];
    return out;
  }

  PolyMatrix operator-() const {
    PolyMatrix out(ring_, rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = -e_[i];
    return out;
  }

  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
    require_compatible(a.ring_, b.ring_, "PolyMatrix::*");
    if (a.cols_ != b.rows_) throw precondition_error("PolyMatrix::*: shape mismatch");
    PolyMatrix out(a.ring_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a.at(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          out.at(i, j) = out.at(i, j) + a.at(i, k) * b.at(k, j);
      }
    return out;
  }

  PolyMatrix scale(const ModPoly& f) const {
    PolyMatrix out(ring_, rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i] * f;
    return out;
  }

  PolyMatrix derive(std::size_t xi) const {
    PolyMatrix out(ring_, rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i].derive(xi);
    return out;
  }

  PolyMatrix embed_t() const { return map_ring(with_t(ring_), [](const ModPoly& f) { return f.embed_t(); }); }

  PolyMatrix subst_t(std::uint32_t v) const {
    return map_ring(without_t(ring_), [v](const ModPoly& f) { return f.subst_t(v); });
  }

  PolyMatrix scale_exponents(std::uint32_t s) const {
    return map_ring(ring_, [s](const ModPoly& f) { return f.scale_exponents(s); });
  }

  std::uint32_t t_valuation() const {
    std::uint32_t v = UINT32_MAX;
    for (const auto& x : e_) v = std::min(v, x.t_valuation());
    return v;
  }

  std::uint64_t max_degree() const {
    std::uint64_t d = 0;
    for (const auto& x : e_) d = std::max(d, x.is_zero() ? 0 : x.degree());
    return d;
  }

  PolyMatrix matpow(std::uint64_t e) const {
    if (!is_square()) throw precondition_error("PolyMatrix::matpow: not square");
    PolyMatrix acc = identity(ring_, rows_);
    PolyMatrix base = *this;
    while (e) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  ModPoly det() const {
    if (!is_square()) throw precondition_error("PolyMatrix::det: not square");
    if (rows_ == 0) return ModPoly::one(ring_);
    if (rows_ == 1) return at(0, 0);
    ModPoly acc = ModPoly::zero(ring_);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at(0, j).is_zero()) continue;
      ModPoly term = at(0, j) * minor_at(0, j).det();
      acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
  }

  PolyMatrix adjugate() const {
    if (!is_square()) throw precondition_error("PolyMatrix::adjugate: not square");
    PolyMatrix out(ring_, rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        ModPoly c = minor_at(i, j).det();
        out.at(j, i) = ((i + j) % 2 == 0) ? c : -c;
      }
    return out;
  }

  /// Inverse when det is a nonzero constant; nullopt otherwise.
  std::optional<PolyMatrix> inverse_const_det() const {
    ModPoly d = det();
    if (d.is_zero() || d.degree() != 0) return std::nullopt;
    std::uint32_t dinv = inv_mod(d.constant_term(), ring_->p);
    PolyMatrix adj = adjugate();
    for (auto& x : adj.e_) x = x.scale(dinv);
    return adj;
  }

  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (std::size_t i = 0; i < a.e_.size(); ++i)
      if (!(a.e_[i] == b.e_[i])) return false;
    return true;
  }
  friend bool operator!=(const PolyMatrix& a, const PolyMatrix& b) { return !(a == b); }

  std::string render() const {
    std::string out = "[";
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i) out += ", ";
      out += "[";
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j) out += ", ";
        out += at(i, j).render();
      }
      out += "]";
    }
    return out + "]";
  }

private:
  template <class F>
  PolyMatrix map_ring(RingPtr r, F&& f) const {
    PolyMatrix out(std::move(r), rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = f(e_[i]);
    return out;
  }

  PolyMatrix minor_at(std::size_t di, std::size_t dj) const {
    PolyMatrix out(ring_, rows_ - 1, cols_ - 1);
    for (std::size_t i = 0, oi = 0; i < rows_; ++i) {
      if (i == di) continue;
      for (std::size_t j = 0, oj = 0; j < cols_; ++j) {
        if (j == dj) continue;
        out.at(oi, oj) = at(i, j);
        ++oj;
      }
      ++oi;
    }
    return out;
  }

  void check_shape(const PolyMatrix& b, const char* who) const {
    require_compatible(ring_, b.ring_, who);
    if (rows_ != b.rows_ || cols_ != b.cols_)
      throw precondition_error(std::string(who) + ": shape mismatch");
  }

  RingPtr ring_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<ModPoly> e_;
};

inline PolyMatrix commutator(const PolyMatrix& a, const PolyMatrix& b) {
  return a * b - b * a;
}

/// Dense matrix over F_p with row reduction, kernel and solve.
class FpMat {
public:
  FpMat(std::size_t rows, std::size_t cols, std::uint32_t p)
      : rows_(rows), cols_(cols), p_(p), d_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t p() const { return p_; }

  std::uint32_t& at(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  std::uint32_t at(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

  /// Reduced row echelon form in place; returns pivot column per pivot row.
  std::vector<std::size_t> rref() {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols_ && row < rows_; ++col) {
      std::size_t sel = row;
      while (sel < rows_ && at(sel, col) == 0) ++sel;
      if (sel == rows_) continue;
      swap_rows(sel, row);
      std::uint32_t inv = inv_mod(at(row, col), p_);
      for (std::size_t j = col; j < cols_; ++j) at(row, j) = mul_mod(at(row, j), inv, p_);
      for (std::size_t i = 0; i < rows_; ++i) {
        if (i == row || at(i, col) == 0) continue;
        std::uint32_t f = at(i, col);
        for (std::size_t j = col; j < cols_; ++j)
          at(i, j) = sub_mod(at(i, j), mul_mod(f, at(row, j), p_), p_);
      }
      pivots.push_back(col);
      ++row;
    }
    return pivots;
  }

  std::size_t rank() const {
    FpMat copy = *this;
    return copy.rref().size();
  }

  /// Basis of the right kernel, one vector per free column.
  std::vector<std::vector<std::uint32_t>> kernel_basis() const {
    FpMat r = *this;
    std::vector<std::size_t> pivots = r.rref();
    std::vector<bool> is_pivot(cols_, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<std::vector<std::uint32_t>> basis;
    for (std::size_t free = 0; free < cols_; ++free) {
      if (is_pivot[free]) continue;
      std::vector<std::uint32_t> v(cols_, 0);
      v[free] = 1;
      for (std::size_t pr = 0; pr < pivots.size(); ++pr)
        v[pivots[pr]] = neg_mod(r.at(pr, free), p_);
      basis.push_back(std::move(v));
    }
    return basis;
  }

  /// Any solution of A x = b, if one exists.
  std::optional<std::vector<std::uint32_t>> solve(const std::vector<std::uint32_t>& b) const {
    if (b.size() != rows_) throw precondition_error("FpMat::solve: bad rhs size");
    FpMat aug(rows_, cols_ + 1, p_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
      aug.at(i, cols_) = b[i] % p_;
    }
    std::vector<std::size_t> pivots = aug.rref();
    if (!pivots.empty() && pivots.back() == cols_) return std::nullopt; // inconsistent
    std::vector<std::uint32_t> x(cols_, 0);
    for (std::size_t pr = 0; pr < pivots.size(); ++pr) x[pivots[pr]] = aug.at(pr, cols_);
    return x;
  }

  /// Whether v lies in the row span.
  bool row_span_contains(const std::vector<std::uint32_t>& v) const {
    if (v.size() != cols_) throw precondition_error("FpMat::row_span_contains: bad size");
    FpMat stacked(rows_ + 1, cols_, p_);
    stacked.d_.assign(d_.begin(), d_.end());
    stacked.d_.insert(stacked.d_.end(), v.begin(), v.end());
    return stacked.rank() == rank();
  }

private:
  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap(at(a, j), at(b, j));
  }

  std::size_t rows_, cols_;
  std::uint32_t p_;
  std::vector<std::uint32_t> d_;
};

} // namespace charp
