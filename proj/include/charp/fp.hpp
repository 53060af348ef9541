// Exact arithmetic mod a prime p: scalars, Lucas binomials, divided-power
// multinomial coefficients.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace charp {

/// Thrown when an operation's stated precondition is violated.
class precondition_error : public std::invalid_argument {
public:
  explicit precondition_error(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Thrown when an internal consistency check fails.
class invariant_error : public std::logic_error {
public:
  explicit invariant_error(const std::string& what) : std::logic_error(what) {}
};

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::uint32_t add_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
  std::uint64_t s = std::uint64_t(a) + b;
  return std::uint32_t(s >= p ? s - p : s);
}

inline std::uint32_t sub_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
  return a >= b ? a - b : std::uint32_t(std::uint64_t(a) + p - b);
}

inline std::uint32_t mul_mod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
  return std::uint32_t((std::uint64_t(a) * b) % p);
}

inline std::uint32_t neg_mod(std::uint32_t a, std::uint32_t p) {
  return a == 0 ? 0 : p - a;
}

inline std::uint32_t pow_mod(std::uint32_t base, std::uint64_t e, std::uint32_t p) {
  std::uint64_t acc = 1 % p, b = base % p;
  while (e) {
    if (e & 1) acc = acc * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return std::uint32_t(acc);
}

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  if (a % p == 0) throw precondition_error("inv_mod: zero has no inverse");
  return pow_mod(a % p, p - 2, p);
}

/// Residue together with its modulus; the modulus is fixed per computation
/// context and mismatches are programming errors.
struct FpScalar {
  std::uint32_t value = 0;
  std::uint32_t p = 2;

  FpScalar() = default;
  FpScalar(std::uint64_t v, std::uint32_t prime) : value(std::uint32_t(v % prime)), p(prime) {
    if (!is_prime(prime)) throw precondition_error("FpScalar: modulus must be prime");
  }

  friend FpScalar operator+(FpScalar a, FpScalar b) {
    a.check(b);
    return FpScalar(add_mod(a.value, b.value, a.p), a.p);
  }
  friend FpScalar operator-(FpScalar a, FpScalar b) {
    a.check(b);
    return FpScalar(sub_mod(a.value, b.value, a.p), a.p);
  }
  friend FpScalar operator*(FpScalar a, FpScalar b) {
    a.check(b);
    return FpScalar(mul_mod(a.value, b.value, a.p), a.p);
  }
  FpScalar inverse() const { return FpScalar(inv_mod(value, p), p); }
  friend bool operator==(const FpScalar& a, const FpScalar& b) {
    return a.p == b.p && a.value == b.value;
  }

private:
  void check(const FpScalar& other) const {
    if (p != other.p) throw precondition_error("FpScalar: modulus mismatch");
  }
};

/// n! mod p for n < p.
inline std::uint32_t small_factorial_mod(std::uint32_t n, std::uint32_t p) {
  std::uint32_t acc = 1 % p;
  for (std::uint32_t i = 2; i <= n; ++i) acc = mul_mod(acc, i, p);
  return acc;
}

/// C(n,k) mod p by Lucas decomposition in base p. k > n gives 0.
inline FpScalar binom_mod_p(std::uint64_t n, std::uint64_t k, std::uint32_t p) {
  if (!is_prime(p)) throw precondition_error("binom_mod_p: modulus must be prime");
  if (k > n) return FpScalar(0, p);
  std::uint32_t acc = 1 % p;
  while (n || k) {
    std::uint32_t nd = std::uint32_t(n % p), kd = std::uint32_t(k % p);
    if (kd > nd) return FpScalar(0, p);
    // C(nd, kd) with nd < p, via factorials mod p
    std::uint32_t c = mul_mod(small_factorial_mod(nd, p),
                              inv_mod(mul_mod(small_factorial_mod(kd, p),
                                              small_factorial_mod(nd - kd, p), p),
                                      p),
                              p);
    acc = mul_mod(acc, c, p);
    n /= p;
    k /= p;
  }
  return FpScalar(acc, p);
}

/// (kp)!/(p!^k k!) mod p, the coefficient of (x^[p])^[k] relative to x^[pk].
/// Computed by the block-partition recursion N(k) = N(k-1) * C(kp-1, p-1):
/// the last of kp objects picks p-1 companions for its block.
inline FpScalar pd_coefficient(std::uint64_t k, std::uint32_t p) {
  if (k < 1) throw precondition_error("pd_coefficient: k must be >= 1");
  FpScalar acc(1, p);
  for (std::uint64_t j = 2; j <= k; ++j)
    acc = acc * binom_mod_p(j * p - 1, p - 1, p);
  return acc;
}

} // namespace charp
