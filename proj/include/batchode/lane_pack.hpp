#pragma once

// Fixed-width packs of doubles, the unit of SIMD batching.
//
// A LanePack<W> holds W independent lanes. All arithmetic is lane-wise and
// rounds exactly like the scalar operation on each lane, so a computation
// run with W = 4 reproduces four W = 1 runs bit for bit. Storage uses the
// GCC/Clang vector extension, which maps onto SSE/AVX/AVX-512 registers
// without intrinsics.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace batchode {

namespace detail {

template <int W>
struct VectorTypes;

template <>
struct VectorTypes<1> {
  typedef double Real __attribute__((vector_size(8)));
  typedef std::int64_t Flag __attribute__((vector_size(8)));
};
template <>
struct VectorTypes<2> {
  typedef double Real __attribute__((vector_size(16)));
  typedef std::int64_t Flag __attribute__((vector_size(16)));
};
template <>
struct VectorTypes<4> {
  typedef double Real __attribute__((vector_size(32)));
  typedef std::int64_t Flag __attribute__((vector_size(32)));
};
template <>
struct VectorTypes<8> {
  typedef double Real __attribute__((vector_size(64)));
  typedef std::int64_t Flag __attribute__((vector_size(64)));
};

}  // namespace detail

template <int W>
concept SupportedWidth = (W == 1 || W == 2 || W == 4 || W == 8);

/// Per-lane boolean flags. Comparisons on LanePacks produce these.
template <int W>
  requires SupportedWidth<W>
class LaneMask {
 public:
  using Flags = typename detail::VectorTypes<W>::Flag;

  LaneMask() : bits_{} {}
  explicit LaneMask(bool all) {
    for (int i = 0; i < W; ++i) bits_[i] = all ? -1 : 0;
  }
  explicit LaneMask(Flags bits) : bits_(bits) {}

  static constexpr int width() { return W; }

  bool operator[](int lane) const { return bits_[lane] != 0; }
  void set(int lane, bool value) { bits_[lane] = value ? -1 : 0; }

  bool any() const {
    for (int i = 0; i < W; ++i)
      if (bits_[i]) return true;
    return false;
  }
  bool all() const {
    for (int i = 0; i < W; ++i)
      if (!bits_[i]) return false;
    return true;
  }
  bool none() const { return !any(); }
  int count() const {
    int n = 0;
    for (int i = 0; i < W; ++i) n += bits_[i] ? 1 : 0;
    return n;
  }

  const Flags& bits() const { return bits_; }

  friend LaneMask operator&(const LaneMask& a, const LaneMask& b) { return LaneMask(a.bits_ & b.bits_); }
  friend LaneMask operator|(const LaneMask& a, const LaneMask& b) { return LaneMask(a.bits_ | b.bits_); }
  friend LaneMask operator^(const LaneMask& a, const LaneMask& b) { return LaneMask(a.bits_ ^ b.bits_); }
  LaneMask operator~() const { return LaneMask(~bits_); }
  LaneMask& operator&=(const LaneMask& o) { bits_ &= o.bits_; return *this; }
  LaneMask& operator|=(const LaneMask& o) { bits_ |= o.bits_; return *this; }

  friend bool operator==(const LaneMask& a, const LaneMask& b) {
    for (int i = 0; i < W; ++i)
      if ((a.bits_[i] != 0) != (b.bits_[i] != 0)) return false;
    return true;
  }

 private:
  Flags bits_;
};

template <int W>
  requires SupportedWidth<W>
class LanePack {
 public:
  using Vector = typename detail::VectorTypes<W>::Real;
  using Mask = LaneMask<W>;

  // Trivial on purpose: stage scratch arrays are large and fully overwritten.
  // Use LanePack{} or LanePack(0.0) for zeros.
  LanePack() = default;
  LanePack(double broadcast) {  // NOLINT(google-explicit-constructor)
    for (int i = 0; i < W; ++i) v_[i] = broadcast;
  }
  explicit LanePack(Vector v) : v_(v) {}

  static constexpr int width() { return W; }

  /// Loads W consecutive doubles.
  static LanePack load(const double* src) {
    LanePack p;
    for (int i = 0; i < W; ++i) p.v_[i] = src[i];
    return p;
  }
  void store(double* dst) const {
    for (int i = 0; i < W; ++i) dst[i] = v_[i];
  }

  double operator[](int lane) const { return v_[lane]; }
  void set(int lane, double value) { v_[lane] = value; }

  const Vector& raw() const { return v_; }

  LanePack& operator+=(const LanePack& o) { v_ += o.v_; return *this; }
  LanePack& operator-=(const LanePack& o) { v_ -= o.v_; return *this; }
  LanePack& operator*=(const LanePack& o) { v_ *= o.v_; return *this; }
  LanePack& operator/=(const LanePack& o) { v_ /= o.v_; return *this; }

  friend LanePack operator+(const LanePack& a, const LanePack& b) { return LanePack(a.v_ + b.v_); }
  friend LanePack operator-(const LanePack& a, const LanePack& b) { return LanePack(a.v_ - b.v_); }
  friend LanePack operator*(const LanePack& a, const LanePack& b) { return LanePack(a.v_ * b.v_); }
  friend LanePack operator/(const LanePack& a, const LanePack& b) { return LanePack(a.v_ / b.v_); }
  LanePack operator-() const { return LanePack(-v_); }

  friend Mask operator<(const LanePack& a, const LanePack& b) { return Mask(a.v_ < b.v_); }
  friend Mask operator<=(const LanePack& a, const LanePack& b) { return Mask(a.v_ <= b.v_); }
  friend Mask operator>(const LanePack& a, const LanePack& b) { return Mask(a.v_ > b.v_); }
  friend Mask operator>=(const LanePack& a, const LanePack& b) { return Mask(a.v_ >= b.v_); }
  friend Mask operator==(const LanePack& a, const LanePack& b) { return Mask(a.v_ == b.v_); }
  friend Mask operator!=(const LanePack& a, const LanePack& b) { return Mask(a.v_ != b.v_); }

 private:
  Vector v_;
};

template <int W>
LanePack<W> select(const LaneMask<W>& mask, const LanePack<W>& if_true, const LanePack<W>& if_false) {
  return LanePack<W>(mask.bits() ? if_true.raw() : if_false.raw());
}

namespace detail {
// Out of line on purpose: the compiler fuses inlined sin and cos of one
// argument into a single sincos call, which differs from sin by an ulp on
// some inputs and would make results depend on inlining.
double lane_sin(double x);
double lane_cos(double x);

template <int W, class Fn>
LanePack<W> map_lanes(const LanePack<W>& x, Fn fn) {
  LanePack<W> r;
  for (int i = 0; i < W; ++i) r.set(i, fn(x[i]));
  return r;
}
}  // namespace detail

/// a*b + c with a single rounding.
template <int W>
LanePack<W> fma(const LanePack<W>& a, const LanePack<W>& b, const LanePack<W>& c) {
  LanePack<W> r;
  for (int i = 0; i < W; ++i) r.set(i, std::fma(a[i], b[i], c[i]));
  return r;
}

template <int W>
LanePack<W> sqrt(const LanePack<W>& x) {
  return detail::map_lanes(x, [](double v) { return std::sqrt(v); });
}
template <int W>
LanePack<W> abs(const LanePack<W>& x) {
  return detail::map_lanes(x, [](double v) { return std::fabs(v); });
}
template <int W>
LanePack<W> sin(const LanePack<W>& x) {
  return detail::map_lanes(x, detail::lane_sin);
}
template <int W>
LanePack<W> cos(const LanePack<W>& x) {
  return detail::map_lanes(x, detail::lane_cos);
}
template <int W>
LanePack<W> pow(const LanePack<W>& base, const LanePack<W>& exponent) {
  LanePack<W> r;
  for (int i = 0; i < W; ++i) r.set(i, std::pow(base[i], exponent[i]));
  return r;
}

/// Same bits as sin(x) and cos(x).
template <int W>
void sincos(const LanePack<W>& x, LanePack<W>& s, LanePack<W>& c) {
  for (int i = 0; i < W; ++i) {
    const double v = x[i];
    s.set(i, detail::lane_sin(v));
    c.set(i, detail::lane_cos(v));
  }
}

template <int W>
LanePack<W> max(const LanePack<W>& a, const LanePack<W>& b) {
  return select(b > a, b, a);
}
template <int W>
LanePack<W> min(const LanePack<W>& a, const LanePack<W>& b) {
  return select(b < a, b, a);
}

template <int W>
LaneMask<W> isfinite(const LanePack<W>& x) {
  LaneMask<W> m;
  for (int i = 0; i < W; ++i) m.set(i, std::isfinite(x[i]));
  return m;
}

}  // namespace batchode
