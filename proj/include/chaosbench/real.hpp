#pragma once

// Extended-precision scalar used by the integrators.
//
// BigFloat is a thin RAII owner of an MPFR value. Newly created values take the
// calling thread's working precision, which is set with PrecisionScope. The
// transcendental functions inherit MPFR's correct rounding (round-to-nearest,
// at most 0.5 ulp); MPFR performs its own exact argument reduction for sin/cos,
// so large unwrapped phases lose no accuracy.
//
// Generic code is written against the small free-function vocabulary at the
// bottom of this file (mul_add, to_double, to_decimal, ...) so that the same
// template runs on hardware doubles for the 53-bit rung.

#include <mpfr.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace chaosbench {

inline constexpr int kDoubleMantissaBits = 53;

namespace detail {
inline mpfr_prec_t& thread_precision() {
  thread_local mpfr_prec_t bits = 113;
  return bits;
}
}  // namespace detail

/// Sets the working precision of the current thread for the lifetime of the
/// scope, restoring the previous value on exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits) : saved_(detail::thread_precision()) {
    if (bits < MPFR_PREC_MIN || bits > 1 << 20) {
      throw std::invalid_argument("mantissa bits out of range: " + std::to_string(bits));
    }
    detail::thread_precision() = static_cast<mpfr_prec_t>(bits);
  }
  ~PrecisionScope() { detail::thread_precision() = saved_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t saved_;
};

inline int working_precision() { return static_cast<int>(detail::thread_precision()); }

class BigFloat {
 public:
  BigFloat() {
    mpfr_init2(v_, detail::thread_precision());
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_precision());
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  BigFloat(int x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_precision());
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  BigFloat(long x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_precision());
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  BigFloat(unsigned long x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_precision());
    mpfr_set_ui(v_, x, MPFR_RNDN);
  }
  /// Parses a decimal string at the working precision.
  explicit BigFloat(const std::string& decimal) {
    mpfr_init2(v_, detail::thread_precision());
    if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0) {
      mpfr_clear(v_);
      throw std::invalid_argument("not a decimal number: " + decimal);
    }
  }

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      if (v_[0]._mpfr_d == nullptr) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
      } else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) {
        mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      }
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    std::swap(v_[0], o.v_[0]);
    return *this;
  }
  BigFloat& operator=(double x) {
    mpfr_set_d(v_, x, MPFR_RNDN);
    return *this;
  }
  ~BigFloat() {
    if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  int bits() const { return static_cast<int>(mpfr_get_prec(v_)); }

  /// Changes this value's precision, rounding the stored value.
  void set_bits(int bits) { mpfr_prec_round(v_, bits, MPFR_RNDN); }

  explicit operator double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  BigFloat& operator+=(const BigFloat& o) {
    mpfr_add(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator-=(const BigFloat& o) {
    mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator*=(const BigFloat& o) {
    mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator/=(const BigFloat& o) {
    mpfr_div(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator+=(double o) {
    mpfr_add_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator-=(double o) {
    mpfr_sub_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator*=(double o) {
    mpfr_mul_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  BigFloat& operator/=(double o) {
    mpfr_div_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }

  BigFloat operator-() const {
    BigFloat r;
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r;
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r;
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r;
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
    BigFloat r;
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator+(const BigFloat& a, double b) { return a + BigFloat(b); }
  friend BigFloat operator+(double a, const BigFloat& b) { return BigFloat(a) + b; }
  friend BigFloat operator-(const BigFloat& a, double b) { return a - BigFloat(b); }
  friend BigFloat operator-(double a, const BigFloat& b) { return BigFloat(a) - b; }
  friend BigFloat operator*(const BigFloat& a, double b) { return a * BigFloat(b); }
  friend BigFloat operator*(double a, const BigFloat& b) { return BigFloat(a) * b; }
  friend BigFloat operator/(const BigFloat& a, double b) { return a / BigFloat(b); }
  friend BigFloat operator/(double a, const BigFloat& b) { return BigFloat(a) / b; }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
  friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }
  friend bool operator<(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
  friend bool operator>(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }

 private:
  mpfr_t v_;
};

inline BigFloat sqrt(const BigFloat& a) {
  BigFloat r;
  mpfr_sqrt(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat sin(const BigFloat& a) {
  BigFloat r;
  mpfr_sin(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat cos(const BigFloat& a) {
  BigFloat r;
  mpfr_cos(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat exp(const BigFloat& a) {
  BigFloat r;
  mpfr_exp(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat log(const BigFloat& a) {
  BigFloat r;
  mpfr_log(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat abs(const BigFloat& a) {
  BigFloat r;
  mpfr_abs(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
inline BigFloat fmod_2pi(const BigFloat& a) {
  BigFloat two_pi;
  mpfr_const_pi(two_pi.raw(), MPFR_RNDN);
  mpfr_mul_2ui(two_pi.raw(), two_pi.raw(), 1, MPFR_RNDN);
  BigFloat r;
  mpfr_fmod(r.raw(), a.raw(), two_pi.raw(), MPFR_RNDN);
  if (mpfr_sgn(r.raw()) < 0) r += two_pi;
  return r;
}

template <class T>
inline constexpr bool is_big_float_v = std::is_same_v<std::remove_cvref_t<T>, BigFloat>;

// ---- generic vocabulary shared by double and BigFloat ------------------------

inline double to_double(double x) { return x; }
inline double to_double(const BigFloat& x) { return static_cast<double>(x); }

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const BigFloat& x) { return mpfr_number_p(x.raw()) != 0; }

/// acc += a * b. For BigFloat this avoids allocating a temporary.
inline void mul_add(double& acc, double a, double b) { acc += a * b; }
inline void mul_add(BigFloat& acc, const BigFloat& a, const BigFloat& b) {
  thread_local BigFloat scratch;
  if (scratch.bits() != acc.bits()) scratch.set_bits(acc.bits());
  mpfr_mul(scratch.raw(), a.raw(), b.raw(), MPFR_RNDN);
  mpfr_add(acc.raw(), acc.raw(), scratch.raw(), MPFR_RNDN);
}

/// out = a * b without temporaries.
inline void mul_into(double& out, double a, double b) { out = a * b; }
inline void mul_into(BigFloat& out, const BigFloat& a, const BigFloat& b) {
  mpfr_mul(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
}

/// Rounds x to the current working precision (no-op for double).
inline void round_to_working(double&) {}
inline void round_to_working(BigFloat& x) {
  if (x.bits() != working_precision()) x.set_bits(working_precision());
}

/// x /= n for a positive integer n.
inline void divide_by(double& x, unsigned long n) { x /= static_cast<double>(n); }
inline void divide_by(BigFloat& x, unsigned long n) { mpfr_div_ui(x.raw(), x.raw(), n, MPFR_RNDN); }

inline void set_zero(double& x) { x = 0.0; }
inline void set_zero(BigFloat& x) { mpfr_set_zero(x.raw(), 1); }

inline double pi_value(double) { return M_PI; }
inline BigFloat pi_value(const BigFloat&) {
  BigFloat r;
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}
template <class Real>
Real pi() {
  return pi_value(Real{});
}

/// Mantissa bits carried by values of this type in the current scope.
template <class Real>
int precision_bits() {
  if constexpr (is_big_float_v<Real>) {
    return working_precision();
  } else {
    return kDoubleMantissaBits;
  }
}

/// Round-trippable decimal rendering at the value's own precision.
inline std::string to_decimal(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline std::string to_decimal(const BigFloat& x) {
  if (mpfr_zero_p(x.raw())) return "0";
  if (!mpfr_number_p(x.raw())) return mpfr_nan_p(x.raw()) ? "nan" : (mpfr_sgn(x.raw()) > 0 ? "inf" : "-inf");
  // Enough digits to round-trip: 1 + ceil(bits * log10(2)).
  const auto digits = static_cast<std::size_t>(1 + std::ceil(x.bits() * 0.30102999566398120));
  mpfr_exp_t exp10 = 0;
  char* s = mpfr_get_str(nullptr, &exp10, 10, digits, x.raw(), MPFR_RNDN);
  std::string mant(s);
  mpfr_free_str(s);
  std::string out;
  if (mant[0] == '-') {
    out.push_back('-');
    mant.erase(0, 1);
  }
  out.push_back(mant[0]);
  out.push_back('.');
  out.append(mant, 1, std::string::npos);
  out.push_back('e');
  out.append(std::to_string(static_cast<long>(exp10) - 1));
  return out;
}

/// Returns the working-precision value of a double without further rounding.
template <class Real>
Real from_double(double x) {
  return Real(x);
}

}  // namespace chaosbench
