#pragma once

#include <cmath>
#include <limits>

#include "detfield/common.hpp"

namespace detfield {

// Complex number stored as log|z| and z/|z|, so that values like pi_N(q) e^{-N g(q)}
// can be formed without overflow. Zero is log_mag = -inf.
struct LogComplex {
  double log_mag = -std::numeric_limits<double>::infinity();
  cplx phase{1.0, 0.0};

  static LogComplex from(cplx z) {
    double a = std::abs(z);
    if (a == 0.0) return {};
    return {std::log(a), z / a};
  }
  static LogComplex exp_of(cplx w) {  // e^w
    return {w.real(), std::polar(1.0, w.imag())};
  }

  bool is_zero() const { return std::isinf(log_mag) && log_mag < 0; }
  cplx value() const { return is_zero() ? cplx{} : phase * std::exp(log_mag); }
  // z * e^{-shift}
  cplx scaled(double shift) const { return is_zero() ? cplx{} : phase * std::exp(log_mag - shift); }
  LogComplex conj() const { return {log_mag, std::conj(phase)}; }

  friend LogComplex operator*(const LogComplex& a, const LogComplex& b) {
    if (a.is_zero() || b.is_zero()) return {};
    cplx ph = a.phase * b.phase;
    return {a.log_mag + b.log_mag, ph / std::abs(ph)};
  }
  friend LogComplex operator/(const LogComplex& a, const LogComplex& b) {
    if (b.is_zero()) throw NumericalError("LogComplex division by zero");
    if (a.is_zero()) return {};
    cplx ph = a.phase * std::conj(b.phase);
    return {a.log_mag - b.log_mag, ph / std::abs(ph)};
  }
  friend LogComplex operator*(const LogComplex& a, cplx b) { return a * from(b); }
};

// a - b evaluated at the larger of the two scales.
inline LogComplex lc_sub(const LogComplex& a, const LogComplex& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return {b.log_mag, -b.phase};
  double s = std::max(a.log_mag, b.log_mag);
  LogComplex r = LogComplex::from(a.scaled(s) - b.scaled(s));
  if (!r.is_zero()) r.log_mag += s;
  return r;
}

inline LogComplex lc_add(const LogComplex& a, const LogComplex& b) {
  return lc_sub(a, {b.log_mag, -b.phase});
}

}  // namespace detfield
