#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace detfield {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Input outside the mathematical domain of an operation (|z| >= 1, q on a cut, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A numerical routine failed a self-check (non-convergence, residual too large).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace detfield
