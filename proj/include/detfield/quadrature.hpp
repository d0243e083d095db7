#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "detfield/common.hpp"

namespace detfield {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

// Shared 20-point rule used by the adaptive integrators.
const GaussRule& gl20();

// Adaptive Gauss-Legendre: a panel is accepted when its 20-point value agrees with the
// sum over its two halves to within rel_tol of a coarse estimate of the whole integral.
cplx integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                        double rel_tol = 1e-13, double abs_tol = 1e-300, int max_depth = 60);
double integrate_adaptive_real(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-13, double abs_tol = 1e-300, int max_depth = 60);

// Same, with the interval first cut at the given interior break points.
cplx integrate_with_breaks(const std::function<cplx(double)>& f, double a, double b,
                           std::vector<double> breaks, double rel_tol = 1e-13);

}  // namespace detfield
