#include "detfield/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace detfield {

double wrap_angle(double theta) {
  double t = std::remainder(theta, 2.0 * pi);
  if (t <= -pi) t += 2.0 * pi;
  return t;
}

DiskPoint DiskPoint::from_complex(cplx z) {
  double r = std::abs(z);
  if (!(r < 1.0)) throw DomainError("point not inside the open unit disk");
  return {2.0 * std::atanh(r), r == 0.0 ? 0.0 : std::arg(z)};
}

DiskPoint DiskPoint::polar(double rho, double theta) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("hyperbolic radius must be finite and >= 0");
  return {rho, wrap_angle(theta)};
}

double DiskPoint::radius() const { return std::tanh(0.5 * rho); }

double DiskPoint::one_minus_radius() const {
  // 1 - tanh(x/2) = 2 / (1 + e^x)
  return 2.0 / (1.0 + std::exp(rho));
}

cplx DiskPoint::z() const { return std::polar(radius(), theta); }

double hyp_dist(const DiskPoint& a, const DiskPoint& b) {
  // sinh^2(d/2) = sinh^2((ra-rb)/2) cos^2(t/2) + sinh^2((ra+rb)/2) sin^2(t/2)
  double t = wrap_angle(a.theta - b.theta);
  double u = std::sinh(0.5 * (a.rho - b.rho)) * std::cos(0.5 * t);
  double v = std::sinh(0.5 * (a.rho + b.rho)) * std::sin(0.5 * t);
  return 2.0 * std::asinh(std::hypot(u, v));
}

double pseudo_dist(const DiskPoint& a, const DiskPoint& b) {
  return std::tanh(0.5 * hyp_dist(a, b));
}

DiskPoint mobius_to_zero(const DiskPoint& y, const DiskPoint& z) {
  cplx yz = y.z(), zz = z.z();
  cplx t = (zz - yz) / (1.0 - zz * std::conj(yz));
  return DiskPoint::polar(hyp_dist(y, z), t == cplx{} ? 0.0 : std::arg(t));
}

cplx joukowsky(cplx z) {
  if (z == cplx{}) throw DomainError("Joukowsky map is singular at 0");
  return 0.5 * (z + 1.0 / z);
}

PlanePoint joukowsky(const DiskPoint& z) {
  if (z.rho == 0.0) throw DomainError("Joukowsky map is singular at 0");
  // r + 1/r = 2 coth(rho), r - 1/r = -2 / sinh(rho)
  return {std::cos(z.theta) / std::tanh(z.rho), -std::sin(z.theta) / std::sinh(z.rho)};
}

DiskPoint ray_point(int j) {
  if (j < 0) throw DomainError("ray index must be >= 0");
  return {static_cast<double>(j), 0.0};
}

BranchProfile branch_profile(double h, double j, double theta) {
  if (h < 0 || j < 0) throw DomainError("branch_profile needs h, j >= 0");
  double exact = hyp_dist(DiskPoint{h, 0.0}, DiskPoint::polar(j, theta));
  double s = std::abs(std::sin(0.5 * theta));
  double m = std::min(h, j);
  if (s > 0.0) m = std::min(m, -std::log(s));
  double approx = h + j - 2.0 * m;
  return {exact, approx, exact - approx};
}

bool in_domain(const DomainParams& p, const DiskPoint& z) {
  if (!(p.N >= 2.0) || !(p.delta > 0.0 && p.delta < 0.5)) throw DomainError("invalid DomainParams");
  double gap = z.one_minus_radius();
  double lo = std::pow(p.N, -1.0 + p.delta), hi = std::pow(p.N, -p.delta);
  if (gap < lo || gap > hi) return false;
  return std::abs(wrap_angle(z.theta - p.omega_arg)) <= hi;
}

}  // namespace detfield
