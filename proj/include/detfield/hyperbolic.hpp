#pragma once

#include "detfield/common.hpp"

namespace detfield {

// Point of the open unit disk in hyperbolic polar form: z = tanh(rho/2) e^{i theta},
// rho = d_H(0, z). Points within 1e-17 of the circle (ray points zeta_j with j > 37)
// still have a faithful representation this way.
struct DiskPoint {
  double rho = 0.0;
  double theta = 0.0;

  static DiskPoint from_complex(cplx z);
  static DiskPoint polar(double rho, double theta);
  cplx z() const;
  double radius() const;          // |z|
  double one_minus_radius() const;  // 1 - |z| without cancellation
  DiskPoint conj() const { return polar(rho, -theta); }
  DiskPoint rotate(double angle) const { return polar(rho, theta + angle); }
};

using PlanePoint = cplx;

double wrap_angle(double theta);  // into (-pi, pi]

double hyp_dist(const DiskPoint& a, const DiskPoint& b);
double pseudo_dist(const DiskPoint& a, const DiskPoint& b);
DiskPoint mobius_to_zero(const DiskPoint& y, const DiskPoint& z);

cplx joukowsky(cplx z);                 // (z + 1/z)/2, any z != 0
PlanePoint joukowsky(const DiskPoint& z);  // stable near the circle

DiskPoint ray_point(int j);  // zeta_j, d_H(0, zeta_j) = j

struct BranchProfile {
  double exact;
  double approx;
  double error;
};
BranchProfile branch_profile(double h, double j, double theta);

struct DomainParams {
  double N;
  double delta;
  double omega_arg;  // argument of the boundary anchor omega
};
bool in_domain(const DomainParams& params, const DiskPoint& z);

}  // namespace detfield
