#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detfield/charpoly.hpp"
#include "detfield/extremes.hpp"
#include "detfield/momentlab.hpp"

namespace detfield {

// Constants measured once by the sweeps below and then frozen. Measured values in comments.
namespace calibrated {
inline constexpr double branch_uniform = 1.0;  // 0.9613 over h, j <= 25, 2e4 angles
inline constexpr double branch_refined = 2.0;  // 1.9241; the accepted ceiling is 10
inline constexpr double laplace_bound = 1.0;   // 0.9589 over the N = 64 grid; the accepted ceiling is 100
inline constexpr double brw_offset_halfwidth = 1.0;  // G offsets span [-0.699, -0.097]
}  // namespace calibrated

enum ExitCode { exit_ok = 0, exit_check_failed = 1, exit_config = 2 };

// Entry point of the command-line tool; args excludes the program name.
int run(const std::vector<std::string>& args);

// Parses a flat "key = value" file ('#' starts a comment) into --key value pairs.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

struct FsCase {
  std::string case_id;
  int N = 0;
  cplx formula;
  McEstimate mc;
};
// The two fixed l = 1 cases, each for N = 4, 5, 6.
std::vector<FsCase> fs_verify_cases(const std::vector<int>& Ns, long n_samples, std::uint64_t seed, int threads);

struct BranchSweep {
  double max_abs_error = 0.0;
  double refined_c = 0.0;  // sup |error| |theta| e^{k} where k > -log|sin(theta/2)|
  std::vector<double> per_hj_error;  // (hmax+1)^2 entries, h-major
};
BranchSweep branch_sweep(int hmax, int theta_points);

struct LaplaceRow {
  cplx q;
  int sign = 1;
  double value = 0.0;
  double scaled = 0.0;  // value |Im q| / ((1 + |Im q|) R(q)^2)
};
// Re q in {-1.5, -1.25, ..., 1.5}, Im q log-spaced on [1/N, 1] (12 values), both signs.
std::vector<LaplaceRow> laplace_bound_sweep(const EquilibriumModel& m, int N);

struct Factor14Row {
  std::string kind;  // chebyshev_T, random_coeffs, random_roots
  long case_id = 0;
  int degree = 0;
  double max_ratio = 1.0;
};
// T_N for N = 1..max_degree, then n_random random polynomials of degree 1..max_degree.
std::vector<Factor14Row> factor14_sweep(long n_random, int max_degree, std::uint64_t seed, int threads);

}  // namespace detfield
