#pragma once

#include <span>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/matrix.hpp"

namespace socmap {

struct SvrSolverOptions {
  double C = 1.0;
  double epsilon = 0.1;
  double kkt_tolerance = 1e-3;
  double gap_tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

/// Solution of the epsilon-insensitive dual
///   max  -1/2 b'Kb + z'b - eps |b|_1   s.t.  sum b = 0,  -C <= b_i <= C
/// with decision function f(x) = sum_i b_i k(x_i, x) - rho.
struct SvrSolution {
  std::vector<double> beta;
  double rho = 0.0;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  double gap = 0.0;
  double kkt_violation = 0.0;
  long iterations = 0;
};

/// SMO over the 2n-variable form with second-order working-set selection.
/// Iterates until the maximal KKT violation is below kkt_tolerance and the
/// primal-dual gap is below gap_tolerance, tightening the KKT target as
/// needed. Throws Errc::convergence (carrying the gap) past max_iterations.
SvrSolution solve_svr_dual(const Matrix& kernel, std::span<const double> target,
                           const SvrSolverOptions& options);

double rbf_kernel(std::span<const double> u, std::span<const double> v, double sigma);
Matrix rbf_gram(const Matrix& x, double sigma);

struct SvrModel {
  Standardizer scaler;
  double y_mean = 0.0;
  double y_scale = 1.0;
  double sigma = 1.0;
  double rho = 0.0;
  Matrix support;              // standardized support vectors
  std::vector<double> coef;    // beta of each support vector
  double dual_gap = 0.0;

  double predict(std::span<const double> x) const;
  bool operator==(const SvrModel&) const = default;
};

SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params);

}  // namespace socmap
