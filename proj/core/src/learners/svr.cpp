#include "socmap/learners/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "socmap/error.hpp"

namespace socmap {

double rbf_kernel(std::span<const double> u, std::span<const double> v, double sigma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

Matrix rbf_gram(const Matrix& x, double sigma) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(x.row(i), x.row(j), sigma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

namespace {

constexpr double kTau = 1e-12;

struct Objectives {
  double primal;
  double dual;
};

// (K beta)_i recovered from the gradient: G_i = (K beta)_i + eps - z_i.
Objectives objectives(const Matrix& k, std::span<const double> z, std::span<const double> beta,
                      double rho, double c, double eps) {
  const std::size_t n = z.size();
  double quad = 0.0, lin = 0.0, l1 = 0.0, slack = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double kb = 0.0;
    for (std::size_t j = 0; j < n; ++j) kb += k(i, j) * beta[j];
    quad += beta[i] * kb;
    lin += z[i] * beta[i];
    l1 += std::abs(beta[i]);
    slack += std::max(0.0, std::abs(z[i] - (kb - rho)) - eps);
  }
  return {0.5 * quad + c * slack, -0.5 * quad + lin - eps * l1};
}

}  // namespace

SvrSolution solve_svr_dual(const Matrix& kernel, std::span<const double> z,
                           const SvrSolverOptions& opt) {
  const std::size_t n = z.size();
  if (kernel.rows() != n || kernel.cols() != n) fail(Errc::shape, "kernel must be n x n");
  if (n == 0) fail(Errc::insufficient_data, "SVR needs at least one sample");
  const std::size_t m = 2 * n;
  const double c = opt.C;

  // Variables t < n carry sign +1 (alpha), t >= n sign -1 (alpha*).
  std::vector<double> alpha(m, 0.0);
  std::vector<double> grad(m);
  std::vector<signed char> sign(m);
  for (std::size_t i = 0; i < n; ++i) {
    sign[i] = 1;
    sign[i + n] = -1;
    grad[i] = opt.epsilon - z[i];
    grad[i + n] = opt.epsilon + z[i];
  }
  auto kv = [&](std::size_t a, std::size_t b) { return kernel(a % n, b % n); };
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  auto compute_rho = [&] {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < m; ++t) {
      const double yg = sign[t] * grad[t];
      if (upper(t)) {
        if (sign[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (lower(t)) {
        if (sign[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  };

  SvrSolution sol;
  double tolerance = opt.kkt_tolerance;
  long iter = 0;
  while (true) {
    // Working set: i maximizes -s G over I_up; j by second-order gain over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = m, j = m;
    for (std::size_t t = 0; t < m; ++t) {
      if (sign[t] == 1) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    double best_obj = std::numeric_limits<double>::infinity();
    if (i < m) {
      for (std::size_t t = 0; t < m; ++t) {
        if (sign[t] == 1) {
          if (lower(t)) continue;
          const double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (diff > 0.0) {
            double quad = kv(i, i) + kv(t, t) - 2.0 * sign[i] * kv(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= best_obj) { best_obj = obj; j = t; }
          }
        } else {
          if (upper(t)) continue;
          const double diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (diff > 0.0) {
            double quad = kv(i, i) + kv(t, t) + 2.0 * sign[i] * kv(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= best_obj) { best_obj = obj; j = t; }
          }
        }
      }
    }
    const double violation = (i < m && gmax2 > -std::numeric_limits<double>::infinity()) ? gmax + gmax2 : 0.0;

    if (violation < tolerance || j == m) {
      sol.beta.assign(n, 0.0);
      for (std::size_t t = 0; t < n; ++t) sol.beta[t] = alpha[t] - alpha[t + n];
      sol.rho = compute_rho();
      const auto obj = objectives(kernel, z, sol.beta, sol.rho, c, opt.epsilon);
      sol.primal_objective = obj.primal;
      sol.dual_objective = obj.dual;
      sol.gap = obj.primal - obj.dual;
      sol.kkt_violation = std::max(violation, 0.0);
      sol.iterations = iter;
      if (sol.gap < opt.gap_tolerance || tolerance < 1e-12 || j == m) return sol;
      tolerance *= 0.1;
      continue;
    }

    if (++iter > opt.max_iterations) {
      sol.beta.assign(n, 0.0);
      for (std::size_t t = 0; t < n; ++t) sol.beta[t] = alpha[t] - alpha[t + n];
      sol.rho = compute_rho();
      const auto obj = objectives(kernel, z, sol.beta, sol.rho, c, opt.epsilon);
      std::ostringstream msg;
      msg << "SVR did not converge in " << opt.max_iterations
          << " iterations; duality gap " << (obj.primal - obj.dual);
      fail(Errc::convergence, msg.str());
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qij = sign[i] * sign[j] * kv(i, j);
    if (sign[i] != sign[j]) {
      double quad = kv(i, i) + kv(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = kv(i, i) + kv(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < m; ++t) {
      grad[t] += sign[t] * (sign[i] * kv(t, i) * di + sign[j] * kv(t, j) * dj);
    }
  }
}

double SvrModel::predict(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler.apply_row(x, xs);
  double f = -rho;
  for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * rbf_kernel(support.row(i), xs, sigma);
  return y_mean + y_scale * f;
}

SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params) {
  const std::size_t n = x.rows();
  if (n != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (n == 0) fail(Errc::insufficient_data, "SVR needs at least one sample");

  SvrModel model;
  model.scaler = Standardizer::fit(x);
  const Matrix xs = model.scaler.apply(x);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double scale = 1.0;
  if (params.scale_target && n > 1) {
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 1e-12) scale = sd;
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (y[i] - mean) / scale;

  const Matrix k = rbf_gram(xs, params.sigma);
  const auto sol = solve_svr_dual(
      k, z, SvrSolverOptions{params.C, params.epsilon, params.kkt_tolerance, params.gap_tolerance,
                             params.max_iterations});

  model.y_mean = mean;
  model.y_scale = scale;
  model.sigma = params.sigma;
  model.rho = sol.rho;
  model.dual_gap = sol.gap;
  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.beta[i] != 0.0) {
      sv.push_back(i);
      model.coef.push_back(sol.beta[i]);
    }
  }
  model.support = xs.select_rows(sv);
  if (sv.empty()) model.support = Matrix(0, x.cols());
  return model;
}

}  // namespace socmap
