#include "tezo/rank_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tezo/lowrank.hpp"

namespace tezo {

std::vector<double> jacobi_singular_values(const Matrix& W) {
  if (W.rows() == 0 || W.cols() == 0)
    throw ShapeError("jacobi_singular_values: empty matrix");
  // Work on the tall orientation so columns are the short side.
  const bool transpose = W.rows() < W.cols();
  const std::size_t m = transpose ? W.cols() : W.rows();
  const std::size_t n = transpose ? W.rows() : W.cols();
  // Column-major copy: col(j) = a[j*m .. j*m+m)
  std::vector<double> a(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[j * m + i] = transpose ? W(j, i) : W(i, j);

  const double tol = 1e-14;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cp = a.data() + p * m;
        double* cq = a.data() + q * m;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = cp[i], xq = cq[i];
          cp[i] = c * xp - s * xq;
          cq[i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    const double* cj = a.data() + j * m;
    for (std::size_t i = 0; i < m; ++i) norm2 += cj[i] * cj[i];
    sigma[j] = std::sqrt(norm2);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

std::vector<double> singular_values(const Matrix& W, std::size_t k) {
  if (k > std::min(W.rows(), W.cols()))
    throw ShapeError("singular_values: k > min(m, n)");
  if (k == 0) return {};
  auto all = jacobi_singular_values(W);
  all.resize(k);
  return all;
}

std::size_t matrix_rank(const Matrix& W, const RankPolicy& policy) {
  if (policy.threshold_frac <= 0.0 || policy.threshold_frac >= 1.0)
    throw std::invalid_argument("matrix_rank: threshold_frac must be in (0, 1)");
  const auto sigma = jacobi_singular_values(W);
  if (sigma.empty() || sigma[0] == 0.0) return 1;  // zero matrix
  if (policy.cumulative_energy) {
    double total = 0.0;
    for (double s : sigma) total += s * s;
    double acc = 0.0;
    std::size_t r = 0;
    for (double s : sigma) {
      acc += s * s;
      ++r;
      if (acc >= policy.energy_frac * total) break;
    }
    return std::max<std::size_t>(r, 1);
  }
  std::size_t r = 0;
  const double cutoff = policy.threshold_frac * sigma[0];
  for (double s : sigma)
    if (s > cutoff) ++r;
  return std::max<std::size_t>(r, 1);
}

std::vector<std::size_t> select_ranks(const ModelParams& model,
                                      const RankPolicy& policy) {
  if (model.mats.empty())
    throw std::invalid_argument("select_ranks: model has no 2-D layers");
  if (policy.r_max < 1)
    throw std::invalid_argument("select_ranks: r_max must be >= 1");
  std::map<int, std::size_t> block_min;
  std::vector<std::size_t> raw(model.mats.size());
  for (std::size_t i = 0; i < model.mats.size(); ++i) {
    raw[i] = matrix_rank(model.mats[i].W, policy);
    const int b = model.mats[i].block;
    auto it = block_min.find(b);
    if (it == block_min.end())
      block_min[b] = raw[i];
    else
      it->second = std::min(it->second, raw[i]);
  }
  std::vector<std::size_t> out(model.mats.size());
  for (std::size_t i = 0; i < model.mats.size(); ++i)
    out[i] = std::min(block_min[model.mats[i].block], policy.r_max);
  return out;
}

}  // namespace tezo
