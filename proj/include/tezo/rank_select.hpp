#ifndef TEZO_RANK_SELECT_HPP
#define TEZO_RANK_SELECT_HPP

#include <cstddef>
#include <vector>

#include "tezo/model.hpp"

namespace tezo {

struct RankPolicy {
  double threshold_frac = 0.25;  // fraction of sigma_1 a singular value must exceed
  std::size_t r_max = 64;
  bool cumulative_energy = false;  // alternative criterion, off by default
  double energy_frac = 0.95;
};

// All singular values of W, descending, via one-sided Jacobi with a fixed
// cyclic sweep order. Desk scale (sides <= 1024).
std::vector<double> jacobi_singular_values(const Matrix& W);

// Top-k of the above. k = 0 yields an empty vector.
std::vector<double> singular_values(const Matrix& W, std::size_t k);

// Count of singular values above threshold_frac * sigma_1 (or the
// cumulative-energy count). Zero matrix degenerates to rank 1 so a factor
// set is always constructible.
std::size_t matrix_rank(const Matrix& W, const RankPolicy& policy);

// Per 2-D-layer ranks: within each block, every layer gets
// min(min over block of matrix_rank, r_max). Layers index-aligned with
// model.mats. Throws on a model with no 2-D layers.
std::vector<std::size_t> select_ranks(const ModelParams& model,
                                      const RankPolicy& policy);

}  // namespace tezo

#endif  // TEZO_RANK_SELECT_HPP
