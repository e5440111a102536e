#ifndef TEZO_LOWRANK_HPP
#define TEZO_LOWRANK_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tezo/matrix.hpp"
#include "tezo/rng.hpp"

namespace tezo {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LayerShape {
  std::size_t m = 0;  // rows
  std::size_t n = 0;  // cols
  std::size_t r = 0;  // rank, 1 <= r <= min(m, n)
  int block = 0;
};

// Fixed model-dimension factors of one layer: u is m x r, v is n x r,
// both standard normal, drawn once at run start and regenerable from the
// recorded seed. Column s of u and v is the rank-1 pair for coefficient s.
struct FactorSet {
  std::string layer_id;
  Matrix u;  // m x r
  Matrix v;  // n x r
  std::uint64_t seed = 0;

  std::size_t rows() const { return u.rows(); }
  std::size_t cols() const { return v.rows(); }
  std::size_t rank() const { return u.cols(); }
};

// Fill order: u column by column (m draws each), then v column by column.
FactorSet init_factors(const LayerShape& shape, std::uint64_t seed,
                       const std::string& layer_id = "");

// Z = sum_s tau_s * outer(u_s, v_s), fully materialized. Test and
// verification path only; the training path streams rank-1 updates.
Matrix materialize_perturbation(const FactorSet& fs, std::span<const double> tau);

// W += scale * sum_s tau_s * outer(u_s, v_s), streamed row by row with a
// fixed s = 0..r-1 inner order. Never allocates an m x n temporary.
void perturb_in_place(Matrix& W, const FactorSet& fs,
                      std::span<const double> tau, double scale);

enum class CostMethod { MeZO, SubZO, LOZO, TeZO };

struct CostModel {
  CostMethod method = CostMethod::TeZO;
  std::uint64_t m = 0, n = 0, r = 0, T = 0;
};

// Closed-form total of sampled Gaussian elements for one 2-D weight over
// T iterations:
//   MeZO  m*n*T,  SubZO (m+n+r)*r*T,  LOZO (m+n)*r*T,  TeZO (m+n+T)*r.
// Throws OverflowError if the product exceeds uint64.
std::uint64_t count_elements(const CostModel& cm);

const char* cost_method_name(CostMethod m);
CostMethod cost_method_from_name(const std::string& name);

}  // namespace tezo

#endif  // TEZO_LOWRANK_HPP
