#include "tezo/lowrank.hpp"

#include <cmath>
#include <limits>

namespace tezo {

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.raw()) s += x * x;
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a.raw()[i] - b.raw()[i]));
  return d;
}

FactorSet init_factors(const LayerShape& shape, std::uint64_t seed,
                       const std::string& layer_id) {
  if (shape.m < 1 || shape.n < 1 || shape.r < 1 ||
      shape.r > std::min(shape.m, shape.n))
    throw ShapeError("init_factors: need 1 <= r <= min(m, n)");
  FactorSet fs;
  fs.layer_id = layer_id;
  fs.seed = seed;
  fs.u = Matrix(shape.m, shape.r);
  fs.v = Matrix(shape.n, shape.r);
  GaussianStream g(seed);
  for (std::size_t s = 0; s < shape.r; ++s)
    for (std::size_t i = 0; i < shape.m; ++i) fs.u(i, s) = g.next();
  for (std::size_t s = 0; s < shape.r; ++s)
    for (std::size_t j = 0; j < shape.n; ++j) fs.v(j, s) = g.next();
  return fs;
}

Matrix materialize_perturbation(const FactorSet& fs, std::span<const double> tau) {
  if (tau.size() != fs.rank())
    throw ShapeError("materialize_perturbation: len(tau) != r");
  Matrix z(fs.rows(), fs.cols());
  for (std::size_t i = 0; i < fs.rows(); ++i)
    for (std::size_t j = 0; j < fs.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < fs.rank(); ++s)
        acc += tau[s] * fs.u(i, s) * fs.v(j, s);
      z(i, j) = acc;
    }
  return z;
}

void perturb_in_place(Matrix& W, const FactorSet& fs,
                      std::span<const double> tau, double scale) {
  if (W.rows() != fs.rows() || W.cols() != fs.cols())
    throw ShapeError("perturb_in_place: W does not match factor shapes");
  if (tau.size() != fs.rank())
    throw ShapeError("perturb_in_place: len(tau) != r");
  if (scale == 0.0) return;
  const std::size_t r = fs.rank();
  for (std::size_t i = 0; i < W.rows(); ++i) {
    double* row = W.data() + i * W.cols();
    for (std::size_t j = 0; j < W.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < r; ++s)
        acc += tau[s] * fs.u(i, s) * fs.v(j, s);
      row[j] += scale * acc;
    }
  }
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    throw OverflowError("count_elements: product overflows uint64");
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out))
    throw OverflowError("count_elements: sum overflows uint64");
  return out;
}

}  // namespace

std::uint64_t count_elements(const CostModel& cm) {
  if (cm.m < 1 || cm.n < 1 || cm.T < 1)
    throw ShapeError("count_elements: all fields must be positive");
  if (cm.method != CostMethod::MeZO && cm.r < 1)
    throw ShapeError("count_elements: rank must be positive");
  switch (cm.method) {
    case CostMethod::MeZO:
      return checked_mul(checked_mul(cm.m, cm.n), cm.T);
    case CostMethod::SubZO:
      return checked_mul(checked_mul(checked_add(checked_add(cm.m, cm.n), cm.r), cm.r), cm.T);
    case CostMethod::LOZO:
      return checked_mul(checked_mul(checked_add(cm.m, cm.n), cm.r), cm.T);
    case CostMethod::TeZO:
      return checked_mul(checked_add(checked_add(cm.m, cm.n), cm.T), cm.r);
  }
  throw ShapeError("count_elements: unknown method");
}

const char* cost_method_name(CostMethod m) {
  switch (m) {
    case CostMethod::MeZO: return "mezo";
    case CostMethod::SubZO: return "subzo";
    case CostMethod::LOZO: return "lozo";
    case CostMethod::TeZO: return "tezo";
  }
  return "?";
}

CostMethod cost_method_from_name(const std::string& name) {
  if (name == "mezo") return CostMethod::MeZO;
  if (name == "subzo") return CostMethod::SubZO;
  if (name == "lozo") return CostMethod::LOZO;
  if (name == "tezo") return CostMethod::TeZO;
  throw std::invalid_argument("unknown cost method: " + name);
}

}  // namespace tezo
