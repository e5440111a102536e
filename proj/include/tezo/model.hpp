#ifndef TEZO_MODEL_HPP
#define TEZO_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tezo/matrix.hpp"

namespace tezo {

struct Param2D {
  std::string name;
  int block = 0;  // cascade block index, shared rank bound within a block
  Matrix W;
};

struct Param1D {
  std::string name;
  std::vector<double> b;
};

// Ordered, named parameter list. Perturbation and update passes walk the
// 2-D params first, then the 1-D params, always in declaration order; the
// RNG stream consumption depends on that order, so it is part of the
// reproducibility contract.
struct ModelParams {
  std::vector<Param2D> mats;
  std::vector<Param1D> vecs;

  std::size_t total_floats() const {
    std::size_t n = 0;
    for (const auto& p : mats) n += p.W.size();
    for (const auto& p : vecs) n += p.b.size();
    return n;
  }
};

}  // namespace tezo

#endif  // TEZO_MODEL_HPP
