#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tezo/lowrank.hpp"

using namespace tezo;

TEST_CASE("single outer product") {
  FactorSet fs;
  fs.u = Matrix(2, 1);
  fs.u(0, 0) = 1.0;
  fs.u(1, 0) = 2.0;
  fs.v = Matrix(1, 1);
  fs.v(0, 0) = 3.0;
  const std::vector<double> tau{1.0};
  const Matrix z = materialize_perturbation(fs, tau);
  CHECK(z(0, 0) == 3.0);
  CHECK(z(1, 0) == 6.0);
}

TEST_CASE("tau = 0 gives the zero matrix") {
  const FactorSet fs = init_factors({4, 3, 2, 0}, 11);
  const std::vector<double> tau{0.0, 0.0};
  const Matrix z = materialize_perturbation(fs, tau);
  for (double x : z.raw()) CHECK(x == 0.0);
}

TEST_CASE("materialization matches the triple-loop oracle") {
  const FactorSet fs = init_factors({5, 4, 3, 0}, 77);
  GaussianStream g(5);
  const auto tau = g.sample(3);
  const Matrix z = materialize_perturbation(fs, tau);
  const Matrix ref = oracle::triple_loop_materialize(fs.u, fs.v, tau);
  CHECK(max_abs_diff(z, ref) < 1e-12 * (1.0 + frobenius_norm(ref)));
}

TEST_CASE("materialization is linear in tau") {
  const FactorSet fs = init_factors({6, 5, 3, 0}, 8);
  GaussianStream g(9);
  const auto t1 = g.sample(3);
  const auto t2 = g.sample(3);
  const double a = 1.7, b = -0.3;
  std::vector<double> combo(3);
  for (int s = 0; s < 3; ++s) combo[s] = a * t1[s] + b * t2[s];
  const Matrix lhs = materialize_perturbation(fs, combo);
  const Matrix z1 = materialize_perturbation(fs, t1);
  const Matrix z2 = materialize_perturbation(fs, t2);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs.raw()[i] ==
          doctest::Approx(a * z1.raw()[i] + b * z2.raw()[i]).epsilon(1e-12));
}

TEST_CASE("perturbation roundtrip (+rho, -2rho, +rho) restores W") {
  for (double rho : {1e-3, 1e-2}) {
    const FactorSet fs = init_factors({16, 12, 4, 0}, 33);
    Matrix W(16, 12);
    GaussianStream g(44);
    for (auto& x : W.raw()) x = g.next();
    const Matrix original = W;
    const auto tau = GaussianStream(55).sample(4);
    perturb_in_place(W, fs, tau, rho);
    perturb_in_place(W, fs, tau, -2.0 * rho);
    perturb_in_place(W, fs, tau, rho);
    for (std::size_t i = 0; i < W.size(); ++i)
      CHECK(std::abs(W.raw()[i] - original.raw()[i]) <=
            1e-10 * std::max(1.0, std::abs(original.raw()[i])));
  }
}

TEST_CASE("scale = 0 leaves W bitwise unchanged") {
  const FactorSet fs = init_factors({4, 4, 2, 0}, 1);
  Matrix W(4, 4);
  GaussianStream g(2);
  for (auto& x : W.raw()) x = g.next();
  const Matrix original = W;
  const auto tau = GaussianStream(3).sample(2);
  perturb_in_place(W, fs, tau, 0.0);
  CHECK(W == original);
}

TEST_CASE("perturb_in_place agrees with materialization") {
  const FactorSet fs = init_factors({8, 7, 3, 0}, 21);
  Matrix W(8, 7);
  GaussianStream g(22);
  for (auto& x : W.raw()) x = g.next();
  const Matrix original = W;
  const auto tau = GaussianStream(23).sample(3);
  const double rho = 1e-2;
  perturb_in_place(W, fs, tau, rho);
  const Matrix z = materialize_perturbation(fs, tau);
  for (std::size_t i = 0; i < W.size(); ++i)
    CHECK(std::abs(W.raw()[i] - original.raw()[i] - rho * z.raw()[i]) < 1e-12);
}

TEST_CASE("shape mismatches are rejected") {
  const FactorSet fs = init_factors({4, 3, 2, 0}, 5);
  const std::vector<double> bad_tau{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)materialize_perturbation(fs, bad_tau), ShapeError);
  Matrix wrong(3, 3);
  const std::vector<double> tau{1.0, 2.0};
  CHECK_THROWS_AS(perturb_in_place(wrong, fs, tau, 1.0), ShapeError);
}

TEST_CASE("factor init replays and allows full rank") {
  const FactorSet a = init_factors({5, 7, 5, 0}, 99);
  const FactorSet b = init_factors({5, 7, 5, 0}, 99);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.rank() == 5);
}

TEST_CASE("factor columns have unit sample variance") {
  const std::size_t m = 10000;
  const FactorSet fs = init_factors({m, 2, 2, 0}, 3);
  for (std::size_t s = 0; s < 2; ++s) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum += fs.u(i, s);
      sumsq += fs.u(i, s) * fs.u(i, s);
    }
    const double mean = sum / m;
    const double var = sumsq / m - mean * mean;
    CHECK(var > 0.94);
    CHECK(var < 1.06);
  }
}

TEST_CASE("element accounting closed forms") {
  CHECK(count_elements({CostMethod::MeZO, 1024, 1024, 1, 1000}) ==
        1048576000ull);
  CHECK(count_elements({CostMethod::TeZO, 1024, 1024, 8, 1000}) == 24384ull);
  CHECK(count_elements({CostMethod::LOZO, 1024, 1024, 8, 1000}) == 16384000ull);
  CHECK(count_elements({CostMethod::SubZO, 1024, 1024, 8, 1000}) ==
        (1024ull + 1024 + 8) * 8 * 1000);
}

TEST_CASE("element counts are ordered TeZO < LOZO < SubZO < MeZO") {
  GaussianStream g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t m = 64 + static_cast<std::uint64_t>(std::abs(g.next()) * 500);
    const std::uint64_t n = 64 + static_cast<std::uint64_t>(std::abs(g.next()) * 500);
    const std::uint64_t r = 1 + static_cast<std::uint64_t>(std::abs(g.next()) * 15) % 16;
    const std::uint64_t T = 64 + static_cast<std::uint64_t>(std::abs(g.next()) * 2000);
    const auto tezo = count_elements({CostMethod::TeZO, m, n, r, T});
    const auto lozo = count_elements({CostMethod::LOZO, m, n, r, T});
    const auto subzo = count_elements({CostMethod::SubZO, m, n, r, T});
    const auto mezo = count_elements({CostMethod::MeZO, m, n, r, T});
    CHECK(tezo < lozo);
    CHECK(lozo < subzo);
    CHECK(subzo < mezo);
  }
}

TEST_CASE("overflow is a checked error") {
  CHECK_THROWS_AS(
      (void)count_elements({CostMethod::MeZO, 1ull << 32, 1ull << 32, 1, 2}),
      OverflowError);
}
