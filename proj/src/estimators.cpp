#include "tezo/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace tezo {

namespace {

// Lazy factors for LOZO/SubZO are keyed on the redraw-boundary step, so a
// replay at any step inside the interval regenerates the same U, V.
GaussianStream lazy_factor_stream(const PerturbationScheme& scheme,
                                  std::uint64_t t, std::size_t layer_index) {
  const std::uint64_t t0 = t - t % scheme.interval;
  return GaussianStream(
      derive_substream(derive_seed(scheme.factor_seed, t0), layer_index));
}

Matrix draw_matrix(GaussianStream& g, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (auto& x : m.raw()) x = g.next();
  return m;
}

void add_product_uvt(Matrix& W, const Matrix& u, const Matrix& v, double scale) {
  const std::size_t r = u.cols();
  for (std::size_t i = 0; i < W.rows(); ++i) {
    double* row = W.data() + i * W.cols();
    for (std::size_t j = 0; j < W.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < r; ++s) acc += u(i, s) * v(j, s);
      row[j] += scale * acc;
    }
  }
}

void perturb_layer(Matrix& W, const PerturbationScheme& scheme,
                   std::size_t layer_index, double scale, GaussianStream& g,
                   std::uint64_t t, ElementCounter* counter) {
  const std::size_t m = W.rows(), n = W.cols();
  switch (scheme.kind) {
    case PerturbKind::Dense: {
      if (scale == 0.0) {
        g.skip(m * n);
      } else {
        for (auto& x : W.raw()) x += scale * g.next();
      }
      if (counter) counter->generated += m * n;
      return;
    }
    case PerturbKind::Tezo: {
      const FactorSet& fs = scheme.factors.at(layer_index);
      if (fs.rows() != m || fs.cols() != n)
        throw ShapeError("perturbation: factor set does not match layer " +
                         std::to_string(layer_index));
      const auto tau = g.sample(fs.rank());
      perturb_in_place(W, fs, tau, scale);
      if (counter) counter->generated += fs.rank();
      return;
    }
    case PerturbKind::Lozo: {
      GaussianStream fg = lazy_factor_stream(scheme, t, layer_index);
      const Matrix u = draw_matrix(fg, m, scheme.rank);
      const Matrix v = draw_matrix(g, n, scheme.rank);
      if (scale != 0.0) add_product_uvt(W, u, v, scale);
      if (counter) {
        counter->generated += n * scheme.rank;
        if (t % scheme.interval == 0) counter->generated += m * scheme.rank;
      }
      return;
    }
    case PerturbKind::Subzo: {
      GaussianStream fg = lazy_factor_stream(scheme, t, layer_index);
      const Matrix u = draw_matrix(fg, m, scheme.rank);
      const Matrix v = draw_matrix(fg, n, scheme.rank);
      const Matrix sigma = draw_matrix(g, scheme.rank, scheme.rank);
      if (scale != 0.0) {
        // C = U * Sigma, then W += scale * C V^T
        Matrix c(m, scheme.rank);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t s2 = 0; s2 < scheme.rank; ++s2) {
            double acc = 0.0;
            for (std::size_t s = 0; s < scheme.rank; ++s)
              acc += u(i, s) * sigma(s, s2);
            c(i, s2) = acc;
          }
        add_product_uvt(W, c, v, scale);
      }
      if (counter) {
        counter->generated += scheme.rank * scheme.rank;
        if (t % scheme.interval == 0)
          counter->generated += (m + n) * scheme.rank;
      }
      return;
    }
  }
}

}  // namespace

void apply_perturbation(ModelParams& W, const PerturbationScheme& scheme,
                        double scale, std::uint64_t zeta, std::uint64_t t,
                        ElementCounter* counter) {
  if ((scheme.kind == PerturbKind::Lozo || scheme.kind == PerturbKind::Subzo) &&
      (scheme.rank < 1 || scheme.interval < 1))
    throw ShapeError("perturbation: baseline rank and interval must be >= 1");
  GaussianStream g(zeta);
  for (std::size_t li = 0; li < W.mats.size(); ++li)
    perturb_layer(W.mats[li].W, scheme, li, scale, g, t, counter);
  for (auto& p : W.vecs) {
    if (scale == 0.0) {
      g.skip(p.b.size());
    } else {
      for (auto& x : p.b) x += scale * g.next();
    }
    if (counter) counter->generated += p.b.size();
  }
}

ZoEstimate spsa_kappa(const std::function<double(const ModelParams&)>& objective,
                      ModelParams& W, const PerturbationScheme& scheme,
                      double rho, std::uint64_t zeta, std::uint64_t t,
                      ElementCounter* counter) {
  if (rho <= 0.0) throw std::invalid_argument("spsa_kappa: rho must be > 0");
  ZoEstimate est;
  est.seed = zeta;
  est.rho = rho;
  apply_perturbation(W, scheme, rho, zeta, t, counter);
  est.f_plus = objective(W);
  apply_perturbation(W, scheme, -2.0 * rho, zeta, t);
  est.f_minus = objective(W);
  apply_perturbation(W, scheme, rho, zeta, t);
  est.kappa = (est.f_plus - est.f_minus) / (2.0 * rho);
  est.finite = std::isfinite(est.f_plus) && std::isfinite(est.f_minus) &&
               std::isfinite(est.kappa);
  return est;
}

Matrix zo_gradient(const ZoEstimate& est, const FactorSet& fs,
                   bool unbiased_scale) {
  GaussianStream g(est.seed);
  const auto tau = g.sample(fs.rank());
  Matrix z = materialize_perturbation(fs, tau);
  const double scale =
      unbiased_scale ? est.kappa / static_cast<double>(fs.rank()) : est.kappa;
  for (auto& x : z.raw()) x *= scale;
  return z;
}

double delta_coefficient(std::uint64_t m, std::uint64_t n, std::uint64_t r) {
  const double md = static_cast<double>(m), nd = static_cast<double>(n),
               rd = static_cast<double>(r);
  return 1.0 + md * nd + 2.0 * md * nd / rd + 6.0 * (md + nd) / rd + 10.0 / rd;
}

double delta_rho_coefficient(std::uint64_t m, std::uint64_t n, std::uint64_t r) {
  const double md = static_cast<double>(m), nd = static_cast<double>(n),
               rd = static_cast<double>(r);
  const double m3 = md * md * md, n3 = nd * nd * nd;
  const double mp3 = (md + 3.0) * (md + 3.0) * (md + 3.0);
  const double np3 = (nd + 3.0) * (nd + 3.0) * (nd + 3.0);
  return (15.0 * rd * rd * mp3 * np3 + 36.0 * rd * rd * rd * m3 * n3 +
          rd * rd * rd * rd * m3 * n3) /
         4.0;
}

Matrix baseline_perturbation(PerturbKind kind, std::size_t m, std::size_t n,
                             std::size_t rank, std::size_t interval,
                             std::uint64_t factor_seed, std::uint64_t zeta,
                             std::uint64_t t) {
  PerturbationScheme scheme;
  scheme.kind = kind;
  scheme.rank = rank;
  scheme.interval = interval;
  scheme.factor_seed = factor_seed;
  ModelParams W;
  W.mats.push_back({"z", 0, Matrix(m, n)});
  apply_perturbation(W, scheme, 1.0, zeta, t);
  return W.mats[0].W;
}

}  // namespace tezo
