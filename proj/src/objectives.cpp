#include "tezo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tezo/lowrank.hpp"
#include "tezo/rank_select.hpp"

namespace tezo {

namespace {

ModelParams single_matrix_params(std::size_t m, std::size_t n, std::uint64_t seed) {
  ModelParams p;
  p.mats.push_back({"W", 0, Matrix(m, n)});
  GaussianStream g(seed);
  for (auto& x : p.mats[0].W.raw()) x = g.next();
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic

QuadraticObjective QuadraticObjective::diagonal(std::size_t m, std::size_t n,
                                                double eig_min, double eig_max) {
  QuadraticObjective q(m, n);
  const std::size_t d = m * n;
  q.diag_.resize(d);
  for (std::size_t i = 0; i < d; ++i)
    q.diag_[i] =
        d == 1 ? eig_min
               : eig_min + (eig_max - eig_min) * static_cast<double>(i) /
                               static_cast<double>(d - 1);
  return q;
}

QuadraticObjective QuadraticObjective::random_psd(std::size_t m, std::size_t n,
                                                  std::uint64_t seed) {
  QuadraticObjective q(m, n);
  const std::size_t d = m * n;
  GaussianStream g(seed);
  Matrix G(d, d);
  for (auto& x : G.raw()) x = g.next();
  q.dense_ = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += G(k, i) * G(k, j);
      q.dense_(i, j) = acc / static_cast<double>(d) + (i == j ? 0.5 : 0.0);
    }
  q.linear_.resize(d);
  for (auto& x : q.linear_) x = g.next();
  return q;
}

double QuadraticObjective::eval(const ModelParams& W, const Batch&) const {
  const auto& w = W.mats.at(0).W.raw();
  if (w.size() != m_ * n_) throw ShapeError("quadratic: shape mismatch");
  double f = 0.0;
  if (dense_.size() > 0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      double aw = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) aw += dense_(i, j) * w[j];
      f += 0.5 * w[i] * aw;
    }
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) f += 0.5 * diag_[i] * w[i] * w[i];
  }
  if (!linear_.empty())
    for (std::size_t i = 0; i < w.size(); ++i) f -= linear_[i] * w[i];
  return f;
}

ModelParams QuadraticObjective::exact_grad(const ModelParams& W, const Batch&) const {
  const auto& w = W.mats.at(0).W.raw();
  ModelParams g;
  g.mats.push_back({"W", 0, Matrix(m_, n_)});
  auto& out = g.mats[0].W.raw();
  if (dense_.size() > 0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      double aw = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) aw += dense_(i, j) * w[j];
      out[i] = aw;
    }
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = diag_[i] * w[i];
  }
  if (!linear_.empty())
    for (std::size_t i = 0; i < w.size(); ++i) out[i] -= linear_[i];
  return g;
}

ModelParams QuadraticObjective::init_params(std::uint64_t seed) const {
  return single_matrix_params(m_, n_, seed);
}

// ---------------------------------------------------------------------------
// Cubic

double CubicObjective::eval(const ModelParams& W, const Batch&) const {
  const auto& w = W.mats.at(0).W.raw();
  double f = 0.0;
  for (double x : w) f += 0.5 * x * x + c_ * x * x * x;
  return f;
}

ModelParams CubicObjective::exact_grad(const ModelParams& W, const Batch&) const {
  const auto& w = W.mats.at(0).W.raw();
  ModelParams g;
  g.mats.push_back({"W", 0, Matrix(m_, n_)});
  for (std::size_t i = 0; i < w.size(); ++i)
    g.mats[0].W.raw()[i] = w[i] + 3.0 * c_ * w[i] * w[i];
  return g;
}

ModelParams CubicObjective::init_params(std::uint64_t seed) const {
  return single_matrix_params(m_, n_, seed);
}

// ---------------------------------------------------------------------------
// Cascade MLP with synthetic Gaussian cluster data

MlpObjective::MlpObjective(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.dims.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output dims");
  const std::size_t input = spec_.dims.front();
  const std::size_t classes = spec_.dims.back();
  const std::size_t intrinsic =
      spec_.intrinsic_dim == 0 ? input : spec_.intrinsic_dim;
  GaussianStream g(derive_substream(spec_.data_seed, 0xDA7A));
  subspace_ = Matrix(input, intrinsic);
  for (auto& x : subspace_.raw()) x = g.next();
  means_ = Matrix(intrinsic, classes);
  for (auto& x : means_.raw()) x = spec_.cluster_scale * g.next();
  if (spec_.blocks.empty()) {
    spec_.blocks.resize(spec_.dims.size() - 1);
    for (std::size_t l = 0; l + 1 < spec_.dims.size(); ++l)
      spec_.blocks[l] = static_cast<int>(l);
  }
  if (spec_.blocks.size() != spec_.dims.size() - 1)
    throw std::invalid_argument("mlp: blocks must label every weight layer");
}

void MlpObjective::materialize_batch(const Batch& batch, Matrix& x,
                                     std::vector<std::size_t>& y) const {
  const std::size_t input = spec_.dims.front();
  const std::size_t classes = spec_.dims.back();
  const std::size_t intrinsic = means_.rows();
  x = Matrix(input, spec_.batch_size);
  y.resize(spec_.batch_size);
  GaussianStream g(batch.seed);
  std::vector<double> z(intrinsic);
  for (std::size_t b = 0; b < spec_.batch_size; ++b) {
    y[b] = splitmix_finalize(batch.seed + (b + 1) * kGoldenGamma) % classes;
    for (auto& zi : z) zi = g.next();
    for (std::size_t i = 0; i < input; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < intrinsic; ++k)
        acc += subspace_(i, k) * (means_(k, y[b]) + spec_.noise * z[k]);
      x(i, b) = acc;
    }
  }
}

namespace {

double act_forward(Activation a, double x) {
  return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

double act_deriv(Activation a, double pre) {
  if (a == Activation::Tanh) {
    const double th = std::tanh(pre);
    return 1.0 - th * th;
  }
  return pre > 0.0 ? 1.0 : 0.0;
}

}  // namespace

double MlpObjective::eval(const ModelParams& W, const Batch& batch) const {
  Matrix x;
  std::vector<std::size_t> y;
  materialize_batch(batch, x, y);
  const std::size_t layers = spec_.dims.size() - 1;
  Matrix cur = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& wl = W.mats.at(l).W;
    const auto& bl = W.vecs.at(l).b;
    Matrix next(wl.rows(), cur.cols());
    for (std::size_t i = 0; i < wl.rows(); ++i)
      for (std::size_t bcol = 0; bcol < cur.cols(); ++bcol) {
        double acc = bl[i];
        for (std::size_t j = 0; j < wl.cols(); ++j)
          acc += wl(i, j) * cur(j, bcol);
        next(i, bcol) = (l + 1 == layers) ? acc : act_forward(spec_.act, acc);
      }
    cur = std::move(next);
  }
  // mean softmax cross-entropy over the batch
  double loss = 0.0;
  for (std::size_t b = 0; b < cur.cols(); ++b) {
    double mx = cur(0, b);
    for (std::size_t i = 1; i < cur.rows(); ++i) mx = std::max(mx, cur(i, b));
    double lse = 0.0;
    for (std::size_t i = 0; i < cur.rows(); ++i)
      lse += std::exp(cur(i, b) - mx);
    loss += std::log(lse) + mx - cur(y[b], b);
  }
  return loss / static_cast<double>(cur.cols());
}

ModelParams MlpObjective::exact_grad(const ModelParams& W, const Batch& batch) const {
  Matrix x;
  std::vector<std::size_t> y;
  materialize_batch(batch, x, y);
  const std::size_t layers = spec_.dims.size() - 1;
  const std::size_t bs = x.cols();

  std::vector<Matrix> pre(layers);    // A_l
  std::vector<Matrix> post(layers + 1);  // X_0 .. X_L
  post[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& wl = W.mats.at(l).W;
    const auto& bl = W.vecs.at(l).b;
    pre[l] = Matrix(wl.rows(), bs);
    post[l + 1] = Matrix(wl.rows(), bs);
    for (std::size_t i = 0; i < wl.rows(); ++i)
      for (std::size_t b = 0; b < bs; ++b) {
        double acc = bl[i];
        for (std::size_t j = 0; j < wl.cols(); ++j)
          acc += wl(i, j) * post[l](j, b);
        pre[l](i, b) = acc;
        post[l + 1](i, b) =
            (l + 1 == layers) ? acc : act_forward(spec_.act, acc);
      }
  }

  // delta at logits: (softmax - onehot) / batch
  Matrix delta(spec_.dims.back(), bs);
  for (std::size_t b = 0; b < bs; ++b) {
    double mx = post[layers](0, b);
    for (std::size_t i = 1; i < delta.rows(); ++i)
      mx = std::max(mx, post[layers](i, b));
    double lse = 0.0;
    for (std::size_t i = 0; i < delta.rows(); ++i)
      lse += std::exp(post[layers](i, b) - mx);
    for (std::size_t i = 0; i < delta.rows(); ++i)
      delta(i, b) = (std::exp(post[layers](i, b) - mx) / lse -
                     (i == y[b] ? 1.0 : 0.0)) /
                    static_cast<double>(bs);
  }

  ModelParams g;
  g.mats.resize(layers);
  g.vecs.resize(layers);
  for (std::size_t li = layers; li-- > 0;) {
    const Matrix& wl = W.mats.at(li).W;
    g.mats[li] = {W.mats[li].name, W.mats[li].block, Matrix(wl.rows(), wl.cols())};
    g.vecs[li] = {W.vecs[li].name, std::vector<double>(wl.rows(), 0.0)};
    for (std::size_t i = 0; i < wl.rows(); ++i)
      for (std::size_t b = 0; b < bs; ++b) {
        g.vecs[li].b[i] += delta(i, b);
        for (std::size_t j = 0; j < wl.cols(); ++j)
          g.mats[li].W(i, j) += delta(i, b) * post[li](j, b);
      }
    if (li > 0) {
      Matrix prev(wl.cols(), bs);
      for (std::size_t j = 0; j < wl.cols(); ++j)
        for (std::size_t b = 0; b < bs; ++b) {
          double acc = 0.0;
          for (std::size_t i = 0; i < wl.rows(); ++i)
            acc += wl(i, j) * delta(i, b);
          prev(j, b) = acc * act_deriv(spec_.act, pre[li - 1](j, b));
        }
      delta = std::move(prev);
    }
  }
  return g;
}

ModelParams MlpObjective::init_params(std::uint64_t seed) const {
  ModelParams p;
  GaussianStream g(seed);
  const std::size_t layers = spec_.dims.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t rows = spec_.dims[l + 1], cols = spec_.dims[l];
    Param2D w{"layer" + std::to_string(l) + ".W", spec_.blocks[l],
              Matrix(rows, cols)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& x : w.W.raw()) x = scale * g.next();
    p.mats.push_back(std::move(w));
  }
  for (std::size_t l = 0; l < layers; ++l)
    p.vecs.push_back({"layer" + std::to_string(l) + ".b",
                      std::vector<double>(spec_.dims[l + 1], 0.0)});
  return p;
}

// ---------------------------------------------------------------------------

SpectrumReport gradient_spectrum(const DifferentiableObjective& obj,
                                 std::uint64_t base_seed, std::size_t steps,
                                 std::size_t topk, double eta) {
  ModelParams W = obj.init_params(derive_substream(base_seed, 1));
  const std::size_t layers = W.mats.size();
  SpectrumReport rep;
  rep.spectra.resize(steps);
  rep.undefined_row.assign(layers, std::vector<bool>(steps, false));
  std::vector<std::vector<std::vector<double>>> flat(layers);  // normalized grads

  for (std::size_t t = 0; t < steps; ++t) {
    const Batch batch = obj.sample_batch(derive_seed(base_seed, t));
    const ModelParams grad = obj.exact_grad(W, batch);
    rep.spectra[t].resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const Matrix& gl = grad.mats[l].W;
      const std::size_t k = std::min(topk, std::min(gl.rows(), gl.cols()));
      rep.spectra[t][l] = singular_values(gl, k);
      const double norm = frobenius_norm(gl);
      std::vector<double> unit(gl.raw());
      if (norm > 0.0) {
        for (auto& x : unit) x /= norm;
      } else {
        rep.undefined_row[l][t] = true;
      }
      flat[l].push_back(std::move(unit));
    }
    // small oracle step so the trajectory actually moves
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t i = 0; i < W.mats[l].W.size(); ++i)
        W.mats[l].W.raw()[i] -= eta * grad.mats[l].W.raw()[i];
    for (std::size_t l = 0; l < W.vecs.size(); ++l)
      for (std::size_t i = 0; i < W.vecs[l].b.size(); ++i)
        W.vecs[l].b[i] -= eta * grad.vecs[l].b[i];
  }

  rep.cosine.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    rep.cosine[l] = Matrix(steps, steps);
    for (std::size_t t1 = 0; t1 < steps; ++t1)
      for (std::size_t t2 = 0; t2 < steps; ++t2) {
        double acc = 0.0;
        for (std::size_t i = 0; i < flat[l][t1].size(); ++i)
          acc += flat[l][t1][i] * flat[l][t2][i];
        rep.cosine[l](t1, t2) = acc;
      }
  }
  return rep;
}

std::unique_ptr<DifferentiableObjective> make_objective(const std::string& spec) {
  auto parse_dims = [](const std::string& s) {
    std::vector<std::size_t> dims;
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t end = s.find('-', pos);
      if (end == std::string::npos) end = s.size();
      dims.push_back(std::stoul(s.substr(pos, end - pos)));
      pos = end + 1;
    }
    return dims;
  };
  auto parse_shape = [](const std::string& s) -> std::pair<std::size_t, std::size_t> {
    const std::size_t x = s.find('x');
    if (x == std::string::npos) {
      const std::size_t d = std::stoul(s);
      return {d, d};
    }
    return {std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1))};
  };
  if (spec.rfind("quad", 0) == 0) {
    auto [m, n] = parse_shape(spec.substr(4));
    return std::make_unique<QuadraticObjective>(QuadraticObjective::diagonal(m, n));
  }
  if (spec.rfind("cubic", 0) == 0) {
    auto [m, n] = parse_shape(spec.substr(5));
    return std::make_unique<CubicObjective>(m, n);
  }
  if (spec.rfind("mlp:", 0) == 0) {
    MlpSpec ms;
    ms.dims = parse_dims(spec.substr(4));
    ms.intrinsic_dim = std::min<std::size_t>(4, ms.dims.front());
    return std::make_unique<MlpObjective>(ms);
  }
  throw std::invalid_argument("unknown objective spec: " + spec);
}

}  // namespace tezo
