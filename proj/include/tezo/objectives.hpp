#ifndef TEZO_OBJECTIVES_HPP
#define TEZO_OBJECTIVES_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tezo/model.hpp"
#include "tezo/rng.hpp"

namespace tezo {

// Opaque minibatch handle. Data is derived deterministically from the
// seed, so holding the handle fixed across the f_+ / f_- evaluations
// pins the minibatch exactly.
struct Batch {
  std::uint64_t seed = 0;
};

// ZO-visible surface: function evaluations only. The exact-gradient
// oracle lives on a separate interface so estimator and optimizer code
// cannot reach it.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double eval(const ModelParams& W, const Batch& batch) const = 0;
  virtual Batch sample_batch(std::uint64_t seed) const { return Batch{seed}; }
  virtual ModelParams init_params(std::uint64_t seed) const = 0;
};

// Oracle surface for tests, finite-difference checks, and the spectrum
// diagnostic. Never consumed by ZO training paths.
class DifferentiableObjective : public Objective {
 public:
  virtual ModelParams exact_grad(const ModelParams& W, const Batch& batch) const = 0;
};

// f(w) = 1/2 <w, A w> - <b, w> over the flattened single m x n weight.
// A is diagonal (spectrum given explicitly) or dense PSD.
class QuadraticObjective : public DifferentiableObjective {
 public:
  // Diagonal A with eigenvalues linearly spaced in [eig_min, eig_max].
  static QuadraticObjective diagonal(std::size_t m, std::size_t n,
                                     double eig_min = 0.5, double eig_max = 2.0);
  // Dense A = G^T G / d + 0.5 I from a seeded Gaussian G.
  static QuadraticObjective random_psd(std::size_t m, std::size_t n,
                                       std::uint64_t seed);

  double eval(const ModelParams& W, const Batch& batch) const override;
  ModelParams exact_grad(const ModelParams& W, const Batch& batch) const override;
  ModelParams init_params(std::uint64_t seed) const override;

  std::size_t dim() const { return m_ * n_; }

 private:
  QuadraticObjective(std::size_t m, std::size_t n) : m_(m), n_(n) {}
  std::size_t m_, n_;
  std::vector<double> diag_;   // used when dense_.size() == 0
  Matrix dense_;               // d x d when dense
  std::vector<double> linear_; // b, zero by default
};

// f(w) = 1/2 ||w||^2 + c * sum_i w_i^3. Smooth with a nonzero third
// derivative, so the SPSA remainder is O(rho^2) and actually visible;
// used for the rho-bias decay checks.
class CubicObjective : public DifferentiableObjective {
 public:
  CubicObjective(std::size_t m, std::size_t n, double c = 0.1)
      : m_(m), n_(n), c_(c) {}
  double eval(const ModelParams& W, const Batch& batch) const override;
  ModelParams exact_grad(const ModelParams& W, const Batch& batch) const override;
  ModelParams init_params(std::uint64_t seed) const override;

 private:
  std::size_t m_, n_;
  double c_;
};

enum class Activation { Tanh, Relu };

struct MlpSpec {
  std::vector<std::size_t> dims;  // input, hidden..., classes
  Activation act = Activation::Tanh;
  // Synthetic Gaussian cluster data: one cluster per class, means and
  // noise confined to an `intrinsic_dim`-dimensional subspace.
  std::size_t intrinsic_dim = 0;  // 0 = full input dimension
  double cluster_scale = 2.0;
  double noise = 0.5;
  std::size_t batch_size = 16;
  std::uint64_t data_seed = 1;
  // Block label per weight layer; defaults to one block per layer.
  std::vector<int> blocks;
};

// Cascade network X_l = act(W_l X_{l-1} + b_l), linear logits on the last
// layer, mean softmax cross-entropy over the batch.
class MlpObjective : public DifferentiableObjective {
 public:
  explicit MlpObjective(MlpSpec spec);

  double eval(const ModelParams& W, const Batch& batch) const override;
  ModelParams exact_grad(const ModelParams& W, const Batch& batch) const override;
  ModelParams init_params(std::uint64_t seed) const override;

  const MlpSpec& spec() const { return spec_; }
  // Inputs (dim x batch) and labels for a batch handle.
  void materialize_batch(const Batch& batch, Matrix& x, std::vector<std::size_t>& y) const;

 private:
  MlpSpec spec_;
  Matrix subspace_;  // input_dim x intrinsic_dim basis (scaled Gaussian)
  Matrix means_;     // intrinsic_dim x classes cluster centers
};

struct SpectrumReport {
  // spectra[t][layer] = top-k singular values of that layer's gradient.
  std::vector<std::vector<std::vector<double>>> spectra;
  // One steps x steps cosine matrix per layer, from normalized flattened
  // gradients. Rows for zero gradients are marked undefined.
  std::vector<Matrix> cosine;
  std::vector<std::vector<bool>> undefined_row;  // per layer, per step
};

// Oracle-gradient diagnostic mirroring the low-rank studies: run `steps`
// small gradient steps, record per-layer top-k singular values and the
// cross-step cosine (Gram) matrix of normalized gradients.
SpectrumReport gradient_spectrum(const DifferentiableObjective& obj,
                                 std::uint64_t base_seed, std::size_t steps,
                                 std::size_t topk, double eta = 0.05);

// Parse an objective spec string: "quad16", "quad8x4", "cubic16",
// "mlp:8-16-2". Throws std::invalid_argument on junk.
std::unique_ptr<DifferentiableObjective> make_objective(const std::string& spec);

}  // namespace tezo

#endif  // TEZO_OBJECTIVES_HPP
