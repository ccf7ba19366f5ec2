#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leaddrift/dataset.hpp"

namespace leaddrift {

struct TrainConfig {
  int batch_size = 512;
  int epochs = 25;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ModelMeta {
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  int epochs = 0;
  int batch_size = 0;
};

// Per-layer weight/bias gradients, same shapes as MlpModel::w / ::b.
struct MlpGradients {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
};

// Dense net: input -> ReLU hidden x2 -> linear scalar output. Inputs are
// expected in the model's standardized space; the raw output is the risk
// score and is intentionally not clamped to [0,1].
class MlpModel {
 public:
  // Xavier-uniform weights from the given seed, zero biases.
  static MlpModel init(std::uint64_t seed, int inputs, int hidden1, int hidden2);

  double forward(std::span<const double> x) const;
  std::vector<double> forward_all(const FeatureMatrix& standardized) const;

  // Minibatch Adam on MSE against the binary labels; batches reshuffled each
  // epoch from the config seed. Returns the per-epoch training MSE history.
  // Throws TrainingError (with the epoch index) if the loss goes non-finite.
  std::vector<double> train(const FeatureMatrix& x_standardized,
                            std::span<const std::uint8_t> y,
                            const TrainConfig& config);

  // Full-batch MSE and its gradients; shared by training and the
  // finite-difference checks in the test suite.
  double mse(const FeatureMatrix& x, std::span<const std::uint8_t> y) const;
  double mse_and_gradients(const FeatureMatrix& x,
                           std::span<const std::uint8_t> y,
                           MlpGradients* grads) const;

  void save(const std::string& path) const;
  static MlpModel load(const std::string& path);

  const std::vector<int>& layers() const { return layers_; }
  int input_size() const { return layers_.front(); }
  std::size_t parameter_count() const;

  // Layer l maps layers_[l] -> layers_[l+1]; w[l] is row-major
  // [out x in], b[l] is [out]. Public by design: tests and the
  // explainer's synthetic fixtures build models directly.
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
  Standardizer standardizer{};
  ModelMeta meta{};

  explicit MlpModel(std::vector<int> layers);
  MlpModel() = default;

 private:
  std::vector<int> layers_;

  MlpGradients zero_gradients() const;
  void accumulate_sample(std::span<const double> x, double target,
                         double inv_batch, MlpGradients* grads,
                         double* sq_err,
                         std::vector<std::vector<double>>* acts,
                         std::vector<std::vector<double>>* deltas) const;
};

}  // namespace leaddrift
