#include "leaddrift/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "leaddrift/errors.hpp"
#include "leaddrift/rng.hpp"

namespace leaddrift {

using json = nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
}

MlpModel::MlpModel(std::vector<int> layers) : layers_(std::move(layers)) {
  if (layers_.size() != 4)
    throw ConfigError("model must have exactly two hidden layers");
  for (const int width : layers_)
    if (width < 1) throw ConfigError("layer sizes must be >= 1");
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    w.emplace_back(static_cast<std::size_t>(layers_[l + 1]) *
                       static_cast<std::size_t>(layers_[l]),
                   0.0);
    b.emplace_back(static_cast<std::size_t>(layers_[l + 1]), 0.0);
  }
}

MlpModel MlpModel::init(std::uint64_t seed, int inputs, int hidden1,
                        int hidden2) {
  MlpModel model(std::vector<int>{inputs, hidden1, hidden2, 1});
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < model.layers_.size(); ++l) {
    const int fan_in = model.layers_[l];
    const int fan_out = model.layers_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : model.w[l]) v = rng.uniform(-limit, limit);
  }
  model.meta.seed = seed;
  return model;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
  return n;
}

double MlpModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != layers_.front())
    throw DataError("feature vector size does not match model input");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const auto out_n = static_cast<std::size_t>(layers_[l + 1]);
    const auto in_n = static_cast<std::size_t>(layers_[l]);
    next.assign(out_n, 0.0);
    for (std::size_t o = 0; o < out_n; ++o) {
      double acc = b[l][o];
      const double* wrow = &w[l][o * in_n];
      for (std::size_t i = 0; i < in_n; ++i) acc += wrow[i] * cur[i];
      // ReLU on hidden layers, identity on the output.
      next[o] = (l + 1 < w.size()) ? std::max(acc, 0.0) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

std::vector<double> MlpModel::forward_all(
    const FeatureMatrix& standardized) const {
  std::vector<double> out;
  out.reserve(standardized.size());
  for (const FeatureRow& row : standardized.rows)
    out.push_back(forward(std::span<const double>(row.data(), row.size())));
  return out;
}

MlpGradients MlpModel::zero_gradients() const {
  MlpGradients g;
  for (std::size_t l = 0; l < w.size(); ++l) {
    g.w.emplace_back(w[l].size(), 0.0);
    g.b.emplace_back(b[l].size(), 0.0);
  }
  return g;
}

// One forward/backward pass. dL/dpred = 2 * err * inv_batch, matching a
// batch-mean MSE. acts/deltas are caller-owned scratch to avoid per-sample
// allocation in the hot loop.
void MlpModel::accumulate_sample(
    std::span<const double> x, double target, double inv_batch,
    MlpGradients* grads, double* sq_err,
    std::vector<std::vector<double>>* acts,
    std::vector<std::vector<double>>* deltas) const {
  const std::size_t n_layers = w.size();
  acts->resize(n_layers + 1);
  deltas->resize(n_layers);
  (*acts)[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto out_n = static_cast<std::size_t>(layers_[l + 1]);
    const auto in_n = static_cast<std::size_t>(layers_[l]);
    (*acts)[l + 1].assign(out_n, 0.0);
    for (std::size_t o = 0; o < out_n; ++o) {
      double acc = b[l][o];
      const double* wrow = &w[l][o * in_n];
      const double* in = (*acts)[l].data();
      for (std::size_t i = 0; i < in_n; ++i) acc += wrow[i] * in[i];
      (*acts)[l + 1][o] = (l + 1 < n_layers) ? std::max(acc, 0.0) : acc;
    }
  }

  const double pred = (*acts)[n_layers][0];
  const double err = pred - target;
  *sq_err += err * err;

  (*deltas)[n_layers - 1].assign(1, 2.0 * err * inv_batch);
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto out_n = static_cast<std::size_t>(layers_[l + 1]);
    const auto in_n = static_cast<std::size_t>(layers_[l]);
    const std::vector<double>& delta = (*deltas)[l];
    const std::vector<double>& input = (*acts)[l];
    for (std::size_t o = 0; o < out_n; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      grads->b[l][o] += d;
      double* grow = &grads->w[l][o * in_n];
      for (std::size_t i = 0; i < in_n; ++i) grow[i] += d * input[i];
    }
    if (l == 0) break;
    std::vector<double>& prev_delta = (*deltas)[l - 1];
    prev_delta.assign(in_n, 0.0);
    for (std::size_t o = 0; o < out_n; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* wrow = &w[l][o * in_n];
      for (std::size_t i = 0; i < in_n; ++i) prev_delta[i] += d * wrow[i];
    }
    // ReLU gate: gradient flows only through active units.
    for (std::size_t i = 0; i < in_n; ++i)
      if ((*acts)[l][i] <= 0.0) prev_delta[i] = 0.0;
  }
}

double MlpModel::mse(const FeatureMatrix& x,
                     std::span<const std::uint8_t> y) const {
  if (x.size() != y.size() || x.rows.empty())
    throw DataError("feature/label size mismatch or empty data");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double err =
        forward(std::span<const double>(x.rows[i].data(), x.rows[i].size())) -
        static_cast<double>(y[i]);
    sq += err * err;
  }
  return sq / static_cast<double>(x.size());
}

double MlpModel::mse_and_gradients(const FeatureMatrix& x,
                                   std::span<const std::uint8_t> y,
                                   MlpGradients* grads) const {
  if (x.size() != y.size() || x.rows.empty())
    throw DataError("feature/label size mismatch or empty data");
  *grads = zero_gradients();
  std::vector<std::vector<double>> acts, deltas;
  double sq = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    accumulate_sample(
        std::span<const double>(x.rows[i].data(), x.rows[i].size()),
        static_cast<double>(y[i]), inv_n, grads, &sq, &acts, &deltas);
  return sq * inv_n;
}

std::vector<double> MlpModel::train(const FeatureMatrix& x_standardized,
                                    std::span<const std::uint8_t> y,
                                    const TrainConfig& config) {
  config.validate();
  const std::size_t n = x_standardized.size();
  if (n != y.size() || n == 0)
    throw DataError("feature/label size mismatch or empty training data");

  Rng rng(config.seed);
  MlpGradients grads = zero_gradients();
  MlpGradients m = zero_gradients();
  MlpGradients v = zero_gradients();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> acts, deltas;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.epochs));

  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sq = 0.0;
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (auto& gw : grads.w) std::fill(gw.begin(), gw.end(), 0.0);
      for (auto& gb : grads.b) std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const FeatureRow& row = x_standardized.rows[order[k]];
        accumulate_sample(std::span<const double>(row.data(), row.size()),
                          static_cast<double>(y[order[k]]), inv_batch, &grads,
                          &epoch_sq, &acts, &deltas);
      }
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < w.size(); ++l) {
        for (std::size_t i = 0; i < w[l].size(); ++i) {
          const double g = grads.w[l][i];
          m.w[l][i] = config.beta1 * m.w[l][i] + (1 - config.beta1) * g;
          v.w[l][i] = config.beta2 * v.w[l][i] + (1 - config.beta2) * g * g;
          w[l][i] -= config.learning_rate * (m.w[l][i] / bc1) /
                     (std::sqrt(v.w[l][i] / bc2) + config.adam_eps);
        }
        for (std::size_t i = 0; i < b[l].size(); ++i) {
          const double g = grads.b[l][i];
          m.b[l][i] = config.beta1 * m.b[l][i] + (1 - config.beta1) * g;
          v.b[l][i] = config.beta2 * v.b[l][i] + (1 - config.beta2) * g * g;
          b[l][i] -= config.learning_rate * (m.b[l][i] / bc1) /
                     (std::sqrt(v.b[l][i] / bc2) + config.adam_eps);
        }
      }
    }
    const double epoch_mse = epoch_sq / static_cast<double>(n);
    if (!std::isfinite(epoch_mse))
      throw TrainingError("training loss became non-finite", epoch);
    history.push_back(epoch_mse);
  }

  meta.epochs = config.epochs;
  meta.batch_size = config.batch_size;
  return history;
}

void MlpModel::save(const std::string& path) const {
  json doc;
  doc["version"] = 1;
  doc["layers"] = layers_;
  doc["weights"] = w;
  doc["biases"] = b;
  doc["standardizer"] = {
      {"mean", std::vector<double>(standardizer.mean.begin(),
                                   standardizer.mean.end())},
      {"std",
       std::vector<double>(standardizer.std.begin(), standardizer.std.end())}};
  doc["meta"] = {{"H", meta.horizon},
                 {"seed", meta.seed},
                 {"epochs", meta.epochs},
                 {"batch_size", meta.batch_size}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

MlpModel MlpModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError("bad model JSON in " + path + ": " + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != 1)
      throw DataError("unsupported model file version " +
                      std::to_string(version) + " (expected 1)");
    MlpModel model(doc.at("layers").get<std::vector<int>>());
    auto weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    auto biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    if (weights.size() != model.w.size() || biases.size() != model.b.size())
      throw DataError("model layer count mismatch in " + path);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].size() != model.w[l].size() ||
          biases[l].size() != model.b[l].size())
        throw DataError("model layer shape mismatch in " + path);
      model.w[l] = std::move(weights[l]);
      model.b[l] = std::move(biases[l]);
    }
    const auto mean = doc.at("standardizer").at("mean").get<std::vector<double>>();
    const auto sdev = doc.at("standardizer").at("std").get<std::vector<double>>();
    if (static_cast<int>(mean.size()) != model.input_size() ||
        static_cast<int>(sdev.size()) != model.input_size())
      throw DataError("standardizer size mismatch in " + path);
    std::copy(mean.begin(), mean.end(), model.standardizer.mean.begin());
    std::copy(sdev.begin(), sdev.end(), model.standardizer.std.begin());
    const json& meta = doc.at("meta");
    model.meta.horizon = meta.at("H").get<std::int64_t>();
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.epochs = meta.at("epochs").get<int>();
    model.meta.batch_size = meta.at("batch_size").get<int>();
    return model;
  } catch (const json::exception& e) {
    throw DataError("bad model schema in " + path + ": " + e.what());
  }
}

}  // namespace leaddrift
