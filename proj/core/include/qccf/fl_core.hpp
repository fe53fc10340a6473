// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Learning substrate: synthetic non-IID client data, local mini-batch SGD,
// size-weighted aggregation and evaluation.

#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qccf/quantizer.hpp"
#include "qccf/rng.hpp"

namespace qccf {

using ModelVector = Eigen::VectorXd;
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix features;
  std::vector<int> labels;
  int owner = -1;

  int size() const noexcept { return static_cast<int>(labels.size()); }
  int dim() const noexcept { return static_cast<int>(features.cols()); }
};

/// Per-client statistics the server prices clients with.
struct LocalStats {
  double grad_norm_max = 0.0;   // max mini-batch gradient norm seen
  double batch_variance = 0.0;  // mean squared deviation of batch gradients
  double theta_max = 0.0;       // max |entry| of the uploaded model
};

/// Exponential smoothing of the gradient statistics; theta_max is replaced.
LocalStats smooth_stats(const LocalStats& prev, const LocalStats& fresh,
                        double factor = 0.5);

class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual std::size_t dimension() const = 0;

  /// Mean loss over `rows` of `data`; fills `grad` (resized) when non-null.
  virtual double loss_and_gradient(const ModelVector& theta, const Dataset& data,
                                   std::span<const int> rows,
                                   ModelVector* grad) const = 0;

  /// Same over every row.
  double full_loss_and_gradient(const ModelVector& theta, const Dataset& data,
                                ModelVector* grad) const;

  /// Fraction of rows predicted correctly (0 if the model has no classes).
  virtual double accuracy(const ModelVector& theta, const Dataset& data) const = 0;
};

/// Multinomial logistic regression. Parameters are laid out as a row-major
/// classes x features weight block followed by one bias per class.
class SoftmaxRegression final : public LossModel {
 public:
  SoftmaxRegression(int features, int classes);

  std::size_t dimension() const override;
  double loss_and_gradient(const ModelVector& theta, const Dataset& data,
                           std::span<const int> rows,
                           ModelVector* grad) const override;
  double accuracy(const ModelVector& theta, const Dataset& data) const override;

  int features() const noexcept { return features_; }
  int classes() const noexcept { return classes_; }

 private:
  double batch_loss(const ModelVector& theta, const FeatureMatrix& x,
                    std::span<const int> labels, ModelVector* grad) const;

  int features_;
  int classes_;
};

/// F(theta) = 0.5 * ||theta - center||^2, independent of the data. Test hook.
class QuadraticModel final : public LossModel {
 public:
  explicit QuadraticModel(ModelVector center) : center_(std::move(center)) {}

  std::size_t dimension() const override { return center_.size(); }
  double loss_and_gradient(const ModelVector& theta, const Dataset& data,
                           std::span<const int> rows,
                           ModelVector* grad) const override;
  double accuracy(const ModelVector&, const Dataset&) const override { return 0.0; }

 private:
  ModelVector center_;
};

/// Gaussian class clusters: class c has mean mu_c with N(0, separation^2)
/// entries; samples add unit-variance isotropic noise.
class SyntheticTask {
 public:
  SyntheticTask(int features, int classes, double separation, Rng& rng);

  int features() const noexcept { return static_cast<int>(means_.cols()); }
  int classes() const noexcept { return static_cast<int>(means_.rows()); }

  /// n samples with labels drawn uniformly from `classes`.
  Dataset sample(int n, std::span<const int> classes, Rng& rng) const;
  /// n samples cycling through all classes in order (balanced).
  Dataset balanced(int n, Rng& rng) const;

 private:
  FeatureMatrix means_;
};

struct PartitionSpec {
  int num_clients = 10;
  double size_mean = 1200.0;
  double size_std = 300.0;
  int classes_per_client = 3;
};

/// D_i ~ N(mean, std^2), rounded and clipped to >= 1.
std::vector<int> sample_dataset_sizes(int clients, double mean, double std,
                                      Rng& rng);

/// Label-skew partition: each client sees `classes_per_client` classes.
/// Throws Error(invalid_config) when that exceeds the task's class count.
std::vector<Dataset> partition_data(const SyntheticTask& task,
                                    const PartitionSpec& spec, Rng& rng);

/// Rows of "f1,...,fk,label". Throws Error(invalid_dataset) on bad input.
Dataset load_csv_dataset(const std::string& path);

/// Mini-batch size that makes `updates` steps cover `epochs` passes.
int batch_size_for(int dataset_size, int epochs, int updates);

struct LocalResult {
  ModelVector model;
  LocalStats stats;
};

/// `updates` SGD steps with learning rate eta. Batches walk a shuffled
/// permutation without replacement and reshuffle once it is exhausted.
LocalResult local_update(const LossModel& loss, const ModelVector& model,
                         const Dataset& data, double eta, int updates,
                         int batch_size, Rng& rng);

/// Size-weighted mean of dequantized uploads. Throws Error(empty_round)
/// without participants.
ModelVector aggregate(std::span<const QuantizedModel> uploads,
                      std::span<const int> sizes);
/// Same for unquantized uploads.
ModelVector aggregate_models(std::span<const ModelVector> uploads,
                             std::span<const int> sizes);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const LossModel& loss, const ModelVector& model,
                    const Dataset& test);

}  // namespace qccf
