// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/fl_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qccf/error.hpp"

namespace qccf {
namespace {

using RowMatrix = FeatureMatrix;

void shuffle(std::vector<int>& v, Rng& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    std::swap(v[i], v[rng.uniform_int(0, i)]);
  }
}

std::vector<int> all_rows(int n) {
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

LocalStats smooth_stats(const LocalStats& prev, const LocalStats& fresh,
                        double factor) {
  LocalStats out;
  out.grad_norm_max = factor * prev.grad_norm_max + (1.0 - factor) * fresh.grad_norm_max;
  out.batch_variance = factor * prev.batch_variance + (1.0 - factor) * fresh.batch_variance;
  out.theta_max = fresh.theta_max;
  return out;
}

double LossModel::full_loss_and_gradient(const ModelVector& theta,
                                         const Dataset& data,
                                         ModelVector* grad) const {
  const auto rows = all_rows(data.size());
  return loss_and_gradient(theta, data, rows, grad);
}

// --- softmax regression ---------------------------------------------------

SoftmaxRegression::SoftmaxRegression(int features, int classes)
    : features_(features), classes_(classes) {
  if (features < 1 || classes < 2) {
    throw Error(Errc::invalid_config, "softmax model needs >= 1 feature and >= 2 classes");
  }
}

std::size_t SoftmaxRegression::dimension() const {
  return static_cast<std::size_t>(classes_) * features_ + classes_;
}

double SoftmaxRegression::batch_loss(const ModelVector& theta,
                                     const FeatureMatrix& x,
                                     std::span<const int> labels,
                                     ModelVector* grad) const {
  const Eigen::Map<const RowMatrix> w(theta.data(), classes_, features_);
  const auto bias = theta.tail(classes_);
  const auto n = static_cast<int>(x.rows());

  RowMatrix p = x * w.transpose();
  p.rowwise() += bias.transpose();

  double loss = 0.0;
  for (int r = 0; r < n; ++r) {
    const double top = p.row(r).maxCoeff();
    p.row(r).array() = (p.row(r).array() - top).exp();
    const double z = p.row(r).sum();
    loss += std::log(z) - std::log(p(r, labels[r]));
    p.row(r) /= z;
    p(r, labels[r]) -= 1.0;
  }
  if (grad != nullptr) {
    grad->resize(static_cast<Eigen::Index>(dimension()));
    Eigen::Map<RowMatrix> gw(grad->data(), classes_, features_);
    gw.noalias() = p.transpose() * x;
    gw /= n;
    grad->tail(classes_) = p.colwise().sum().transpose() / n;
  }
  return loss / n;
}

double SoftmaxRegression::loss_and_gradient(const ModelVector& theta,
                                            const Dataset& data,
                                            std::span<const int> rows,
                                            ModelVector* grad) const {
  if (static_cast<std::size_t>(theta.size()) != dimension() ||
      data.dim() != features_) {
    throw Error(Errc::dimension_mismatch, "model/data dimension mismatch");
  }
  if (rows.empty()) throw Error(Errc::invalid_dataset, "empty batch");
  if (static_cast<int>(rows.size()) == data.size()) {
    return batch_loss(theta, data.features, data.labels, grad);
  }
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), features_);
  std::vector<int> labels(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = data.features.row(rows[k]);
    labels[k] = data.labels[rows[k]];
  }
  return batch_loss(theta, x, labels, grad);
}

double SoftmaxRegression::accuracy(const ModelVector& theta,
                                   const Dataset& data) const {
  if (static_cast<std::size_t>(theta.size()) != dimension() ||
      data.dim() != features_) {
    throw Error(Errc::dimension_mismatch, "model/data dimension mismatch");
  }
  if (data.size() == 0) return 0.0;
  const Eigen::Map<const RowMatrix> w(theta.data(), classes_, features_);
  Eigen::MatrixXd logits = data.features * w.transpose();
  logits.rowwise() += theta.tail(classes_).transpose();
  int correct = 0;
  for (int r = 0; r < data.size(); ++r) {
    Eigen::Index arg = 0;
    logits.row(r).maxCoeff(&arg);
    if (arg == data.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

double QuadraticModel::loss_and_gradient(const ModelVector& theta, const Dataset&,
                                         std::span<const int>,
                                         ModelVector* grad) const {
  if (theta.size() != center_.size()) {
    throw Error(Errc::dimension_mismatch, "model/center dimension mismatch");
  }
  const ModelVector diff = theta - center_;
  if (grad != nullptr) *grad = diff;
  return 0.5 * diff.squaredNorm();
}

// --- data --------------------------------------------------------------------

SyntheticTask::SyntheticTask(int features, int classes, double separation,
                             Rng& rng)
    : means_(classes, features) {
  if (features < 1 || classes < 2) {
    throw Error(Errc::invalid_config, "synthetic task needs >= 1 feature and >= 2 classes");
  }
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j < features; ++j) means_(c, j) = rng.normal(0.0, separation);
  }
}

Dataset SyntheticTask::sample(int n, std::span<const int> classes, Rng& rng) const {
  if (classes.empty()) throw Error(Errc::invalid_config, "no classes to sample from");
  Dataset d;
  d.features.resize(n, features());
  d.labels.resize(n);
  const int k = static_cast<int>(classes.size());
  for (int r = 0; r < n; ++r) {
    const int label = classes[rng.uniform_int(0, k - 1)];
    d.labels[r] = label;
    for (int j = 0; j < features(); ++j) {
      d.features(r, j) = means_(label, j) + rng.normal();
    }
  }
  return d;
}

Dataset SyntheticTask::balanced(int n, Rng& rng) const {
  Dataset d;
  d.features.resize(n, features());
  d.labels.resize(n);
  for (int r = 0; r < n; ++r) {
    const int label = r % classes();
    d.labels[r] = label;
    for (int j = 0; j < features(); ++j) {
      d.features(r, j) = means_(label, j) + rng.normal();
    }
  }
  return d;
}

std::vector<int> sample_dataset_sizes(int clients, double mean, double std,
                                      Rng& rng) {
  if (!(mean > 0.0) || !(std >= 0.0)) {
    throw Error(Errc::invalid_config, "dataset size mean must be > 0 and std >= 0");
  }
  std::vector<int> sizes(clients);
  for (auto& s : sizes) {
    const double x = std::round(rng.normal(mean, std));
    s = static_cast<int>(std::max(1.0, x));
  }
  return sizes;
}

std::vector<Dataset> partition_data(const SyntheticTask& task,
                                    const PartitionSpec& spec, Rng& rng) {
  if (spec.classes_per_client < 1 || spec.classes_per_client > task.classes()) {
    throw Error(Errc::invalid_config, "classes_per_client must be in [1, classes]");
  }
  if (spec.num_clients < 1) throw Error(Errc::invalid_config, "need >= 1 client");
  Rng size_rng = rng.substream("sizes");
  const auto sizes =
      sample_dataset_sizes(spec.num_clients, spec.size_mean, spec.size_std, size_rng);

  std::vector<Dataset> out;
  out.reserve(spec.num_clients);
  for (int i = 0; i < spec.num_clients; ++i) {
    Rng client_rng = rng.substream(stream_label("client", i));
    std::vector<int> classes = all_rows(task.classes());
    if (spec.classes_per_client < task.classes()) {
      shuffle(classes, client_rng);
      classes.resize(spec.classes_per_client);
      std::sort(classes.begin(), classes.end());
    }
    Dataset d = task.sample(sizes[i], classes, client_rng);
    d.owner = i;
    out.push_back(std::move(d));
  }
  return out;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_dataset, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::invalid_dataset, "non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (values.size() < 2) throw Error(Errc::invalid_dataset, "row needs features and a label");
    if (width == 0) width = values.size();
    if (values.size() != width) throw Error(Errc::invalid_dataset, "ragged rows in " + path);
    labels.push_back(static_cast<int>(values.back()));
    values.pop_back();
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(Errc::invalid_dataset, "empty dataset " + path);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
    }
  }
  d.labels = std::move(labels);
  return d;
}

// --- training ---------------------------------------------------------------

int batch_size_for(int dataset_size, int epochs, int updates) {
  const long long work = static_cast<long long>(dataset_size) * epochs;
  return static_cast<int>(std::min<long long>(dataset_size, (work + updates - 1) / updates));
}

LocalResult local_update(const LossModel& loss, const ModelVector& model,
                         const Dataset& data, double eta, int updates,
                         int batch_size, Rng& rng) {
  if (data.size() == 0) throw Error(Errc::invalid_dataset, "empty dataset");
  if (updates < 1 || batch_size < 1 || batch_size > data.size()) {
    throw Error(Errc::invalid_config, "need updates >= 1 and 1 <= batch <= D");
  }

  LocalResult out{model, {}};
  std::vector<int> perm = all_rows(data.size());
  std::size_t cursor = perm.size();
  std::vector<ModelVector> grads(updates);

  for (int m = 0; m < updates; ++m) {
    if (cursor == perm.size()) {
      if (batch_size < data.size()) shuffle(perm, rng);
      cursor = 0;
    }
    const std::size_t take = std::min<std::size_t>(batch_size, perm.size() - cursor);
    const std::span<const int> rows(perm.data() + cursor, take);
    cursor += take;
    loss.loss_and_gradient(out.model, data, rows, &grads[m]);
    out.stats.grad_norm_max = std::max(out.stats.grad_norm_max, grads[m].norm());
    out.model -= eta * grads[m];
  }

  ModelVector mean = ModelVector::Zero(model.size());
  for (const auto& g : grads) mean += g;
  mean /= updates;
  double var = 0.0;
  for (const auto& g : grads) var += (g - mean).squaredNorm();
  out.stats.batch_variance = var / updates;
  out.stats.theta_max = out.model.cwiseAbs().maxCoeff();
  return out;
}

ModelVector aggregate(std::span<const QuantizedModel> uploads,
                      std::span<const int> sizes) {
  if (uploads.size() != sizes.size()) {
    throw Error(Errc::dimension_mismatch, "uploads vs sizes");
  }
  if (uploads.empty()) throw Error(Errc::empty_round, "no participants to aggregate");
  double total = 0.0;
  for (int s : sizes) total += s;
  ModelVector out = ModelVector::Zero(static_cast<Eigen::Index>(uploads[0].size()));
  for (std::size_t k = 0; k < uploads.size(); ++k) {
    if (uploads[k].size() != uploads[0].size()) {
      throw Error(Errc::dimension_mismatch, "uploads differ in dimension");
    }
    const double w = sizes[k] / total;
    const auto v = dequantize(uploads[k]);
    out += w * Eigen::Map<const ModelVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return out;
}

ModelVector aggregate_models(std::span<const ModelVector> uploads,
                             std::span<const int> sizes) {
  if (uploads.size() != sizes.size()) {
    throw Error(Errc::dimension_mismatch, "uploads vs sizes");
  }
  if (uploads.empty()) throw Error(Errc::empty_round, "no participants to aggregate");
  double total = 0.0;
  for (int s : sizes) total += s;
  ModelVector out = ModelVector::Zero(uploads[0].size());
  for (std::size_t k = 0; k < uploads.size(); ++k) {
    if (uploads[k].size() != out.size()) {
      throw Error(Errc::dimension_mismatch, "uploads differ in dimension");
    }
    out += (sizes[k] / total) * uploads[k];
  }
  return out;
}

Evaluation evaluate(const LossModel& loss, const ModelVector& model,
                    const Dataset& test) {
  if (test.size() == 0) throw Error(Errc::invalid_dataset, "empty test set");
  return {loss.full_loss_and_gradient(model, test, nullptr),
          loss.accuracy(model, test)};
}

}  // namespace qccf
