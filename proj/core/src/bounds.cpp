// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/bounds.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "qccf/error.hpp"
#include "qccf/quantizer.hpp"
#include "qccf/rng.hpp"

namespace qccf {
namespace {

void check_premise(double eta, double smoothness, int steps) {
  if (!(2.0 * eta * eta * steps * steps * smoothness * smoothness < 1.0)) {
    throw Error(Errc::premise_violation, "2 eta^2 m^2 L^2 must be < 1");
  }
}

struct ToyClient {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  int size() const { return static_cast<int>(x.rows()); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    return x.transpose() * (x * theta - y) / size();
  }

  double loss(const Eigen::VectorXd& theta) const {
    return 0.5 * (x * theta - y).squaredNorm() / size();
  }

  // Exact variance of a without-replacement mini-batch gradient at theta.
  double batch_variance(const Eigen::VectorXd& theta, int batch) const {
    const Eigen::VectorXd resid = x * theta - y;
    const Eigen::MatrixXd per_sample = x.array().colwise() * resid.array();
    const Eigen::RowVectorXd mean = per_sample.colwise().mean();
    const double pop = (per_sample.rowwise() - mean).rowwise().squaredNorm().mean();
    const int d = size();
    if (batch >= d) return 0.0;
    return pop / batch * (d - batch) / (d - 1.0);
  }
};

}  // namespace

RoundBoundTerms theorem_round_terms(const BoundInputs& in) {
  check_premise(in.eta, in.smoothness, in.tau);
  if (!(in.eta > 0.0)) throw Error(Errc::invalid_config, "eta must be > 0");

  const std::size_t u = in.sizes.size();
  double total = 0.0;
  for (int s : in.sizes) total += s;

  const double eta = in.eta;
  const double l = in.smoothness;
  const double t = in.tau;
  const double denom = 1.0 - 2.0 * eta * eta * t * t * l * l;
  const double g_coeff = 2.0 * (2.0 * t * t * t - 3.0 * t * t + t) / 3.0;
  const double z = static_cast<double>(in.model_dim);

  RoundBoundTerms terms;
  terms.descent = 2.0 / eta * (in.loss_start - in.loss_end);
  for (const auto& round : in.rounds) {
    if (round.size() != u) throw Error(Errc::dimension_mismatch, "round vs sizes");
    double part = 0.0;
    for (std::size_t i = 0; i < u; ++i) {
      if (round[i].participate) part += in.sizes[i];
    }
    double wq = 0.0;
    double ws = 0.0;
    double wg = 0.0;
    for (std::size_t i = 0; i < u; ++i) {
      const auto& c = round[i];
      const double g2 = c.grad_bound * c.grad_bound;
      const double w = in.sizes[i] / total;
      terms.participation += 4.0 * t * (1.0 - (c.participate ? w : 0.0)) * g2;
      if (!c.participate || part == 0.0) continue;
      const double wn = in.sizes[i] / part;
      const double levels = std::exp2(c.bits) - 1.0;
      wq += wn * z * c.theta_max * c.theta_max / (4.0 * levels * levels);
      ws += wn * c.sigma2;
      wg += wn * g2;
    }
    terms.quantization += 0.5 * l * wq;
    terms.variance += eta * l * t * ws +
                      eta * eta * l * l * ((t * t - t) * ws + g_coeff * wg) / denom;
  }
  return terms;
}

double theorem_round_rhs(const BoundInputs& in) { return theorem_round_terms(in).total(); }

double lemma2_rhs(double eta, double smoothness, int m,
                  const std::vector<double>& weights,
                  const std::vector<double>& sigma2,
                  const std::vector<double>& grad_bound) {
  check_premise(eta, smoothness, m);
  double ws = 0.0;
  double wg = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ws += weights[i] * sigma2[i];
    wg += weights[i] * grad_bound[i] * grad_bound[i];
  }
  const double e2 = eta * eta;
  return (e2 * m * ws + 2.0 * e2 * m * m * wg) /
         (1.0 - 2.0 * e2 * m * m * smoothness * smoothness);
}

ToyHarnessReport run_bound_harness(const ToyHarnessConfig& cfg, double slack) {
  if (cfg.model_dim < 1 || cfg.clients < 1 || cfg.tau < 1 || cfg.rounds < 1 ||
      cfg.seeds < 1 || cfg.batch_size < 1 || cfg.batch_size > cfg.samples_per_client) {
    throw Error(Errc::invalid_config, "bad toy harness configuration");
  }
  const int z = cfg.model_dim;
  const int u = cfg.clients;
  const Rng root(cfg.seed);

  // Fixed data; the seeds below only drive batches and quantization.
  std::vector<ToyClient> clients(u);
  {
    Rng data = root.substream("data");
    for (auto& c : clients) {
      c.x.resize(cfg.samples_per_client, z);
      c.y.resize(cfg.samples_per_client);
      Eigen::VectorXd target(z);
      for (int j = 0; j < z; ++j) target(j) = data.normal();
      for (int r = 0; r < cfg.samples_per_client; ++r) {
        for (int j = 0; j < z; ++j) c.x(r, j) = data.normal();
      }
      c.y = c.x * target;
      for (int r = 0; r < cfg.samples_per_client; ++r) c.y(r) += 0.1 * data.normal();
    }
  }

  ToyHarnessReport report;
  for (const auto& c : clients) {
    const Eigen::MatrixXd h = c.x.transpose() * c.x / c.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    report.smoothness = std::max(report.smoothness, eig.eigenvalues().maxCoeff());
  }
  const double l = report.smoothness;
  check_premise(cfg.eta, l, cfg.tau);

  const std::vector<double> w(u, 1.0 / u);
  auto global_loss = [&](const Eigen::VectorXd& theta) {
    double f = 0.0;
    for (int i = 0; i < u; ++i) f += w[i] * clients[i].loss(theta);
    return f;
  };
  auto global_grad = [&](const Eigen::VectorXd& theta) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(z);
    for (int i = 0; i < u; ++i) g += w[i] * clients[i].gradient(theta);
    return g;
  };

  report.lemma_lhs.assign(cfg.tau + 1, 0.0);
  report.lemma_rhs.assign(cfg.tau + 1, 0.0);
  const double samples = static_cast<double>(cfg.seeds) * cfg.rounds;

  for (int s = 0; s < cfg.seeds; ++s) {
    Rng rng = root.substream(stream_label("seed", s));
    BoundInputs bound;
    bound.eta = cfg.eta;
    bound.smoothness = l;
    bound.tau = cfg.tau;
    bound.model_dim = static_cast<std::size_t>(z);
    bound.sizes.assign(u, cfg.samples_per_client);

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(z);
    bound.loss_start = global_loss(psi);

    for (int n = 0; n < cfg.rounds; ++n) {
      std::vector<Eigen::VectorXd> theta(u, psi);
      std::vector<double> g_bound(u, 0.0);
      std::vector<double> sigma2(u, 0.0);
      std::vector<double> drift(cfg.tau + 1, 0.0);

      for (int m = 0; m <= cfg.tau; ++m) {
        Eigen::VectorXd psi_m = Eigen::VectorXd::Zero(z);
        for (int i = 0; i < u; ++i) psi_m += w[i] * theta[i];
        for (int i = 0; i < u; ++i) {
          const auto& c = clients[i];
          g_bound[i] = std::max({g_bound[i], c.gradient(theta[i]).norm(),
                                 c.gradient(psi_m).norm()});
          sigma2[i] = std::max(sigma2[i], c.batch_variance(theta[i], cfg.batch_size));
          drift[m] += w[i] * (theta[i] - psi).squaredNorm();
        }
        if (m == cfg.tau) break;
        report.theorem_lhs += global_grad(psi_m).squaredNorm() / cfg.seeds;

        for (int i = 0; i < u; ++i) {
          const auto& c = clients[i];
          // Batch drawn without replacement by a partial shuffle.
          std::vector<int> idx(c.size());
          for (int r = 0; r < c.size(); ++r) idx[r] = r;
          Eigen::VectorXd g = Eigen::VectorXd::Zero(z);
          for (int b = 0; b < cfg.batch_size; ++b) {
            std::swap(idx[b], idx[rng.uniform_int(b, c.size() - 1)]);
            const int r = idx[b];
            g += c.x.row(r).transpose() * (c.x.row(r).dot(theta[i]) - c.y(r));
          }
          theta[i] -= cfg.eta * g / cfg.batch_size;
        }
      }

      for (int m = 0; m <= cfg.tau; ++m) {
        report.lemma_lhs[m] += drift[m] / samples;
        report.lemma_rhs[m] += lemma2_rhs(cfg.eta, l, m, w, sigma2, g_bound) / samples;
      }

      std::vector<ClientRoundBound> round(u);
      Eigen::VectorXd next = Eigen::VectorXd::Zero(z);
      for (int i = 0; i < u; ++i) {
        Rng qrng = rng.substream(stream_label("quant", i, "round", n));
        const auto qm = quantize({theta[i].data(), static_cast<std::size_t>(z)},
                                 cfg.bits, qrng);
        const auto deq = dequantize(qm);
        for (int j = 0; j < z; ++j) next(j) += w[i] * deq[j];
        round[i] = {true, g_bound[i], sigma2[i], qm.range(),
                    static_cast<double>(cfg.bits)};
      }
      bound.rounds.push_back(std::move(round));
      psi = next;
    }
    bound.loss_end = global_loss(psi);
    report.theorem_rhs += theorem_round_rhs(bound) / cfg.seeds;
  }

  report.lemma_holds = true;
  for (int m = 0; m <= cfg.tau; ++m) {
    if (report.lemma_lhs[m] > report.lemma_rhs[m] * (1.0 + slack)) {
      report.lemma_holds = false;
    }
  }
  report.theorem_holds = report.theorem_lhs <= report.theorem_rhs * (1.0 + slack);
  return report;
}

}  // namespace qccf
