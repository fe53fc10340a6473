// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/channel_ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qccf/error.hpp"
#include "qccf/parallel.hpp"

namespace qccf {
namespace {

class MemoEvaluator {
 public:
  MemoEvaluator(const AllocationEvaluator& eval, int workers)
      : eval_(eval), workers_(workers) {}

  // Prices every chromosome of `pop` not seen before; evaluation order does
  // not affect results because each value lands in its own slot.
  void prepare(const std::vector<Chromosome>& pop) {
    std::vector<const Chromosome*> fresh;
    for (const auto& c : pop) {
      if (cache_.find(c) != cache_.end()) continue;
      if (std::find_if(fresh.begin(), fresh.end(),
                       [&](const Chromosome* f) { return *f == c; }) != fresh.end()) {
        continue;
      }
      fresh.push_back(&c);
    }
    std::vector<AllocationValue> values(fresh.size());
    parallel_for(fresh.size(), workers_,
                 [&](std::size_t k) { values[k] = eval_(*fresh[k]); });
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      cache_.emplace(*fresh[k], std::move(values[k]));
    }
  }

  const AllocationValue& at(const Chromosome& c) const { return cache_.at(c); }
  int size() const { return static_cast<int>(cache_.size()); }

 private:
  const AllocationEvaluator& eval_;
  int workers_;
  std::map<Chromosome, AllocationValue> cache_;
};

Chromosome random_chromosome(int clients, int channels, Rng& rng) {
  Chromosome c(channels);
  for (auto& g : c) g = rng.uniform_int(kNoClient, clients - 1);
  repair(c);
  return c;
}

std::size_t roulette(const std::vector<double>& fit, double total, Rng& rng) {
  if (!(total > 0.0)) {
    return static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(fit.size()) - 1));
  }
  const double r = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < fit.size(); ++k) {
    acc += fit[k];
    if (r < acc) return k;
  }
  // Round-off can leave r just above the final partial sum.
  for (std::size_t k = fit.size(); k-- > 0;) {
    if (fit[k] > 0.0) return k;
  }
  return 0;
}

}  // namespace

void GaParams::validate() const {
  if (population < 4 || population % 2 != 0) {
    throw Error(Errc::invalid_config, "GA population must be even and >= 4");
  }
  if (generations < 0) throw Error(Errc::invalid_config, "GA generations must be >= 0");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0) ||
      !(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw Error(Errc::invalid_config, "GA probabilities must lie in [0, 1]");
  }
  if (!(fitness_exponent > 0.0)) {
    throw Error(Errc::invalid_config, "GA fitness exponent must be > 0");
  }
}

void repair(Chromosome& chrom) {
  for (std::size_t c = 0; c < chrom.size(); ++c) {
    if (chrom[c] == kNoClient) continue;
    for (std::size_t k = 0; k < c; ++k) {
      if (chrom[k] == chrom[c]) {
        chrom[c] = kNoClient;
        break;
      }
    }
  }
}

bool is_valid(const Chromosome& chrom, int clients) {
  std::vector<std::uint8_t> seen(clients, 0);
  for (int g : chrom) {
    if (g == kNoClient) continue;
    if (g < 0 || g >= clients || seen[g]) return false;
    seen[g] = 1;
  }
  return true;
}

double fitness(double j, double j_max, double iota, bool feasible) {
  if (!feasible || !(j < j_max)) return 0.0;
  return std::pow(j_max - j, iota);
}

std::vector<std::uint8_t> participation_of(const Chromosome& chrom, int clients) {
  std::vector<std::uint8_t> a(clients, 0);
  for (int g : chrom) {
    if (g != kNoClient) a[g] = 1;
  }
  return a;
}

AllocationResult ga_allocate(int clients, int channels, const GaParams& params,
                             const AllocationEvaluator& eval, Rng& rng,
                             int workers, const std::vector<Chromosome>& seeds) {
  params.validate();
  if (clients < 1 || channels < 1) {
    throw Error(Errc::invalid_config, "GA needs at least one client and one channel");
  }

  std::vector<Chromosome> pop;
  pop.reserve(params.population);
  for (const auto& s : seeds) {
    if (static_cast<int>(pop.size()) == params.population) break;
    Chromosome c = s;
    c.resize(channels, kNoClient);
    repair(c);
    pop.push_back(std::move(c));
  }
  while (static_cast<int>(pop.size()) < params.population) {
    pop.push_back(random_chromosome(clients, channels, rng));
  }

  MemoEvaluator memo(eval, workers);
  AllocationResult result;
  double best_j = std::numeric_limits<double>::infinity();
  bool have_best = false;

  std::vector<double> fit(pop.size());
  for (int gen = 0;; ++gen) {
    memo.prepare(pop);

    double j_max = -std::numeric_limits<double>::infinity();
    for (const auto& c : pop) {
      const auto& v = memo.at(c);
      if (!v.feasible) continue;
      j_max = std::max(j_max, v.objective);
      if (v.objective < best_j) {
        best_j = v.objective;
        result.best = c;
        have_best = true;
      }
    }
    result.best_per_generation.push_back(best_j);
    if (gen == params.generations) break;

    double total = 0.0;
    for (std::size_t k = 0; k < pop.size(); ++k) {
      const auto& v = memo.at(pop[k]);
      fit[k] = fitness(v.objective, j_max, params.fitness_exponent, v.feasible);
      total += fit[k];
    }

    std::vector<Chromosome> next;
    next.reserve(pop.size());
    if (have_best) next.push_back(result.best);
    while (next.size() < pop.size()) {
      Chromosome a = pop[roulette(fit, total, rng)];
      Chromosome b = pop[roulette(fit, total, rng)];
      if (channels > 1 && rng.uniform() < params.crossover_prob) {
        const int cut = rng.uniform_int(1, channels - 1);
        for (int c = cut; c < channels; ++c) std::swap(a[c], b[c]);
      }
      for (auto* child : {&a, &b}) {
        for (auto& g : *child) {
          if (rng.uniform() < params.mutation_prob) {
            g = rng.uniform_int(kNoClient, clients - 1);
          }
        }
        repair(*child);
        if (next.size() < pop.size()) next.push_back(std::move(*child));
      }
    }
    pop = std::move(next);
  }

  result.evaluations = memo.size();
  if (have_best) {
    result.value = memo.at(result.best);
  } else {
    result.best.assign(channels, kNoClient);
    result.value = eval(result.best);
  }
  return result;
}

AllocationResult exhaustive_allocate(int clients, int channels,
                                     const AllocationEvaluator& eval) {
  if (clients < 1 || channels < 1 || clients > 5 || channels > 5) {
    throw Error(Errc::instance_too_large,
                "exhaustive allocation is limited to 5 clients and 5 channels");
  }
  AllocationResult result;
  double best_j = std::numeric_limits<double>::infinity();
  Chromosome c(channels, kNoClient);
  while (true) {
    if (is_valid(c, clients)) {
      auto v = eval(c);
      ++result.evaluations;
      if (v.feasible && v.objective < best_j) {
        best_j = v.objective;
        result.best = c;
        result.value = std::move(v);
      }
    }
    // Odometer increment over {-1, 0, ..., clients - 1}^channels.
    int k = 0;
    while (k < channels && c[k] == clients - 1) c[k++] = kNoClient;
    if (k == channels) break;
    ++c[k];
  }
  if (result.best.empty()) {
    result.best.assign(channels, kNoClient);
    result.value = eval(result.best);
  }
  result.best_per_generation.push_back(best_j);
  return result;
}

}  // namespace qccf
