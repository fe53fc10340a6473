// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Channel allocation search. A chromosome lists, per channel, the client
// holding it (or none); the participation vector follows from it. Fitness of
// a chromosome is (J_max - J)^iota within its generation, 0 if infeasible.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qccf/decision.hpp"
#include "qccf/rng.hpp"

namespace qccf {

inline constexpr int kNoClient = -1;

using Chromosome = std::vector<int>;

struct GaParams {
  int population = 40;
  int generations = 60;
  double crossover_prob = 0.8;
  double mutation_prob = 0.2;
  double fitness_exponent = 2.0;

  void validate() const;
};

/// What an allocation is worth once the inner (f, q) problem is solved.
struct AllocationValue {
  bool feasible = false;
  double objective = 0.0;
  RoundDecision decision;
};

using AllocationEvaluator = std::function<AllocationValue(const Chromosome&)>;

struct AllocationResult {
  Chromosome best;
  AllocationValue value;
  std::vector<double> best_per_generation;  // best-ever J after each generation
  int evaluations = 0;                      // distinct chromosomes priced
};

/// Keeps the first occurrence of each client and clears later duplicates.
void repair(Chromosome& chrom);

/// True when genes are in range and no client holds two channels.
bool is_valid(const Chromosome& chrom, int clients);

/// (j_max - j)^iota, 0 for infeasible chromosomes or j >= j_max.
double fitness(double j, double j_max, double iota, bool feasible = true);

/// Participation vector implied by a chromosome.
std::vector<std::uint8_t> participation_of(const Chromosome& chrom, int clients);

/// Genetic search. `seeds` (repaired) replace the first random members of the
/// initial population. When no feasible chromosome is ever found, the result
/// is the all-none chromosome priced by `eval`.
AllocationResult ga_allocate(int clients, int channels, const GaParams& params,
                             const AllocationEvaluator& eval, Rng& rng,
                             int workers = 1,
                             const std::vector<Chromosome>& seeds = {});

/// Enumerates every valid chromosome. Throws Error(instance_too_large) unless
/// clients <= 5 and channels <= 5.
AllocationResult exhaustive_allocate(int clients, int channels,
                                     const AllocationEvaluator& eval);

}  // namespace qccf
