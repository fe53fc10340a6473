// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include "qccf/simctl.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "qccf/error.hpp"
#include "qccf/parallel.hpp"

namespace qccf {
namespace {

namespace pt = boost::property_tree;
using json = nlohmann::json;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"policy", "rounds", "seed", "output_dir"}},
      {"data",
       {"features", "classes", "class_separation", "classes_per_client", "test_size",
        "init_std"}},
      {"clients",
       {"count", "size_mean", "size_std", "distance_min_m", "distance_max_m",
        "cycles_per_sample", "energy_coeff", "f_min_hz", "f_max_hz", "local_epochs",
        "local_updates"}},
      {"wireless",
       {"bandwidth_hz", "tx_power_dbm", "tx_power_w", "noise_psd_dbm_hz", "rician_k",
        "rician_zeta", "device_gain_db", "carrier_freq_hz", "channels"}},
      {"learning",
       {"eta", "smoothness", "v", "t_max_s", "q_init", "eps1", "eps2", "eps1_scale", "reference_bits",
        "eps2_scale", "stats_smoothing"}},
      {"ga",
       {"population", "generations", "crossover_prob", "mutation_prob",
        "fitness_exponent"}},
      {"principle", {"base", "slope", "span"}},
      {"sweep", {"v_values"}},
      {"bounds",
       {"model_dim", "clients", "tau", "rounds", "samples_per_client", "batch_size",
        "bits", "eta", "seeds", "seed"}},
  };
  return keys;
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& out) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return;
  std::istringstream in(*node);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw Error(Errc::invalid_config, fmt::format("bad value '{}' for {}", *node, key));
  }
  out = value;
}

template <>
void read(const pt::ptree& tree, const std::string& key, std::string& out) {
  if (const auto node = tree.get_optional<std::string>(key)) out = *node;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::istringstream cell(item);
    double v = 0.0;
    cell >> v;
    if (cell.fail() || !(cell >> std::ws).eof()) {
      throw Error(Errc::invalid_config, fmt::format("bad list entry '{}' in {}", item, key));
    }
    out.push_back(v);
  }
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::invalid_config, what);
}

void check_finite(double x, int round, const char* what) {
  if (!std::isfinite(x)) {
    throw Error(Errc::runtime_abort,
                fmt::format("non-finite {} in round {}", what, round));
  }
}

PolicyConfig policy_config(const ExperimentConfig& cfg,
                           const std::vector<ClientProfile>& profiles, int workers) {
  PolicyConfig pc;
  pc.wireless = cfg.wireless;
  pc.profiles = profiles;
  pc.lyapunov.eta = cfg.eta;
  pc.lyapunov.smoothness = cfg.smoothness;
  pc.lyapunov.tau = cfg.profile.local_updates;
  pc.lyapunov.tau_e = cfg.profile.local_epochs;
  pc.lyapunov.v = cfg.v;
  pc.model_dim = cfg.model_dim();
  pc.t_max = cfg.t_max;
  pc.total_rounds = cfg.rounds;
  pc.ga = cfg.ga;
  pc.principle = cfg.principle;
  pc.workers = workers;
  return pc;
}

json summary_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  json j;
  j["policy"] = r.policy;
  j["seed"] = r.seed;
  j["rounds"] = cfg.rounds;
  j["clients"] = cfg.num_clients;
  j["channels"] = cfg.wireless.num_channels;
  j["model_dim"] = cfg.model_dim();
  j["v"] = cfg.v;
  j["t_max_s"] = cfg.t_max;
  j["eps1"] = r.eps1;
  j["eps2"] = r.eps2;
  j["reference_arrival1"] = r.reference_arrival1;
  j["reference_arrival2"] = r.reference_arrival2;
  j["dataset_sizes"] = r.sizes;
  j["distances_m"] = r.distances_m;
  j["total_energy_j"] = r.total_energy;
  j["final_loss"] = r.final_loss;
  j["final_accuracy"] = r.final_accuracy;
  if (!r.rounds.empty()) {
    j["final_lambda1"] = r.rounds.back().lambda1;
    j["final_lambda2"] = r.rounds.back().lambda2;
  }
  double parts = 0.0;
  for (std::size_t n = 1; n < r.rounds.size(); ++n) parts += r.rounds[n].participants;
  j["mean_participants"] = r.rounds.size() > 1 ? parts / (r.rounds.size() - 1) : 0.0;
  return j;
}

std::string diagnostics_jsonl(const ExperimentResult& r) {
  std::string out;
  for (std::size_t n = 1; n < r.rounds.size(); ++n) {
    const auto& row = r.rounds[n];
    json j;
    j["n"] = row.round;
    j["arrival1"] = row.arrival1;
    j["arrival2"] = row.arrival2;
    j["participants"] = row.participants;
    j["ga_evaluations"] = row.ga_evaluations;
    j["ga_best"] = row.ga_best;
    std::vector<std::string> tags;
    std::vector<double> j3;
    for (const auto& c : row.clients) {
      tags.emplace_back(c.scheduled ? to_string(c.tag) : "-");
      j3.push_back(c.j3);
    }
    j["cases"] = tags;
    j["j3"] = j3;
    std::vector<double> g, s2, th;
    for (const auto& st : row.stats) {
      g.push_back(st.grad_norm_max);
      s2.push_back(st.batch_variance);
      th.push_back(st.theta_max);
    }
    j["grad_norm"] = g;
    j["batch_variance"] = s2;
    j["theta_max"] = th;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::runtime_abort, "cannot write " + path.string());
  out << text;
}

}  // namespace

void ExperimentConfig::validate() const {
  parse_policy(policy);
  require(rounds >= 0, "rounds must be >= 0");
  require(features >= 1 && classes >= 2, "need features >= 1 and classes >= 2");
  require(classes_per_client >= 1 && classes_per_client <= classes,
          "classes_per_client must lie in [1, classes]");
  require(test_size >= 1, "test_size must be >= 1");
  require(init_std >= 0.0, "init_std must be >= 0");
  require(num_clients >= 1, "need at least one client");
  require(size_mean >= 1.0 && size_std >= 0.0, "bad dataset size distribution");
  require(distance_min_m > 0.0 && distance_max_m >= distance_min_m,
          "bad distance range");
  require(t_max > 0.0, "t_max_s must be > 0");
  require(q_init >= 1 && q_init <= kMaxQuantizationBits, "q_init must lie in [1, 32]");
  require(reference_bits >= 1 && reference_bits <= kMaxQuantizationBits,
          "reference_bits must lie in [1, 32]");
  require(eps1_scale >= 0.0 && eps2_scale >= 0.0, "eps scales must be >= 0");
  require(stats_smoothing > 0.0 && stats_smoothing <= 1.0,
          "stats_smoothing must lie in (0, 1]");
  require(!eps1 || *eps1 >= 0.0, "eps1 must be >= 0");
  require(!eps2 || *eps2 >= 0.0, "eps2 must be >= 0");
  require(principle.span >= 0.0, "principle span must be >= 0");
  ClientProfile p = profile;
  p.dataset_size = static_cast<int>(std::max(1.0, size_mean));
  p.validate();
  wireless.validate();
  ga.validate();
  LyapunovParams lp;
  lp.eta = eta;
  lp.smoothness = smoothness;
  lp.tau = profile.local_updates;
  lp.tau_e = profile.local_epochs;
  lp.v = v;
  lp.validate();
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::invalid_config, e.what());
  }
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) {
      throw Error(Errc::invalid_config, fmt::format("unknown section [{}]", section));
    }
    if (body.empty() && !body.data().empty()) {
      throw Error(Errc::invalid_config, fmt::format("key '{}' outside a section", section));
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw Error(Errc::invalid_config, fmt::format("unknown key {}.{}", section, key));
      }
    }
  }

  ExperimentConfig c;
  read(tree, "run.policy", c.policy);
  read(tree, "run.rounds", c.rounds);
  read(tree, "run.seed", c.seed);
  read(tree, "run.output_dir", c.output_dir);

  read(tree, "data.features", c.features);
  read(tree, "data.classes", c.classes);
  read(tree, "data.class_separation", c.class_separation);
  read(tree, "data.classes_per_client", c.classes_per_client);
  read(tree, "data.test_size", c.test_size);
  read(tree, "data.init_std", c.init_std);

  read(tree, "clients.count", c.num_clients);
  read(tree, "clients.size_mean", c.size_mean);
  read(tree, "clients.size_std", c.size_std);
  read(tree, "clients.distance_min_m", c.distance_min_m);
  read(tree, "clients.distance_max_m", c.distance_max_m);
  read(tree, "clients.cycles_per_sample", c.profile.cycles_per_sample);
  read(tree, "clients.energy_coeff", c.profile.energy_coeff);
  read(tree, "clients.f_min_hz", c.profile.f_min_hz);
  read(tree, "clients.f_max_hz", c.profile.f_max_hz);
  read(tree, "clients.local_epochs", c.profile.local_epochs);
  read(tree, "clients.local_updates", c.profile.local_updates);

  read(tree, "wireless.bandwidth_hz", c.wireless.bandwidth_hz);
  if (tree.get_optional<std::string>("wireless.tx_power_dbm") &&
      tree.get_optional<std::string>("wireless.tx_power_w")) {
    throw Error(Errc::invalid_config, "set tx_power_dbm or tx_power_w, not both");
  }
  read(tree, "wireless.tx_power_w", c.wireless.tx_power_w);
  if (tree.get_optional<std::string>("wireless.tx_power_dbm")) {
    double dbm = 0.0;
    read(tree, "wireless.tx_power_dbm", dbm);
    c.wireless.tx_power_w = db_to_linear(dbm) * 1e-3;
  }
  if (tree.get_optional<std::string>("wireless.noise_psd_dbm_hz")) {
    double dbm = 0.0;
    read(tree, "wireless.noise_psd_dbm_hz", dbm);
    c.wireless.noise_psd_w_per_hz = dbm_per_hz_to_watt_per_hz(dbm);
  }
  read(tree, "wireless.rician_k", c.wireless.rician_k);
  read(tree, "wireless.rician_zeta", c.wireless.rician_zeta);
  read(tree, "wireless.device_gain_db", c.wireless.device_gain_db);
  read(tree, "wireless.carrier_freq_hz", c.wireless.carrier_freq_hz);
  read(tree, "wireless.channels", c.wireless.num_channels);

  read(tree, "learning.eta", c.eta);
  read(tree, "learning.smoothness", c.smoothness);
  read(tree, "learning.v", c.v);
  read(tree, "learning.t_max_s", c.t_max);
  read(tree, "learning.q_init", c.q_init);
  read(tree, "learning.reference_bits", c.reference_bits);
  if (tree.get_optional<std::string>("learning.eps1")) {
    double e = 0.0;
    read(tree, "learning.eps1", e);
    c.eps1 = e;
  }
  if (tree.get_optional<std::string>("learning.eps2")) {
    double e = 0.0;
    read(tree, "learning.eps2", e);
    c.eps2 = e;
  }
  read(tree, "learning.eps1_scale", c.eps1_scale);
  read(tree, "learning.eps2_scale", c.eps2_scale);
  read(tree, "learning.stats_smoothing", c.stats_smoothing);

  read(tree, "ga.population", c.ga.population);
  read(tree, "ga.generations", c.ga.generations);
  read(tree, "ga.crossover_prob", c.ga.crossover_prob);
  read(tree, "ga.mutation_prob", c.ga.mutation_prob);
  read(tree, "ga.fitness_exponent", c.ga.fitness_exponent);

  read(tree, "principle.base", c.principle.base);
  read(tree, "principle.slope", c.principle.slope);
  read(tree, "principle.span", c.principle.span);

  if (const auto list = tree.get_optional<std::string>("sweep.v_values")) {
    c.v_sweep = parse_list(*list, "sweep.v_values");
  }

  read(tree, "bounds.model_dim", c.bounds.model_dim);
  read(tree, "bounds.clients", c.bounds.clients);
  read(tree, "bounds.tau", c.bounds.tau);
  read(tree, "bounds.rounds", c.bounds.rounds);
  read(tree, "bounds.samples_per_client", c.bounds.samples_per_client);
  read(tree, "bounds.batch_size", c.bounds.batch_size);
  read(tree, "bounds.bits", c.bounds.bits);
  read(tree, "bounds.eta", c.bounds.eta);
  read(tree, "bounds.seeds", c.bounds.seeds);
  read(tree, "bounds.seed", c.bounds.seed);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string trace_header() {
  return "n,client_id,a,q,f_hz,channel,t_cmp_s,t_com_s,e_cmp_j,e_com_j,lambda1,lambda2,"
         "J,loss,acc,cum_energy_j\n";
}

std::string format_trace(const ExperimentResult& result) {
  std::string out = trace_header();
  for (const auto& row : result.rounds) {
    if (row.round == 0) {
      out += fmt::format("0,-1,0,0,0,-1,0,0,0,0,{},{},{},{},{},{}\n", row.lambda1,
                         row.lambda2, row.objective, row.loss, row.accuracy,
                         row.cumulative_energy);
      continue;
    }
    for (std::size_t i = 0; i < row.clients.size(); ++i) {
      const auto& c = row.clients[i];
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", row.round, i,
                         c.scheduled ? 1 : 0, c.bits, c.freq_hz, c.channel,
                         c.cost.t_cmp, c.cost.t_com, c.cost.e_cmp, c.cost.e_com,
                         row.lambda1, row.lambda2, row.objective, row.loss,
                         row.accuracy, row.cumulative_energy);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  const PolicyKind kind = parse_policy(cfg.policy);
  const std::uint64_t seed = cfg.seed;
  const int u = cfg.num_clients;
  workers = std::max(1, workers);

  // Data and placement.
  Rng task_rng = Rng::derive(seed, "task");
  const SyntheticTask task(cfg.features, cfg.classes, cfg.class_separation, task_rng);
  PartitionSpec spec;
  spec.num_clients = u;
  spec.size_mean = cfg.size_mean;
  spec.size_std = cfg.size_std;
  spec.classes_per_client = cfg.classes_per_client;
  Rng part_rng = Rng::derive(seed, "partition");
  const std::vector<Dataset> data = partition_data(task, spec, part_rng);
  Rng test_rng = Rng::derive(seed, "test");
  const Dataset test = task.balanced(cfg.test_size, test_rng);

  ExperimentResult result;
  result.policy = cfg.policy;
  result.seed = seed;

  std::vector<ClientProfile> profiles(u, cfg.profile);
  Rng place = Rng::derive(seed, "placement");
  for (int i = 0; i < u; ++i) {
    profiles[i].dataset_size = data[i].size();
    profiles[i].distance_m =
        cfg.distance_min_m + (cfg.distance_max_m - cfg.distance_min_m) * place.uniform();
    result.sizes.push_back(profiles[i].dataset_size);
    result.distances_m.push_back(profiles[i].distance_m);
  }

  PolicyConfig pc = policy_config(cfg, profiles, workers);
  const std::size_t z = pc.model_dim;
  const SoftmaxRegression model(cfg.features, cfg.classes);

  ModelVector theta(static_cast<Eigen::Index>(z));
  Rng init = Rng::derive(seed, "init");
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = init.normal(0.0, cfg.init_std);

  std::vector<int> batch(u);
  for (int i = 0; i < u; ++i) {
    batch[i] = batch_size_for(data[i].size(), cfg.profile.local_epochs,
                              cfg.profile.local_updates);
  }

  // Probe pass at the initial model gives the first statistics.
  SystemState state;
  state.stats.resize(u);
  parallel_for(u, workers, [&](std::size_t i) {
    Rng rng = Rng::derive(seed, stream_label("probe", static_cast<long long>(i)));
    state.stats[i] = local_update(model, theta, data[i], cfg.eta,
                                  cfg.profile.local_updates, batch[i], rng)
                         .stats;
  });
  state.q_last.assign(u, cfg.q_init);

  {
    RoundDecision full = RoundDecision::empty(u);
    for (int i = 0; i < u; ++i) {
      full.participate[i] = 1;
      full.bits[i] = cfg.reference_bits;
    }
    result.reference_arrival1 =
        participation_arrival(full, result.sizes, state.stats, pc.lyapunov);
    result.reference_arrival2 =
        quantization_arrival(full, result.sizes, state.stats, pc.lyapunov, z);
  }
  pc.lyapunov.eps1 = cfg.eps1.value_or(cfg.eps1_scale * result.reference_arrival1);
  pc.lyapunov.eps2 = cfg.eps2.value_or(cfg.eps2_scale * result.reference_arrival2);
  result.eps1 = pc.lyapunov.eps1;
  result.eps2 = pc.lyapunov.eps2;

  {
    // Deadline sanity for a mid-range client on an average channel.
    ClientSolveInput in;
    in.client.profile = cfg.profile;
    in.client.profile.dataset_size = static_cast<int>(cfg.size_mean);
    in.client.model_dim = z;
    in.client.rate_bps = channel_rate(
        path_loss_linear(0.5 * (cfg.distance_min_m + cfg.distance_max_m)) *
            cfg.wireless.rician_zeta,
        cfg.wireless);
    in.t_max = cfg.t_max;
    if (!best_frequency_given_q(1.0, in)) {
      fmt::print(stderr, "warning: the mean client misses t_max even at q = 1, f = f_max\n");
    }
  }

  const auto initial = evaluate(model, theta, test);
  RoundRecord first;
  first.loss = initial.loss;
  first.accuracy = initial.accuracy;
  first.clients.resize(u);
  result.rounds.push_back(first);

  double cumulative = 0.0;
  for (int n = 1; n <= cfg.rounds; ++n) {
    Rng chan_rng = Rng::derive(seed, stream_label("channels", n));
    state.gains = sample_channels(cfg.wireless, profiles, chan_rng);

    Rng ga_rng = Rng::derive(seed, stream_label("ga", n));
    const PolicyOutcome out = decide(kind, pc, state, n, ga_rng);
    const RoundDecision& d = out.decision;
    const auto costs = price_decision(d, cfg.wireless, profiles, state.gains, z);

    // Local training and uploads for participants.
    std::vector<int> who;
    for (int i = 0; i < u; ++i) {
      if (d.scheduled(i)) who.push_back(i);
    }
    std::vector<ModelVector> trained(who.size());
    std::vector<LocalStats> fresh(who.size());
    std::vector<std::optional<QuantizedModel>> slots(who.size());
    parallel_for(who.size(), workers, [&](std::size_t k) {
      const int i = who[k];
      Rng rng = Rng::derive(seed, stream_label("client", i, "round", n));
      auto local = local_update(model, theta, data[i], cfg.eta,
                                cfg.profile.local_updates, batch[i], rng);
      fresh[k] = local.stats;
      if (!d.full_precision) {
        Rng qrng = Rng::derive(seed, stream_label("quant", i, "round", n));
        slots[k] = quantize({local.model.data(), z}, d.bits[i], qrng);
        fresh[k].theta_max = slots[k]->range();
      }
      trained[k] = std::move(local.model);
    });

    if (!who.empty()) {
      std::vector<int> sizes;
      std::vector<QuantizedModel> uploads;
      for (std::size_t k = 0; k < who.size(); ++k) {
        sizes.push_back(result.sizes[who[k]]);
        if (slots[k]) uploads.push_back(std::move(*slots[k]));
      }
      theta = d.full_precision ? aggregate_models(trained, sizes) : aggregate(uploads, sizes);
    }
    const auto eval = evaluate(model, theta, test);

    RoundRecord row;
    row.round = n;
    row.participants = static_cast<int>(who.size());
    row.arrival1 = participation_arrival(d, result.sizes, state.stats, pc.lyapunov);
    row.arrival2 = quantization_arrival(d, result.sizes, state.stats, pc.lyapunov, z);
    row.objective = out.objective;
    state.queues.lambda1 = update_queue(state.queues.lambda1, row.arrival1, pc.lyapunov.eps1);
    state.queues.lambda2 = update_queue(state.queues.lambda2, row.arrival2, pc.lyapunov.eps2);
    row.lambda1 = state.queues.lambda1;
    row.lambda2 = state.queues.lambda2;
    row.loss = eval.loss;
    row.accuracy = eval.accuracy;
    row.ga_best = out.ga_best;
    row.ga_evaluations = out.ga_evaluations;

    row.clients.resize(u);
    for (int i = 0; i < u; ++i) {
      auto& c = row.clients[i];
      if (!d.scheduled(i)) continue;
      c.scheduled = true;
      c.bits = d.bits[i];
      c.freq_hz = d.freq_hz[i];
      c.channel = d.channel[i];
      c.cost = costs[i];
      c.tag = out.inner[i].tag;
      c.j3 = out.inner[i].j3;
      cumulative += costs[i].energy();
    }
    row.cumulative_energy = cumulative;

    for (std::size_t k = 0; k < who.size(); ++k) {
      const int i = who[k];
      state.stats[i] = smooth_stats(state.stats[i], fresh[k], cfg.stats_smoothing);
      state.q_last[i] = d.bits[i];
    }

    row.stats = state.stats;

    check_finite(row.loss, n, "loss");
    check_finite(row.lambda1, n, "lambda1");
    check_finite(row.lambda2, n, "lambda2");
    check_finite(row.objective, n, "objective");
    check_finite(theta.squaredNorm(), n, "model");
    result.rounds.push_back(std::move(row));
  }

  result.total_energy = cumulative;
  result.final_loss = result.rounds.back().loss;
  result.final_accuracy = result.rounds.back().accuracy;

  if (!cfg.output_dir.empty()) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "trace.csv", format_trace(result));
    write_file(dir / "summary.json", summary_json(result, cfg).dump(2) + "\n");
    write_file(dir / "diagnostics.jsonl", diagnostics_jsonl(result));
  }
  return result;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg,
                                  const std::vector<double>& v_values,
                                  const std::vector<std::uint64_t>& seeds,
                                  int workers) {
  if (v_values.empty()) throw Error(Errc::invalid_config, "empty V list");
  if (seeds.empty()) throw Error(Errc::invalid_config, "empty seed list");
  std::vector<SweepPoint> points;
  json report = json::array();
  for (double v : v_values) {
    SweepPoint p;
    p.v = v;
    for (std::uint64_t s : seeds) {
      ExperimentConfig run = cfg;
      run.v = v;
      run.seed = s;
      if (!cfg.output_dir.empty()) {
        run.output_dir = (std::filesystem::path(cfg.output_dir) /
                          fmt::format("v_{}", v) / fmt::format("seed_{}", s))
                             .string();
      }
      const auto r = run_experiment(run, workers);
      p.total_energy.push_back(r.total_energy);
      p.final_accuracy.push_back(r.final_accuracy);
    }
    const double k = static_cast<double>(seeds.size());
    p.mean_total_energy = std::accumulate(p.total_energy.begin(), p.total_energy.end(), 0.0) / k;
    p.mean_final_accuracy =
        std::accumulate(p.final_accuracy.begin(), p.final_accuracy.end(), 0.0) / k;
    report.push_back({{"v", p.v},
                      {"seeds", seeds},
                      {"total_energy_j", p.total_energy},
                      {"final_accuracy", p.final_accuracy},
                      {"mean_total_energy_j", p.mean_total_energy},
                      {"mean_final_accuracy", p.mean_final_accuracy}});
    points.push_back(std::move(p));
  }
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_file(std::filesystem::path(cfg.output_dir) / "sweep.json", report.dump(2) + "\n");
  }
  return points;
}

// --- oracle suites -------------------------------------------------------------

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Coupling that makes the marginal quantization benefit at q equal `target`.
double coupling_for(double q, double target) {
  const double y = std::exp2(q);
  const double x = y - 1.0;
  return target * 4.0 * x * x * x / (y * std::numbers::ln2);
}

// J3 at the cheapest feasible frequency for a fractional level.
double j3_on_curve(double q, const ClientSolveInput& in) {
  const auto f = best_frequency_given_q(q, in);
  if (!f) return std::numeric_limits<double>::infinity();
  return per_client_J3(*f, q, in.client, in.lambda2, in.params);
}

// Largest fractional level that meets the deadline at f_max.
double level_ceiling(const ClientSolveInput& in) {
  const auto& prof = in.client.profile;
  const double z = static_cast<double>(in.client.model_dim);
  const double v = in.client.rate_bps;
  const double q = (v * in.t_max - v * compute_cycles(prof) / prof.f_max_hz - z - 32.0) / z;
  return std::min(q, static_cast<double>(in.q_cap));
}

// Minimizer of the (convex) curve q -> J3(S(q), q) on [1, hi] by golden section.
double golden_section_level(const ClientSolveInput& in) {
  double lo = 1.0;
  double hi = level_ceiling(in);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - r * (hi - lo);
  double b = lo + r * (hi - lo);
  double fa = j3_on_curve(a, in);
  double fb = j3_on_curve(b, in);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - r * (hi - lo);
      fa = j3_on_curve(a, in);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + r * (hi - lo);
      fb = j3_on_curve(b, in);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ClientSolveInput random_solve_instance(int trial, Rng& rng) {
  ClientSolveInput in;
  auto& prof = in.client.profile;
  prof.dataset_size = rng.uniform_int(600, 2000);
  in.client.rate_bps = log_uniform(rng, 3e6, 3e7);
  in.client.weight = between(rng, 0.05, 1.0);
  in.client.theta_max = between(rng, 0.05, 2.0);
  in.client.model_dim = static_cast<std::size_t>(rng.uniform_int(2000, 20000));
  in.client.tx_power_w = 0.2;
  in.params.smoothness = between(rng, 0.5, 2.0);
  in.params.v = log_uniform(rng, 0.1, 10.0);
  in.params.eps2 = between(rng, 0.0, 10.0);

  const double cycles = compute_cycles(prof);
  const double z = static_cast<double>(in.client.model_dim);
  const double rate = in.client.rate_bps;
  const double p_v = in.client.tx_power_w * in.params.v;
  const double two_va = 2.0 * in.params.v * prof.energy_coeff;
  auto upload_s = [&](double q) { return (z * q + z + 32.0) / rate; };

  double coupling = 0.0;
  switch (trial % 6) {
    case 0: {  // coarse level is best
      coupling = p_v * between(rng, 0.05, 0.95) * 2.0 / std::numbers::ln2;
      in.t_max = cycles / log_uniform(rng, 0.3 * prof.f_min_hz, 0.95 * prof.f_max_hz) +
                 upload_s(1.0);
      break;
    }
    case 1: {  // slack deadline at f_min
      const double q = between(rng, 1.3, 12.0);
      const double x = std::exp2(q) - 1.0;
      coupling = 4.0 * p_v * (x * x * x / (x + 1.0)) / std::numbers::ln2;
      in.t_max = (cycles / prof.f_min_hz + upload_s(q)) * between(rng, 1.05, 2.0);
      break;
    }
    case 2: {  // deadline binds at f_max
      const double q = between(rng, 1.5, 12.0);
      in.t_max = cycles / prof.f_max_hz + upload_s(q);
      coupling = coupling_for(
          q, p_v + two_va * std::pow(prof.f_max_hz, 3) * between(rng, 1.05, 4.0));
      break;
    }
    case 3: {  // deadline binds at f_min
      const double q = between(rng, 1.5, 12.0);
      in.t_max = cycles / prof.f_min_hz + upload_s(q);
      coupling = coupling_for(
          q, p_v + two_va * std::pow(prof.f_min_hz, 3) * between(rng, 0.05, 0.95));
      break;
    }
    case 4: {  // deadline binds at an interior frequency
      const double q = between(rng, 1.5, 12.0);
      const double f = between(rng, 1.1 * prof.f_min_hz, 0.9 * prof.f_max_hz);
      in.t_max = cycles / f + upload_s(q);
      coupling = coupling_for(q, p_v + two_va * f * f * f);
      break;
    }
    default: {  // unstructured
      coupling = p_v * log_uniform(rng, 0.1, 1e4);
      in.t_max = cycles / log_uniform(rng, 0.5 * prof.f_min_hz, prof.f_max_hz) +
                 upload_s(between(rng, 1.0, 14.0));
      break;
    }
  }
  const double per_queue = rate * in.client.weight * in.params.smoothness *
                           in.client.theta_max * in.client.theta_max;
  const double lambda_gap = coupling / per_queue;
  in.lambda2 = in.params.eps2 + lambda_gap;

  // Anchor: the integer optimum of the previous round, whose quantization
  // queue sat slightly lower.
  ClientSolveInput prev = in;
  prev.lambda2 = in.params.eps2 + lambda_gap * between(rng, 0.9, 1.0);
  const auto anchor = oracle_grid_solve(prev, prev.q_cap, 64);
  in.q_last = anchor.tag == SolveCase::infeasible ? 8 : anchor.bits;
  return in;
}

KktOracleReport run_kkt_oracle_suite(int trials, std::uint64_t seed) {
  KktOracleReport rep;
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.substream(stream_label("instance", t));
    const auto in = random_solve_instance(t, rng);
    ++rep.trials;
    const auto closed = solve_client(in);
    const auto grid = oracle_grid_solve(in);
    if (grid.tag == SolveCase::infeasible || closed.tag == SolveCase::infeasible) continue;
    ++rep.feasible;
    ++rep.case_counts[static_cast<int>(closed.tag)];
    if (closed.bits == grid.bits) ++rep.bits_match;
    const double gap = (closed.j3 - grid.j3) / std::max(std::abs(grid.j3), 1e-300);
    rep.worst_relative_gap = std::max(rep.worst_relative_gap, gap);
    if (gap > 1e-4) ++rep.objective_violations;

    // Integer rounding of the exact continuous optimum against a full sweep.
    ++rep.rounding_trials;
    const double q_star = golden_section_level(in);
    const auto rounded = round_to_integer(q_star, in);
    int best_q = 0;
    double best_j = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= kMaxQuantizationBits; ++q) {
      const double j = j3_on_curve(q, in);
      if (j < best_j) {
        best_j = j;
        best_q = q;
      }
    }
    if (rounded.bits == best_q) ++rep.rounding_match;
  }
  return rep;
}

GaInstance random_ga_instance(int clients, int channels, Rng& rng) {
  GaInstance g;
  auto& cfg = g.config;
  cfg.wireless.num_channels = channels;
  cfg.lyapunov.v = log_uniform(rng, 0.1, 10.0);
  cfg.model_dim = 8010;
  cfg.t_max = 0.05;
  for (int i = 0; i < clients; ++i) {
    ClientProfile p;
    p.dataset_size = rng.uniform_int(600, 2000);
    p.distance_m = between(rng, 50.0, 500.0);
    cfg.profiles.push_back(p);
  }
  auto& st = g.state;
  for (int i = 0; i < clients; ++i) {
    st.stats.push_back({between(rng, 0.5, 3.0), between(rng, 0.1, 2.0), between(rng, 0.1, 1.0)});
    st.q_last.push_back(rng.uniform_int(2, 10));
  }
  st.gains = sample_channels(cfg.wireless, cfg.profiles, rng);

  const auto sizes = cfg.sizes();
  RoundDecision full = RoundDecision::empty(clients);
  for (int i = 0; i < clients; ++i) {
    full.participate[i] = 1;
    full.bits[i] = 8;
  }
  cfg.lyapunov.eps1 = participation_arrival(full, sizes, st.stats, cfg.lyapunov) *
                      between(rng, 0.5, 1.1);
  cfg.lyapunov.eps2 = quantization_arrival(full, sizes, st.stats, cfg.lyapunov,
                                           cfg.model_dim) * between(rng, 0.5, 1.1);
  const double sign1 = rng.uniform() < 0.8 ? 1.0 : -1.0;
  const double sign2 = rng.uniform() < 0.8 ? 1.0 : -1.0;
  st.queues.lambda1 = std::max(
      0.0, cfg.lyapunov.eps1 + sign1 * cfg.lyapunov.v * log_uniform(rng, 1e-6, 1e-2));
  st.queues.lambda2 = std::max(
      0.0, cfg.lyapunov.eps2 + sign2 * cfg.lyapunov.v * log_uniform(rng, 1e-5, 1e-1));
  return g;
}

GaOracleReport run_ga_oracle_suite(int trials, std::uint64_t seed, int clients,
                                   int channels) {
  GaOracleReport rep;
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.substream(stream_label("instance", t));
    const auto g = random_ga_instance(clients, channels, rng);
    const AllocationEvaluator eval = [&](const Chromosome& c) {
      return evaluate_allocation(PolicyKind::qccf, g.config, g.state, 1, c);
    };
    Rng ga_rng = root.substream(stream_label("ga", t));
    const auto ga = ga_allocate(clients, channels, g.config.ga, eval, ga_rng);
    const auto best = exhaustive_allocate(clients, channels, eval);
    ++rep.trials;
    const double gap = ga.value.objective - best.value.objective;
    const double tol = 1e-9 * std::max(1.0, std::abs(best.value.objective));
    if (std::abs(gap) <= tol) ++rep.matches;
    if (gap < -tol) ++rep.below;
    rep.worst_gap = std::max(rep.worst_gap, gap);
  }
  return rep;
}

}  // namespace qccf
