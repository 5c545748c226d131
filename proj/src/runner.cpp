#include "wwlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wwlab/beliefprop.hpp"
#include "wwlab/cellfree.hpp"
#include "wwlab/horizonopt.hpp"
#include "wwlab/infobottleneck.hpp"
#include "wwlab/parallel.hpp"
#include "wwlab/precoding.hpp"
#include "wwlab/ratereduction.hpp"
#include "wwlab/report.hpp"

namespace wwlab {
namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& message) {
  throw std::invalid_argument(message);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const char* scope) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) bad_config("unknown key: " + item.key() + " (in " + scope + ")");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_double(const json& obj, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad_config(std::string(key) + " must be a number");
  return v->get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad_config(std::string(key) + " must be an integer");
  const auto wide = v->get<std::int64_t>();
  if (wide < -(1LL << 31) || wide > (1LL << 31) - 1) {
    bad_config(std::string(key) + " is out of range");
  }
  return static_cast<int>(wide);
}

std::vector<double> get_double_list(const json& obj, const char* key,
                                    std::vector<double> fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array()) bad_config(std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v->size());
  for (const auto& item : *v) {
    if (!item.is_number()) bad_config(std::string(key) + " must be an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

std::vector<int> get_int_list(const json& obj, const char* key, std::vector<int> fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array()) bad_config(std::string(key) + " must be an array of integers");
  std::vector<int> out;
  out.reserve(v->size());
  for (const auto& item : *v) {
    if (!item.is_number_integer()) {
      bad_config(std::string(key) + " must be an array of integers");
    }
    out.push_back(item.get<int>());
  }
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

Eigen::MatrixXd real_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream rng) {
  Eigen::MatrixXd out(rows, cols);
  Xoshiro256pp gen(rng);
  double z0 = 0.0;
  double z1 = 0.0;
  bool have_spare = false;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (have_spare) {
        out(r, c) = z1;
        have_spare = false;
      } else {
        gen.gaussian_pair(z0, z1);
        out(r, c) = z0;
        have_spare = true;
      }
    }
  }
  return out;
}

struct ExperimentOutput {
  Table table;
  json extra = json::object();
};

ExperimentOutput run_case1(const json& params, std::uint64_t seed, int threads) {
  reject_unknown(params,
                 {"stations", "antennas", "users", "power", "bandwidth_hz", "sigma2_list",
                  "channels", "wmmse_max_iters", "wmmse_tol"},
                 "params");
  const int stations = get_int(params, "stations", 10);
  const int antennas = get_int(params, "antennas", 4);
  const int users = get_int(params, "users", 4);
  const double power = get_double(params, "power", 1.0);
  const double bandwidth = get_double(params, "bandwidth_hz", 20e6);
  const std::vector<double> sigma2_list =
      get_double_list(params, "sigma2_list", {0.5, 1.0, 2.0});
  const int channels = get_int(params, "channels", 200);
  const int max_iters = get_int(params, "wmmse_max_iters", 100);
  const double tol = get_double(params, "wmmse_tol", 1e-8);
  if (channels < 1) bad_config("channels must be at least 1");

  const std::string seed_text = std::to_string(seed);
  Table table;
  table.columns = {"seed", "sigma2", "scheme", "mean_sum_se", "std_sum_se", "num_channels"};
  const RngStream root{seed, 0};
  for (std::size_t si = 0; si < sigma2_list.size(); ++si) {
    const Scenario sc =
        Scenario::unicast(stations, antennas, users, sigma2_list[si], power, bandwidth);
    const RngStream sweep = root.substream(1000 + si);
    const auto values = parallel_map(channels, threads, [&](int i) {
      const ChannelRealization ch = draw_channel(sc, sweep.substream(static_cast<std::uint64_t>(i)));
      const double mrt_se = sinr_and_se(ch, mrt(ch)).total_se;
      const auto [w, trace] = wmmse_sum_se(ch, max_iters, tol);
      return std::pair<double, double>{mrt_se, trace.objective.back()};
    });
    std::vector<double> mrt_vals;
    std::vector<double> wmmse_vals;
    mrt_vals.reserve(values.size());
    wmmse_vals.reserve(values.size());
    for (const auto& [a, b] : values) {
      mrt_vals.push_back(a);
      wmmse_vals.push_back(b);
    }
    const MeanStd m = mean_std(mrt_vals);
    const MeanStd w = mean_std(wmmse_vals);
    table.rows.push_back({seed_text, sigma2_list[si], std::string("mrt"), m.mean, m.std,
                          std::int64_t{channels}});
    table.rows.push_back({seed_text, sigma2_list[si], std::string("wmmse"), w.mean, w.std,
                          std::int64_t{channels}});
  }
  return {std::move(table), json::object()};
}

ExperimentOutput run_case2(const json& params, std::uint64_t seed, int threads) {
  reject_unknown(params,
                 {"stations", "antennas", "users", "groups", "power", "noise", "layers",
                  "train_channels", "test_channels", "tau_soft", "tau_csi_list",
                  "nm_max_evals"},
                 "params");
  const int stations = get_int(params, "stations", 4);
  const int antennas = get_int(params, "antennas", 4);
  const int users = get_int(params, "users", 8);
  const int groups = get_int(params, "groups", 4);
  const double power = get_double(params, "power", 1.0);
  const double noise = get_double(params, "noise", 1.0);
  const int layers = get_int(params, "layers", 10);
  const int train_channels = get_int(params, "train_channels", 200);
  const int test_channels = get_int(params, "test_channels", 200);
  const double tau_soft = get_double(params, "tau_soft", 0.05);
  const std::vector<double> tau_csi_list =
      get_double_list(params, "tau_csi_list", {0.0, 0.1, 0.2});
  const int nm_max_evals = get_int(params, "nm_max_evals", 120);

  const Scenario sc = Scenario::multicast(stations, antennas, users, groups, noise, power);
  const RngStream root{seed, 0};
  TrainConfig tc;
  tc.tau_soft = tau_soft;
  tc.nm_max_evals = nm_max_evals;
  tc.threads = threads;
  const TrainResult trained = train_unfolded(sc, layers, train_channels, root.substream(1), tc);

  std::size_t best_grid = 0;
  for (std::size_t i = 1; i < tc.step_grid.size(); ++i) {
    if (trained.candidate_log[i].second > trained.candidate_log[best_grid].second) {
      best_grid = i;
    }
  }
  const double best_constant = tc.step_grid[best_grid];

  const std::vector<std::pair<std::string, UnfoldedSchedule>> schedules = {
      {"unfolded", trained.schedule},
      {"best_constant", UnfoldedSchedule::constant(best_constant, layers, tau_soft)},
      {"constant_0.1", UnfoldedSchedule::constant(0.1, layers, tau_soft)},
  };
  const auto rows =
      compare_schedules(sc, schedules, test_channels, tau_csi_list, root.substream(2), threads);

  const std::string seed_text = std::to_string(seed);
  Table table;
  table.columns = {"seed",        "tau_csi",    "scheme",        "layers",
                   "mean_min_se", "std_min_se", "mean_total_se", "num_channels"};
  for (const auto& r : rows) {
    table.rows.push_back({seed_text, r.tau_csi, r.scheme, std::int64_t{r.layers},
                          r.mean_min_se, r.std_min_se, r.mean_total_se,
                          std::int64_t{r.num_channels}});
  }
  json extra = json::object();
  extra["trained_steps"] = trained.schedule.layer_steps;
  extra["training_objective"] = trained.schedule.training_objective;
  extra["best_constant_step"] = best_constant;
  return {std::move(table), std::move(extra)};
}

ExperimentOutput run_redunet(const json& params, std::uint64_t seed, int /*threads*/) {
  reject_unknown(params,
                 {"dimension", "samples_per_class", "classes", "mean_separation", "noise_std",
                  "layers", "eta", "epsilon_sq", "sharpness", "nearest_rank"},
                 "params");
  const int dimension = get_int(params, "dimension", 8);
  const int samples_per_class = get_int(params, "samples_per_class", 100);
  const int classes = get_int(params, "classes", 2);
  const double mean_separation = get_double(params, "mean_separation", 4.0);
  const double noise_std = get_double(params, "noise_std", 1.0);
  const int layers = get_int(params, "layers", 20);
  const double eta = get_double(params, "eta", 0.5);
  const double epsilon_sq = get_double(params, "epsilon_sq", 0.5);
  const double sharpness = get_double(params, "sharpness", 100.0);
  const int nearest_rank = get_int(params, "nearest_rank", 1);

  const RngStream root{seed, 0};
  FeatureBatch batch = gaussian_mixture_batch(dimension, samples_per_class, classes,
                                              mean_separation, noise_std, root.substream(1));
  batch.epsilon_sq = epsilon_sq;
  const ReduForwardResult fwd = redunet_forward(batch, layers, eta, sharpness);

  Table table;
  table.columns = {"layer_index", "R", "R_c", "delta_R", "nearest_subspace_accuracy"};
  for (std::size_t li = 0; li < fwd.layer_features.size(); ++li) {
    FeatureBatch snap;
    snap.z = fwd.layer_features[li];
    snap.memberships = batch.memberships;
    snap.epsilon_sq = epsilon_sq;
    const double r = coding_rate(snap);
    const double rc = conditional_coding_rate(snap);
    table.rows.push_back({static_cast<std::int64_t>(li), r, rc, r - rc,
                          nearest_subspace_accuracy(snap, nearest_rank)});
  }
  return {std::move(table), json::object()};
}

ExperimentOutput run_crate(const json& params, std::uint64_t seed, int /*threads*/) {
  reject_unknown(params,
                 {"dimension", "atoms", "samples", "iterations", "sparsity_weight",
                  "step_scale"},
                 "params");
  const int dimension = get_int(params, "dimension", 16);
  const int atoms = get_int(params, "atoms", 32);
  const int samples = get_int(params, "samples", 8);
  const int iterations = get_int(params, "iterations", 30);
  const double sparsity_weight = get_double(params, "sparsity_weight", 0.1);
  const double step_scale = get_double(params, "step_scale", 0.9);
  if (dimension < 1 || atoms < 1 || samples < 1) bad_config("matrix sizes must be positive");
  if (iterations < 0) bad_config("iterations must be nonnegative");

  const RngStream root{seed, 0};
  DictionaryBlock block;
  block.dictionary = real_gaussian(dimension, atoms, root.substream(1));
  block.sparsity_weight = sparsity_weight;
  const double smax = spectral_norm(block.dictionary);
  block.step = step_scale / (smax * smax);
  const Eigen::MatrixXd target = real_gaussian(dimension, samples, root.substream(2));

  Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(atoms, samples);
  Table table;
  table.columns = {"iteration", "lasso_objective", "nonzero_fraction"};
  auto push = [&](int iter) {
    const double nonzero =
        static_cast<double>((codes.array() > 0.0).count()) / static_cast<double>(codes.size());
    table.rows.push_back(
        {std::int64_t{iter}, lasso_objective(codes, target, block), nonzero});
  };
  push(0);
  for (int it = 1; it <= iterations; ++it) {
    codes = ista_step(codes, target, block);
    push(it);
  }
  json extra = json::object();
  extra["step"] = block.step;
  extra["spectral_norm"] = smax;
  return {std::move(table), std::move(extra)};
}

ExperimentOutput run_ib(const json& params, std::uint64_t seed, int /*threads*/) {
  reject_unknown(params, {"joint", "beta_list", "z_card", "restarts", "max_iters", "tol"},
                 "params");
  DiscreteJoint joint;
  if (const json* j = find(params, "joint")) {
    if (!j->is_array() || j->empty()) bad_config("joint must be a non-empty array of rows");
    const std::size_t cols = (*j)[0].is_array() ? (*j)[0].size() : 0;
    if (cols == 0) bad_config("joint rows must be non-empty arrays");
    joint.p.resize(static_cast<Eigen::Index>(j->size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j->size(); ++r) {
      const json& row = (*j)[r];
      if (!row.is_array() || row.size() != cols) bad_config("joint must be rectangular");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!row[c].is_number()) bad_config("joint entries must be numbers");
        joint.p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            row[c].get<double>();
      }
    }
  } else {
    joint.p.resize(2, 2);
    joint.p << 0.4, 0.1, 0.1, 0.4;
  }
  const std::vector<double> betas =
      get_double_list(params, "beta_list", {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0});
  const int z_card = get_int(params, "z_card", static_cast<int>(joint.p.rows()));
  const int restarts = get_int(params, "restarts", 5);
  const int max_iters = get_int(params, "max_iters", 2000);
  const double tol = get_double(params, "tol", 1e-10);

  const RngStream root{seed, 0};
  const auto points = ib_sweep(joint, betas, z_card, restarts, root.substream(1), max_iters, tol);
  Table table;
  table.columns = {"beta", "i_xz", "i_zy", "objective", "iterations", "converged"};
  for (const auto& p : points) {
    table.rows.push_back({p.beta, p.i_xz, p.i_zy, p.objective, std::int64_t{p.iterations},
                          std::int64_t{p.converged ? 1 : 0}});
  }
  json extra = json::object();
  extra["i_xy_bits"] = mutual_information(joint);
  return {std::move(table), std::move(extra)};
}

ExperimentOutput run_horizon(const json& params, std::uint64_t /*seed*/, int /*threads*/) {
  reject_unknown(params, {"mu", "l", "horizons"}, "params");
  const double mu = get_double(params, "mu", 1.0);
  const double l = get_double(params, "l", 10.0);
  const std::vector<int> horizons = get_int_list(params, "horizons", {1, 2, 4, 8});

  Table table;
  table.columns = {"t", "schedule_kind", "worst_case_factor"};
  for (int t : horizons) {
    table.rows.push_back({std::int64_t{t}, std::string("chebyshev"),
                          worst_case_factor(chebyshev_schedule(t, mu, l))});
    table.rows.push_back({std::int64_t{t}, std::string("best_constant"),
                          worst_case_factor(best_constant_schedule(t, mu, l))});
  }
  return {std::move(table), json::object()};
}

ExperimentOutput run_bp(const json& params, std::uint64_t /*seed*/, int /*threads*/) {
  reject_unknown(params, {"cardinalities", "factors", "max_iters", "damping", "tol"},
                 "params");
  FactorGraph graph;
  graph.cardinalities = get_int_list(params, "cardinalities", {2, 2});
  if (const json* f = find(params, "factors")) {
    if (!f->is_array()) bad_config("factors must be an array");
    for (const auto& item : *f) {
      if (!item.is_object()) bad_config("each factor must be an object");
      reject_unknown(item, {"vars", "table"}, "factor");
      FactorGraph::Factor factor;
      factor.vars = get_int_list(item, "vars", {});
      if (factor.vars.empty()) bad_config("factor vars must be non-empty");
      const json* t = find(item, "table");
      if (!t) bad_config("factor table is required");
      factor.table = get_double_list(item, "table", {});
      graph.factors.push_back(std::move(factor));
    }
  } else {
    graph.factors.push_back({{0, 1}, {0.9, 0.1, 0.2, 0.8}});
  }
  const int max_iters = get_int(params, "max_iters", 200);
  const double damping = get_double(params, "damping", 0.0);
  const double tol = get_double(params, "tol", 1e-12);

  const MarginalsResult res = sum_product(graph, max_iters, damping, tol);
  Table table;
  table.columns = {"variable", "state", "probability"};
  for (std::size_t v = 0; v < res.marginals.size(); ++v) {
    for (Eigen::Index s = 0; s < res.marginals[v].size(); ++s) {
      table.rows.push_back({static_cast<std::int64_t>(v), static_cast<std::int64_t>(s),
                            res.marginals[v](s)});
    }
  }
  json extra = json::object();
  extra["converged"] = res.converged;
  extra["iterations"] = res.iterations;
  return {std::move(table), std::move(extra)};
}

const char* module_for(const std::string& experiment) {
  if (experiment == "case1_sweep" || experiment == "case2_unfold") return "precoding";
  if (experiment == "redunet_demo" || experiment == "crate_block") return "ratereduction";
  if (experiment == "ib_sweep") return "infobottleneck";
  if (experiment == "horizon_sweep") return "horizonopt";
  if (experiment == "bp_run") return "beliefprop";
  return "expcli";
}

}  // namespace

ExperimentConfig parse_config(const json& document) {
  if (!document.is_object()) bad_config("config document must be a JSON object");
  reject_unknown(document, {"experiment", "seed", "output_path", "params"}, "config");

  ExperimentConfig config;
  const json* exp = find(document, "experiment");
  if (!exp || !exp->is_string()) bad_config("experiment must be a string");
  config.experiment = exp->get<std::string>();
  static const char* kKnown[] = {"case1_sweep", "case2_unfold", "redunet_demo", "crate_block",
                                 "ib_sweep",    "horizon_sweep", "bp_run"};
  bool known = false;
  for (const char* k : kKnown) known = known || config.experiment == k;
  if (!known) bad_config("unknown experiment: " + config.experiment);

  if (const json* seed = find(document, "seed")) {
    if (!seed->is_number_integer() && !seed->is_number_unsigned()) {
      bad_config("seed must be a nonnegative integer");
    }
    if (seed->is_number_integer() && seed->get<std::int64_t>() < 0) {
      bad_config("seed must be a nonnegative integer");
    }
    config.seed = seed->get<std::uint64_t>();
  }
  if (const json* out = find(document, "output_path")) {
    if (!out->is_string() || out->get<std::string>().empty()) {
      bad_config("output_path must be a non-empty string");
    }
    config.output_path = out->get<std::string>();
  } else {
    config.output_path = config.experiment + ".csv";
  }
  if (const json* params = find(document, "params")) {
    if (!params->is_object()) bad_config("params must be an object");
    config.params = *params;
  }
  return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot read config file: " + path.string());
  json document;
  try {
    document = json::parse(stream);
  } catch (const json::parse_error& e) {
    bad_config(std::string("config parse error: ") + e.what());
  }
  return parse_config(document);
}

RunResult run_config(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                     int threads) {
  if (threads < 1) bad_config("threads must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  ExperimentOutput out;
  try {
    if (config.experiment == "case1_sweep") {
      out = run_case1(config.params, config.seed, threads);
    } else if (config.experiment == "case2_unfold") {
      out = run_case2(config.params, config.seed, threads);
    } else if (config.experiment == "redunet_demo") {
      out = run_redunet(config.params, config.seed, threads);
    } else if (config.experiment == "crate_block") {
      out = run_crate(config.params, config.seed, threads);
    } else if (config.experiment == "ib_sweep") {
      out = run_ib(config.params, config.seed, threads);
    } else if (config.experiment == "horizon_sweep") {
      out = run_horizon(config.params, config.seed, threads);
    } else if (config.experiment == "bp_run") {
      out = run_bp(config.params, config.seed, threads);
    } else {
      bad_config("unknown experiment: " + config.experiment);
    }
  } catch (const std::invalid_argument&) {
    throw;  // config-shaped problem, not a module failure
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("module ") + module_for(config.experiment) + ": " +
                             e.what());
  }

  std::filesystem::create_directories(out_dir);
  RunResult result;
  result.csv_path = out_dir / config.output_path;
  emit_report(out.table, result.csv_path);

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  json manifest = json::object();
  manifest["config"] = {{"experiment", config.experiment},
                        {"seed", config.seed},
                        {"output_path", config.output_path},
                        {"params", config.params}};
  manifest["version"] = kVersion;
  manifest["wall_time_seconds"] = elapsed.count();
  manifest["result"] = out.extra;

  result.manifest_path = result.csv_path;
  result.manifest_path.replace_extension();
  result.manifest_path += ".manifest.json";
  write_text_atomic(manifest.dump(2) + "\n", result.manifest_path);
  return result;
}

}  // namespace wwlab
