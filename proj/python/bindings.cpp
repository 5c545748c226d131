#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "wwlab/beliefprop.hpp"
#include "wwlab/cellfree.hpp"
#include "wwlab/horizonopt.hpp"
#include "wwlab/infobottleneck.hpp"
#include "wwlab/linalg.hpp"
#include "wwlab/precoding.hpp"
#include "wwlab/ratereduction.hpp"
#include "wwlab/rng.hpp"
#include "wwlab/runner.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_wwlab, m) {
  using namespace wwlab;
  m.doc() = "Cell-free precoding, rate reduction, and companion solvers";
  m.attr("__version__") = kVersion;

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<>())
      .def(py::init([](std::uint64_t seed, std::uint64_t stream_id) {
             return RngStream{seed, stream_id};
           }),
           py::arg("seed"), py::arg("stream_id") = 0)
      .def_readwrite("seed", &RngStream::seed)
      .def_readwrite("stream_id", &RngStream::stream_id)
      .def("substream", py::overload_cast<std::uint64_t>(&RngStream::substream, py::const_),
           py::arg("tag"))
      .def("substream2",
           py::overload_cast<std::uint64_t, std::uint64_t>(&RngStream::substream, py::const_),
           py::arg("tag_a"), py::arg("tag_b"));

  m.def("sample_complex_gaussian", &sample_complex_gaussian, py::arg("rows"), py::arg("cols"),
        py::arg("rng"));
  m.def("logdet_psd", py::overload_cast<const RealMatrix&>(&logdet_psd), py::arg("a"));
  m.def("logdet_psd", py::overload_cast<const ComplexMatrix&>(&logdet_psd), py::arg("a"));
  m.def("spectral_norm", py::overload_cast<const RealMatrix&>(&spectral_norm), py::arg("a"));
  m.def("spectral_norm", py::overload_cast<const ComplexMatrix&>(&spectral_norm), py::arg("a"));

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("num_stations", &Scenario::num_stations)
      .def_readwrite("antennas_per_station", &Scenario::antennas_per_station)
      .def_readwrite("num_users", &Scenario::num_users)
      .def_readwrite("group_assignment", &Scenario::group_assignment)
      .def_readwrite("noise_power", &Scenario::noise_power)
      .def_readwrite("power_budget_per_station", &Scenario::power_budget_per_station)
      .def_readwrite("bandwidth_hz", &Scenario::bandwidth_hz)
      .def_readwrite("per_link_gain", &Scenario::per_link_gain)
      .def("total_antennas", &Scenario::total_antennas)
      .def("num_groups", &Scenario::num_groups)
      .def("users_by_group", &Scenario::users_by_group)
      .def("validate", &Scenario::validate)
      .def_static("unicast", &Scenario::unicast, py::arg("stations"), py::arg("antennas"),
                  py::arg("users"), py::arg("noise_power"), py::arg("power_budget"),
                  py::arg("bandwidth_hz") = 20e6)
      .def_static("multicast", &Scenario::multicast, py::arg("stations"), py::arg("antennas"),
                  py::arg("users"), py::arg("groups"), py::arg("noise_power"),
                  py::arg("power_budget"), py::arg("bandwidth_hz") = 20e6);

  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def(py::init<>())
      .def_readwrite("scenario", &ChannelRealization::scenario)
      .def_readwrite("h", &ChannelRealization::h);

  py::class_<PrecoderSet>(m, "PrecoderSet")
      .def(py::init<>())
      .def_readwrite("w", &PrecoderSet::w);

  py::class_<RateReport>(m, "RateReport")
      .def_readonly("sinr", &RateReport::sinr)
      .def_readonly("se", &RateReport::se)
      .def_readonly("total_se", &RateReport::total_se)
      .def_readonly("group_min_se", &RateReport::group_min_se);

  m.def("draw_channel", &draw_channel, py::arg("scenario"), py::arg("rng"));
  m.def("corrupt_csi", &corrupt_csi, py::arg("channel"), py::arg("tau"), py::arg("rng"));
  m.def("sinr_and_se", &sinr_and_se, py::arg("channel"), py::arg("w"));
  m.def("project_power", &project_power, py::arg("w"), py::arg("scenario"));
  m.def("station_power", &station_power, py::arg("w"), py::arg("scenario"), py::arg("station"));
  m.def("power_feasible", &power_feasible, py::arg("w"), py::arg("scenario"),
        py::arg("tol") = 1e-9);

  py::class_<UnfoldedSchedule>(m, "UnfoldedSchedule")
      .def(py::init<>())
      .def_readwrite("layer_steps", &UnfoldedSchedule::layer_steps)
      .def_readwrite("smoothing_temperature", &UnfoldedSchedule::smoothing_temperature)
      .def_readwrite("training_seed", &UnfoldedSchedule::training_seed)
      .def_readwrite("training_objective", &UnfoldedSchedule::training_objective)
      .def("layers", &UnfoldedSchedule::layers)
      .def("validate", &UnfoldedSchedule::validate)
      .def_static("constant", &UnfoldedSchedule::constant, py::arg("step"), py::arg("layers"),
                  py::arg("tau_soft") = 0.05);

  py::class_<OptimizerTrace>(m, "OptimizerTrace")
      .def_readonly("objective", &OptimizerTrace::objective)
      .def_readonly("power", &OptimizerTrace::power);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("tau_soft", &TrainConfig::tau_soft)
      .def_readwrite("step_grid", &TrainConfig::step_grid)
      .def_readwrite("nm_max_evals", &TrainConfig::nm_max_evals)
      .def_readwrite("nm_initial_spread", &TrainConfig::nm_initial_spread)
      .def_readwrite("threads", &TrainConfig::threads);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("schedule", &TrainResult::schedule)
      .def_readonly("candidate_log", &TrainResult::candidate_log);

  py::class_<ScheduleComparisonRow>(m, "ScheduleComparisonRow")
      .def_readonly("scheme", &ScheduleComparisonRow::scheme)
      .def_readonly("tau_csi", &ScheduleComparisonRow::tau_csi)
      .def_readonly("layers", &ScheduleComparisonRow::layers)
      .def_readonly("mean_min_se", &ScheduleComparisonRow::mean_min_se)
      .def_readonly("std_min_se", &ScheduleComparisonRow::std_min_se)
      .def_readonly("mean_total_se", &ScheduleComparisonRow::mean_total_se)
      .def_readonly("num_channels", &ScheduleComparisonRow::num_channels);

  m.def("mrt", &mrt, py::arg("channel"));
  m.def("wmmse_sum_se", &wmmse_sum_se, py::arg("channel"), py::arg("max_iters"), py::arg("tol"));
  m.def("smoothed_min_rate", &smoothed_min_rate, py::arg("channel"), py::arg("w"),
        py::arg("tau_soft"));
  m.def("smoothed_min_rate_gradient", &smoothed_min_rate_gradient, py::arg("channel"),
        py::arg("w"), py::arg("tau_soft"));
  m.def("pgd_init", &pgd_init, py::arg("channel"));
  m.def("pgd_run", &pgd_run, py::arg("channel"), py::arg("schedule"), py::arg("w0"));
  m.def("default_step_grid", &default_step_grid);
  m.def("train_unfolded", &train_unfolded, py::arg("scenario"), py::arg("layers"),
        py::arg("train_channels"), py::arg("rng"), py::arg("config") = TrainConfig{});
  m.def("compare_schedules", &compare_schedules, py::arg("scenario"), py::arg("schedules"),
        py::arg("test_channels"), py::arg("tau_csi_list"), py::arg("rng"),
        py::arg("threads") = 1);

  py::class_<FeatureBatch>(m, "FeatureBatch")
      .def(py::init<>())
      .def_readwrite("z", &FeatureBatch::z)
      .def_readwrite("memberships", &FeatureBatch::memberships)
      .def_readwrite("epsilon_sq", &FeatureBatch::epsilon_sq)
      .def("num_classes", &FeatureBatch::num_classes)
      .def("class_counts", &FeatureBatch::class_counts)
      .def("validate", &FeatureBatch::validate);

  py::class_<ReduLayerParams>(m, "ReduLayerParams")
      .def_readonly("e", &ReduLayerParams::e)
      .def_readonly("c_list", &ReduLayerParams::c_list)
      .def_readonly("gamma", &ReduLayerParams::gamma);

  py::class_<ReduForwardResult>(m, "ReduForwardResult")
      .def_readonly("features", &ReduForwardResult::features)
      .def_readonly("delta_r_trace", &ReduForwardResult::delta_r_trace)
      .def_readonly("layer_features", &ReduForwardResult::layer_features);

  py::class_<DictionaryBlock>(m, "DictionaryBlock")
      .def(py::init<>())
      .def_readwrite("heads", &DictionaryBlock::heads)
      .def_readwrite("dictionary", &DictionaryBlock::dictionary)
      .def_readwrite("step", &DictionaryBlock::step)
      .def_readwrite("sparsity_weight", &DictionaryBlock::sparsity_weight);

  m.def("coding_rate", &coding_rate, py::arg("batch"));
  m.def("conditional_coding_rate", &conditional_coding_rate, py::arg("batch"));
  m.def("rate_reduction", &rate_reduction, py::arg("batch"));
  m.def("redunet_layer", &redunet_layer, py::arg("batch"));
  m.def("redunet_forward", &redunet_forward, py::arg("batch"), py::arg("layers"), py::arg("eta"),
        py::arg("assignment_sharpness"));
  m.def("nearest_subspace_accuracy", &nearest_subspace_accuracy, py::arg("batch"),
        py::arg("rank"));
  m.def("gaussian_mixture_batch", &gaussian_mixture_batch, py::arg("dimension"),
        py::arg("samples_per_class"), py::arg("classes"), py::arg("mean_separation"),
        py::arg("noise_std"), py::arg("rng"));
  m.def("mssa_forward", &mssa_forward, py::arg("tokens"), py::arg("block"));
  m.def("ista_step", &ista_step, py::arg("codes"), py::arg("target"), py::arg("block"));
  m.def("lasso_objective", &lasso_objective, py::arg("codes"), py::arg("target"),
        py::arg("block"));

  py::class_<DiscreteJoint>(m, "DiscreteJoint")
      .def(py::init<>())
      .def(py::init([](RealMatrix p) {
             DiscreteJoint j;
             j.p = std::move(p);
             return j;
           }),
           py::arg("p"))
      .def_readwrite("p", &DiscreteJoint::p)
      .def("validate", &DiscreteJoint::validate);

  py::class_<IBEncoder>(m, "IBEncoder")
      .def(py::init<>())
      .def_readwrite("q", &IBEncoder::q)
      .def("validate", &IBEncoder::validate);

  py::class_<IBSolution>(m, "IBSolution")
      .def_readonly("encoder", &IBSolution::encoder)
      .def_readonly("i_xz", &IBSolution::i_xz)
      .def_readonly("i_zy", &IBSolution::i_zy)
      .def_readonly("objective_trace", &IBSolution::objective_trace)
      .def_readonly("iterations", &IBSolution::iterations)
      .def_readonly("converged", &IBSolution::converged)
      .def_readonly("residual", &IBSolution::residual);

  py::class_<IBSweepPoint>(m, "IBSweepPoint")
      .def_readonly("beta", &IBSweepPoint::beta)
      .def_readonly("i_xz", &IBSweepPoint::i_xz)
      .def_readonly("i_zy", &IBSweepPoint::i_zy)
      .def_readonly("objective", &IBSweepPoint::objective)
      .def_readonly("iterations", &IBSweepPoint::iterations)
      .def_readonly("converged", &IBSweepPoint::converged);

  m.def("mutual_information", &mutual_information, py::arg("joint"));
  m.def("ib_solve", &ib_solve, py::arg("joint"), py::arg("beta"), py::arg("z_card"),
        py::arg("init"), py::arg("max_iters"), py::arg("tol"));
  m.def("ib_sweep", &ib_sweep, py::arg("joint"), py::arg("betas"), py::arg("z_card"),
        py::arg("restarts"), py::arg("rng"), py::arg("max_iters") = 2000,
        py::arg("tol") = 1e-10);
  m.def("perturbed_uniform_encoder", &perturbed_uniform_encoder, py::arg("x_card"),
        py::arg("z_card"), py::arg("rng"));

  py::class_<StepSchedule>(m, "StepSchedule")
      .def(py::init<>())
      .def_readwrite("steps", &StepSchedule::steps)
      .def_readwrite("mu", &StepSchedule::mu)
      .def_readwrite("l", &StepSchedule::l)
      .def("validate", &StepSchedule::validate);

  m.def("worst_case_factor", &worst_case_factor, py::arg("schedule"));
  m.def("chebyshev_schedule", &chebyshev_schedule, py::arg("t"), py::arg("mu"), py::arg("l"));
  m.def("best_constant_schedule", &best_constant_schedule, py::arg("t"), py::arg("mu"),
        py::arg("l"));
  m.def("chebyshev_t", &chebyshev_t, py::arg("n"), py::arg("x"));

  py::class_<FactorGraph> factor_graph(m, "FactorGraph");
  py::class_<FactorGraph::Factor>(factor_graph, "Factor")
      .def(py::init<>())
      .def(py::init([](std::vector<int> vars, std::vector<double> table) {
             return FactorGraph::Factor{std::move(vars), std::move(table)};
           }),
           py::arg("vars"), py::arg("table"))
      .def_readwrite("vars", &FactorGraph::Factor::vars)
      .def_readwrite("table", &FactorGraph::Factor::table);
  factor_graph.def(py::init<>())
      .def_readwrite("cardinalities", &FactorGraph::cardinalities)
      .def_readwrite("factors", &FactorGraph::factors)
      .def("validate", &FactorGraph::validate);

  py::class_<MarginalsResult>(m, "MarginalsResult")
      .def_readonly("marginals", &MarginalsResult::marginals)
      .def_readonly("converged", &MarginalsResult::converged)
      .def_readonly("iterations", &MarginalsResult::iterations);

  m.def("sum_product", &sum_product, py::arg("graph"), py::arg("max_iters"), py::arg("damping"),
        py::arg("tol"));
  m.def("brute_force_marginals", &brute_force_marginals, py::arg("graph"));

  m.def(
      "run_config_json",
      [](const std::string& text, const std::string& out_dir, int threads) {
        nlohmann::json document;
        try {
          document = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw std::invalid_argument(std::string("config parse error: ") + e.what());
        }
        const ExperimentConfig config = parse_config(document);
        const RunResult result = run_config(config, out_dir, threads);
        return py::make_tuple(result.csv_path.string(), result.manifest_path.string());
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("threads") = 1,
      "Parse a config document, run it, and return (csv_path, manifest_path).");
}
