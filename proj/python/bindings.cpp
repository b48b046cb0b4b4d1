#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nashpricing/equilibrium.hpp"
#include "nashpricing/harness.hpp"
#include "nashpricing/small_game.hpp"
#include "nashpricing/turbo.hpp"

namespace py = pybind11;
using namespace nashpricing;

namespace {

// JSON crosses the boundary as text; the Python wrapper does dumps/loads.
TrainConfig config_from(const std::string& text) {
  return text.empty() ? TrainConfig{} : nlohmann::json::parse(text).get<TrainConfig>();
}

py::dict report_dict(const TrainReport& r) {
  py::dict d;
  d["market_mean"] = r.market_mean;
  d["agent0_mean"] = r.agent0_mean;
  d["episode_steps"] = r.episode_steps;
  std::vector<double> q, psi, gamma;
  for (const auto& l : r.losses) {
    q.push_back(l.loss_q);
    psi.push_back(l.loss_psi);
    gamma.push_back(l.loss_gamma);
  }
  d["loss_q"] = q;
  d["loss_psi"] = psi;
  d["loss_gamma"] = gamma;
  d["delta_trace"] = r.delta_trace;
  d["turbo_calls"] = r.turbo_calls;
  d["guard_violations"] = r.guard_violations;
  d["wall_seconds"] = r.wall_seconds;
  d["aborted"] = r.aborted;
  d["error"] = r.error;
  d["rewards_csv"] = r.rewards_csv();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::class_<MarketParams>(m, "MarketParams")
      .def(py::init<>())
      .def_readwrite("beta0", &MarketParams::beta0)
      .def_readwrite("beta1", &MarketParams::beta1)
      .def_readwrite("beta2", &MarketParams::beta2)
      .def_readwrite("a", &MarketParams::a)
      .def_readwrite("b", &MarketParams::b)
      .def_readwrite("n_agents", &MarketParams::n_agents)
      .def_readwrite("price_grid", &MarketParams::price_grid)
      .def("validate", &MarketParams::validate);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("params", &Scenario::params)
      .def_readonly("noise_sigma", &Scenario::noise_sigma)
      .def_readonly("epsilon_threshold", &Scenario::epsilon_threshold);

  m.def("scenario_names", &scenario_names);
  m.def("find_scenario", &find_scenario, py::arg("name"), py::arg("n_agents") = 3,
        py::arg("action_dims") = 10);

  m.def(
      "expected_demand",
      [](const MarketParams& p, double mean_price, double reference_price) {
        return expected_demand(p, mean_price, reference_price).value;
      },
      py::arg("params"), py::arg("mean_price"), py::arg("reference_price"));
  m.def(
      "win_probabilities",
      [](const MarketParams& p, const std::vector<double>& prices) {
        return win_probabilities(p, prices);
      },
      py::arg("params"), py::arg("prices"));
  m.def(
      "expected_profits",
      [](const MarketParams& p, const std::vector<double>& prices, double reference_price) {
        return expected_profits(p, MarketObservation::from_prices(prices, reference_price));
      },
      py::arg("params"), py::arg("prices"), py::arg("reference_price"));

  m.def(
      "optimal_deviation",
      [](const MarketParams& p, double mean_price, double reference_price, bool admissible) {
        DeviationOptions opt;
        if (admissible) opt.domain = DeviationDomain::kAdmissible;
        const auto r = optimal_deviation(DeviationContext::make(p, mean_price, reference_price), opt);
        return py::make_tuple(r.d_star, r.epsilon);
      },
      py::arg("params"), py::arg("mean_price"), py::arg("reference_price"),
      py::arg("admissible") = false);
  m.def(
      "epsilon_surface",
      [](const MarketParams& p, const std::vector<double>& x_grid,
         const std::vector<double>& p_grid, double threshold) {
        const auto s = epsilon_surface(p, x_grid, p_grid, threshold);
        py::dict d;
        d["x_grid"] = s.x_grid;
        d["p_grid"] = s.p_grid;
        d["epsilon"] = s.epsilon;
        d["ne_mask"] = std::vector<bool>(s.ne_mask.begin(), s.ne_mask.end());
        return d;
      },
      py::arg("params"), py::arg("x_grid"), py::arg("p_grid"), py::arg("threshold") = 1e-4);

  m.def(
      "turbo_optimize",
      [](const std::function<double(std::vector<double>)>& f, std::vector<int> blocks,
         int max_evals, int batch, std::uint64_t seed, bool minimize) {
        TurboOptions opt;
        opt.max_evals = max_evals;
        opt.batch = batch;
        const auto r = optimize(
            [&](std::span<const double> x) { return f({x.begin(), x.end()}); },
            SimplexLayout{std::move(blocks)}, opt, seed,
            minimize ? OptimizeMode::kMinimize : OptimizeMode::kMaximize);
        return py::make_tuple(r.best_point, r.best_value, r.evaluations, r.guard_violations);
      },
      py::arg("objective"), py::arg("blocks"), py::arg("max_evals") = 10,
      py::arg("batch") = 4, py::arg("seed") = 0, py::arg("minimize") = false);

  m.def(
      "small_game_delta_bound",
      [](double gamma) {
        const auto c = check_delta_bound(desk_game(), gamma);
        return py::make_tuple(c.pass, c.worst_excess, c.comparisons);
      },
      py::arg("gamma") = 0.9);

  m.def("default_config_json", [] { return nlohmann::json(TrainConfig{}).dump(); });
  m.def(
      "train",
      [](const MarketParams& p, const std::string& config, std::uint64_t seed, bool baseline) {
        const TrainConfig c = config_from(config);
        py::gil_scoped_release release;
        TrainReport r = baseline ? train_baseline(p, c, seed) : train(p, c, seed);
        py::gil_scoped_acquire acquire;
        return report_dict(r);
      },
      py::arg("params"), py::arg("config") = "", py::arg("seed") = 0,
      py::arg("baseline") = false);

  m.def(
      "cmd_surface",
      [](const std::string& scenario, int resolution, const fs::path& out) {
        cmd_surface(find_scenario(scenario), resolution, out);
      },
      py::arg("scenario"), py::arg("resolution"), py::arg("out"));
  m.def(
      "cmd_verify",
      [](const std::string& scenario, const fs::path& out, int samples) {
        VerifyOptions opt;
        opt.samples = samples;
        return cmd_verify(find_scenario(scenario), out, opt).dump();
      },
      py::arg("scenario"), py::arg("out"), py::arg("samples") = 1000);
  m.def(
      "cmd_train",
      [](const std::string& scenario, const std::string& config,
         const std::vector<std::uint64_t>& seeds, const std::string& mode, int jobs,
         const fs::path& out) {
        TrainRequest req;
        req.config = config_from(config);
        req.scenario = find_scenario(scenario, 3, req.config.action_dims);
        req.seeds = seeds;
        req.mode = parse_train_mode(mode);
        req.jobs = jobs;
        py::gil_scoped_release release;
        const auto s = cmd_train(req, out);
        py::gil_scoped_acquire acquire;
        return s.to_json().dump();
      },
      py::arg("scenario"), py::arg("config"), py::arg("seeds"), py::arg("mode"),
      py::arg("jobs"), py::arg("out"));
}
