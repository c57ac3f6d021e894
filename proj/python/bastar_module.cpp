#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bastar/harness.hpp"

namespace py = pybind11;
using namespace bastar;

namespace {

StakeAggregates make_aggregates(double S_L, double S_M, double S_K, double s_l_min,
                                double s_m_min, double s_k_min) {
    StakeAggregates agg;
    agg.S_L = algos_to_micro(S_L);
    agg.S_M = algos_to_micro(S_M);
    agg.S_K = algos_to_micro(S_K);
    agg.s_l_min = algos_to_micro(s_l_min);
    agg.s_m_min = algos_to_micro(s_m_min);
    agg.s_k_min = algos_to_micro(s_k_min);
    return agg;
}

} // namespace

PYBIND11_MODULE(bastar_py, m) {
    m.doc() = "Byzantine-agreement consensus simulator with incentive accounting";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SimError>(m, "SimError");

    py::class_<CostModel>(m, "CostModel")
        .def(py::init<>())
        .def_readwrite("c_ve", &CostModel::c_ve)
        .def_readwrite("c_se", &CostModel::c_se)
        .def_readwrite("c_so", &CostModel::c_so)
        .def_readwrite("c_go", &CostModel::c_go)
        .def_readwrite("c_vs", &CostModel::c_vs)
        .def_readwrite("c_vc", &CostModel::c_vc)
        .def_readwrite("c_bl", &CostModel::c_bl)
        .def_readwrite("c_bs", &CostModel::c_bs)
        .def_readwrite("c_vo", &CostModel::c_vo)
        .def("c_fix", &CostModel::c_fix)
        .def("c_L", &CostModel::c_L)
        .def("c_M", &CostModel::c_M)
        .def("c_K", &CostModel::c_K);

    m.def(
        "deviation_bounds",
        [](double S_L, double S_M, double S_K, double s_l, double s_m, double s_k,
           double alpha, double beta, const CostModel& costs) {
            const BoundSet b = deviation_bounds(
                costs, make_aggregates(S_L, S_M, S_K, s_l, s_m, s_k), alpha, beta);
            return py::make_tuple(b.bound_L, b.bound_M, b.bound_K, b.feasible);
        },
        py::arg("S_L"), py::arg("S_M"), py::arg("S_K"), py::arg("s_l_min"),
        py::arg("s_m_min"), py::arg("s_k_min"), py::arg("alpha"), py::arg("beta"),
        py::arg("costs") = CostModel{},
        "Deviation bounds (bound_L, bound_M, bound_K, feasible), stakes in Algos");

    m.def(
        "compute_parameters",
        [](double S_L, double S_M, double S_K, double s_l, double s_m, double s_k,
           const CostModel& costs, double resolution, double alpha_min, double alpha_max,
           double beta_min, double beta_max) {
            OptimizerConfig opt;
            opt.resolution = resolution;
            opt.alpha_min = alpha_min;
            opt.alpha_max = alpha_max;
            opt.beta_min = beta_min;
            opt.beta_max = beta_max;
            const OptimizerResult r = compute_parameters(
                make_aggregates(S_L, S_M, S_K, s_l, s_m, s_k), costs, opt);
            py::dict out;
            out["alpha"] = r.alpha;
            out["beta"] = r.beta;
            out["gamma"] = r.gamma;
            out["B"] = r.B_algos;
            out["binding_bound"] = binding_name(r.binding);
            return out;
        },
        py::arg("S_L"), py::arg("S_M"), py::arg("S_K"), py::arg("s_l_min") = 1.0,
        py::arg("s_m_min") = 1.0, py::arg("s_k_min") = 10.0, py::arg("costs") = CostModel{},
        py::arg("resolution") = 0.005, py::arg("alpha_min") = 0.01,
        py::arg("alpha_max") = 0.04, py::arg("beta_min") = 0.02, py::arg("beta_max") = 0.05,
        "Minimum incentive-compatible round reward via the grid optimizer");

    m.def(
        "generate_stakes",
        [](const std::string& distribution, std::uint32_t nodes, double a, double b,
           std::uint64_t seed) {
            StakeDistributionSpec spec;
            spec.node_count = nodes;
            if (distribution == "uniform") {
                spec.kind = StakeDistributionSpec::Kind::Uniform;
                spec.lo = a;
                spec.hi = b;
            } else if (distribution == "normal") {
                spec.kind = StakeDistributionSpec::Kind::Normal;
                spec.mean = a;
                spec.stddev = b;
            } else {
                throw ConfigError("distribution must be `uniform` or `normal`");
            }
            const StakeLedger ledger = generate_stakes(spec, seed);
            std::vector<double> algos(ledger.node_count());
            for (std::size_t i = 0; i < algos.size(); ++i) algos[i] = to_algos(ledger.micro[i]);
            return algos;
        },
        py::arg("distribution"), py::arg("nodes"), py::arg("a"), py::arg("b"),
        py::arg("seed") = 42, "Stake balances in Algos for a uniform(lo,hi)/normal(mean,sd) spec");

    m.def(
        "run_scenario_from_config",
        [](const std::string& text) {
            const ScenarioConfig sc =
                ScenarioConfig::from_config(ConfigFile::parse_string(text, "<python>"));
            const RunReport report = run_scenario(sc);
            py::list rows;
            for (const RoundRow& row : report.rows) {
                py::dict d;
                d["replication"] = row.replication;
                d["round"] = row.round;
                d["final_frac"] = row.final_frac;
                d["tentative_frac"] = row.tentative_frac;
                d["noblock_frac"] = row.noblock_frac;
                d["block_added"] = row.block_added;
                d["steps_used"] = row.steps_used;
                d["synchrony"] = synchrony_name(row.sync);
                d["B_microalgos"] = row.B_micro;
                d["paid_microalgos"] = row.paid_micro;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config_text"), "Run a scenario from config-file text; returns per-round rows");

    m.def("trimmed_mean", [](std::vector<double> xs, double trim) {
        return trimmed_mean(std::move(xs), trim);
    }, py::arg("samples"), py::arg("trim") = 0.2);
}
