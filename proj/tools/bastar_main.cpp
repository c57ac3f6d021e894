// Command line front end: scenario simulation, defection sweeps, reward
// mechanism comparison and the incentive-compatible parameter solver.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "bastar/harness.hpp"

namespace {

using namespace bastar;

ScenarioConfig load_scenario(const std::string& path, std::int64_t seed_override) {
    const ConfigFile cfg = ConfigFile::parse_file(path);
    ScenarioConfig sc = ScenarioConfig::from_config(cfg);
    if (seed_override >= 0) sc.master_seed = static_cast<std::uint64_t>(seed_override);
    sc.validate();
    return sc;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SimError("cannot open output file: " + path.string());
    fn(os);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override) {
    const ScenarioConfig sc = load_scenario(config_path, seed_override);
    const RunReport report = run_scenario(sc);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file(dir / "rounds.csv", [&](std::ostream& os) { write_rows_csv(os, report); });
    write_file(dir / "fractions.csv", [&](std::ostream& os) { write_fig3_csv(os, report); });
    write_file(dir / "ledger.csv", [&](std::ostream& os) { os << report.ledger_csv; });
    if (sc.dump_outcomes)
        write_file(dir / "outcomes.csv",
                   [&](std::ostream& os) { write_outcome_dump_csv(os, report); });
    if (sc.dump_payments)
        write_file(dir / "payments.csv",
                   [&](std::ostream& os) { write_payment_dump_csv(os, report); });
    if (sc.dump_behavior)
        write_file(dir / "behavior.csv",
                   [&](std::ostream& os) { write_behavior_dump_csv(os, report); });
    if (sc.dump_reach)
        write_file(dir / "reach.csv",
                   [&](std::ostream& os) { write_reach_dump_csv(os, report); });
    for (const auto& [rep, what] : report.aborted)
        std::cerr << "warning: replication " << rep << " aborted: " << what << "\n";
    std::cout << "simulate: " << sc.replications << " replications x " << sc.rounds
              << " rounds, reports in " << out_dir << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::vector<double> rates_percent, std::int64_t seed_override) {
    const ScenarioConfig sc = load_scenario(config_path, seed_override);
    if (rates_percent.empty()) rates_percent = {0, 5, 10, 15, 20, 25, 30};
    std::vector<double> rates;
    for (double r : rates_percent) rates.push_back(r / 100.0);
    const auto results = defection_sweep(sc, rates);
    std::filesystem::create_directories(out_dir);
    for (const auto& res : results) {
        char name[48];
        std::snprintf(name, sizeof(name), "fig3_%02d.csv",
                      static_cast<int>(res.rate * 100.0 + 0.5));
        write_file(std::filesystem::path(out_dir) / name,
                   [&](std::ostream& os) { write_fig3_csv(os, res.report); });
    }
    std::cout << "sweep: wrote " << results.size() << " rate reports to " << out_dir << "\n";
    return 0;
}

std::string distribution_tag(const StakeDistributionSpec& spec) {
    char buf[64];
    if (spec.kind == StakeDistributionSpec::Kind::Uniform)
        std::snprintf(buf, sizeof(buf), "uniform_%g_%g", spec.lo, spec.hi);
    else
        std::snprintf(buf, sizeof(buf), "normal_%g_%g", spec.mean, spec.stddev);
    return buf;
}

int cmd_compare_rewards(const std::string& config_path, const std::string& out_dir,
                        std::vector<double> w_floors, std::int64_t seed_override) {
    ScenarioConfig sc = load_scenario(config_path, seed_override);
    const RewardComparisonReport base = reward_comparison(sc);
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "fig6.csv",
               [&](std::ostream& os) { write_fig6_csv(os, base); });
    write_file(std::filesystem::path(out_dir) / ("fig5_" + distribution_tag(sc.stakes) + ".csv"),
               [&](std::ostream& os) { write_fig5_csv(os, base); });
    if (!w_floors.empty()) {
        std::vector<RewardComparisonReport> reports;
        for (double w : w_floors) {
            ScenarioConfig wc = sc;
            wc.mechanism.reward_floor_w_micro = algos_to_micro(w);
            reports.push_back(reward_comparison(wc));
        }
        write_file(std::filesystem::path(out_dir) / "fig7.csv",
                   [&](std::ostream& os) { write_fig7_csv(os, w_floors, reports); });
    }
    std::cout << "compare-rewards: reports in " << out_dir << "\n";
    return 0;
}

int cmd_compute_parameters(const std::string& config_path) {
    const ConfigFile cfg = ConfigFile::parse_file(config_path);

    StakeAggregates agg;
    agg.S_L = algos_to_micro(cfg.get_double("parameters.S_L", 0.0));
    agg.S_M = algos_to_micro(cfg.get_double("parameters.S_M", 0.0));
    agg.S_K = algos_to_micro(cfg.get_double("parameters.S_K", 0.0));
    agg.s_l_min = algos_to_micro(cfg.get_double("parameters.s_l_min", 1.0));
    agg.s_m_min = algos_to_micro(cfg.get_double("parameters.s_m_min", 1.0));
    agg.s_k_min = algos_to_micro(cfg.get_double("parameters.s_k_min", 10.0));

    CostModel costs;
    costs.c_ve = cfg.get_int("costs.c_ve", costs.c_ve);
    costs.c_se = cfg.get_int("costs.c_se", costs.c_se);
    costs.c_so = cfg.get_int("costs.c_so", costs.c_so);
    costs.c_go = cfg.get_int("costs.c_go", costs.c_go);
    costs.c_vs = cfg.get_int("costs.c_vs", costs.c_vs);
    costs.c_vc = cfg.get_int("costs.c_vc", costs.c_vc);
    costs.c_bl = cfg.get_int("costs.c_bl", costs.c_bl);
    costs.c_bs = cfg.get_int("costs.c_bs", costs.c_bs);
    costs.c_vo = cfg.get_int("costs.c_vo", costs.c_vo);

    OptimizerConfig opt;
    opt.resolution = cfg.get_double("optimizer.resolution", 0.005);
    opt.alpha_min = cfg.get_double("optimizer.alpha_min", 0.01);
    opt.alpha_max = cfg.get_double("optimizer.alpha_max", 0.04);
    opt.beta_min = cfg.get_double("optimizer.beta_min", 0.02);
    opt.beta_max = cfg.get_double("optimizer.beta_max", 0.05);
    opt.epsilon = cfg.get_double("optimizer.epsilon", 1e-6);
    opt.refine_iterations = static_cast<int>(cfg.get_int("optimizer.refine_iterations", 100));

    const OptimizerResult r = compute_parameters(agg, costs, opt);
    std::cout << "alpha,beta,gamma,B_i,binding_bound\n";
    std::cout << format_g9(r.alpha) << ',' << format_g9(r.beta) << ',' << format_g9(r.gamma)
              << ',' << format_g9(r.B_algos) << ',' << binding_name(r.binding) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-agreement consensus simulator with incentive accounting"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::int64_t seed_override = -1;
    std::vector<double> rates, w_floors;

    auto* simulate = app.add_subcommand("simulate", "Run a scenario and dump round reports");
    simulate->add_option("--config", config_path, "Scenario config file")->required();
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_option("--seed", seed_override, "Master seed override");

    auto* sweep = app.add_subcommand("sweep", "Defection-rate sweep with common random numbers");
    sweep->add_option("--config", config_path, "Scenario config file")->required();
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--rates", rates, "Defection rates in percent")->delimiter(',');
    sweep->add_option("--seed", seed_override, "Master seed override");

    auto* compare = app.add_subcommand("compare-rewards",
                                       "Foundation vs role-based reward series");
    compare->add_option("--config", config_path, "Scenario config file")->required();
    compare->add_option("--out", out_dir, "Output directory");
    compare->add_option("--w-floors", w_floors, "U^w stake floors in Algos")->delimiter(',');
    compare->add_option("--seed", seed_override, "Master seed override");

    auto* params = app.add_subcommand("compute-parameters",
                                      "Minimum incentive-compatible round reward");
    params->add_option("--config", config_path, "Parameter config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_dir, seed_override);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, rates, seed_override);
        if (compare->parsed())
            return cmd_compare_rewards(config_path, out_dir, w_floors, seed_override);
        if (params->parsed()) return cmd_compute_parameters(config_path);
    } catch (const bastar::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
