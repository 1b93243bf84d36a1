#include "admctl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "admctl/csv.hpp"
#include "admctl/pipeline.hpp"
#include "admctl/robustness.hpp"
#include "admctl/sim.hpp"

namespace admctl {

namespace {

using nlohmann::ordered_json;

int parallelism_from_env() {
    const char *raw = std::getenv("ADMCTL_THREADS");
    if (raw == nullptr || *raw == '\0')
        return 1;
    char *end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == nullptr || *end != '\0' || v < 1 || v > 1024)
        throw validation_error("ADMCTL_THREADS must be a positive integer");
    return static_cast<int>(v);
}

std::string emit(const std::filesystem::path &dir, const std::string &name,
                 const std::string &content) {
    std::filesystem::create_directories(dir);
    const std::string path = (dir / name).string();
    write_file(path, content);
    std::printf("wrote %s\n", path.c_str());
    return name;
}

void emit_summary(const std::filesystem::path &dir, const ordered_json &summary) {
    emit(dir, "summary.json", summary.dump(2) + "\n");
}

ordered_json utility_block(const SspModel &model, const CostVector &parts) {
    const auto init = static_cast<std::size_t>(model.initial_state());
    ordered_json block;
    block["total"] = -parts.total[init];
    block["elastic"] = -parts.elastic[init];
    block["inelastic"] = -parts.inelastic[init];
    block["rate_penalty"] = parts.ratebound[init];
    return block;
}

void cmd_risk(const std::string &scenario_path, const std::vector<double> &grid,
              const std::filesystem::path &out) {
    const ScenarioFile file = load_scenario_file(scenario_path);
    ordered_json reports = ordered_json::array();
    for (double rate : grid) {
        const RiskReport report = fixed_rate_risk(file.disc, rate);
        const std::string name = "risk_" + format_double(rate) + ".csv";
        emit(out, name, risk_csv(report.envelope));
        ordered_json entry;
        entry["rate"] = rate;
        entry["miss_risk"] = report.miss_risk;
        entry["file"] = name;
        reports.push_back(entry);
    }
    ordered_json summary;
    summary["command"] = "risk";
    summary["scenario"] = scenario_path;
    summary["reports"] = reports;
    emit_summary(out, summary);
}

void cmd_solve(const std::string &scenario_path, const std::filesystem::path &out) {
    const ScenarioFile file = load_scenario_file(scenario_path);
    const ModelBundle bundle = build_model(file);
    const SolveResult solved = solve(bundle.model);
    const CostVector parts = decompose_cost(bundle.model, solved.policy);
    emit(out, "policy.csv", policy_csv(bundle.model, solved.policy));
    emit(out, "value.csv", value_csv(bundle.model, parts));
    ordered_json summary;
    summary["command"] = "solve";
    summary["scenario"] = scenario_path;
    summary["states"] = bundle.model.state_count();
    summary["actions"] = bundle.model.action_count();
    summary["levels"] = bundle.model.levels;
    summary["lambda_I"] = bundle.model.lambda_inelastic;
    summary["utility"] = utility_block(bundle.model, parts);
    emit_summary(out, summary);
}

void cmd_evaluate(const std::string &scenario_path, const std::string &policy_path,
                  const std::filesystem::path &out) {
    const ScenarioFile file = load_scenario_file(scenario_path);
    const ModelBundle bundle = build_model(file);
    const Policy policy = parse_policy_csv(read_file(policy_path), bundle.model);
    const CostVector parts = decompose_cost(bundle.model, policy);
    emit(out, "value.csv", value_csv(bundle.model, parts));
    ordered_json summary;
    summary["command"] = "evaluate";
    summary["scenario"] = scenario_path;
    summary["policy"] = policy_path;
    summary["utility"] = utility_block(bundle.model, parts);
    emit_summary(out, summary);
}

void cmd_simulate(const std::string &scenario_path, const std::string &policy_path,
                  int count, std::uint64_t seed, const std::filesystem::path &out) {
    if (count < 1)
        throw validation_error("--count must be at least 1");
    const ScenarioFile file = load_scenario_file(scenario_path);
    const ModelBundle bundle = build_model(file);
    const Policy policy = parse_policy_csv(read_file(policy_path), bundle.model);

    const int emitted = std::min(count, 20);
    ordered_json files = ordered_json::array();
    for (int t = 0; t < emitted; ++t) {
        const Trajectory tr = sample_trajectory(bundle.model, policy, seed,
                                                static_cast<std::uint64_t>(t));
        char name[32];
        std::snprintf(name, sizeof name, "traj_%03d.csv", t);
        emit(out, name, trajectory_csv(tr));
        files.push_back(std::string(name));
    }
    const BatchStats stats =
        simulate_batch(bundle.model, policy, seed, count, parallelism_from_env());

    ordered_json summary;
    summary["command"] = "simulate";
    summary["scenario"] = scenario_path;
    summary["policy"] = policy_path;
    summary["seed"] = seed;
    summary["count"] = count;
    ordered_json s;
    s["mean_total_reward"] = stats.mean_total;
    s["half_width_total"] = 1.96 * stats.se_total;
    s["mean_elastic_reward"] = stats.mean_elastic;
    s["half_width_elastic"] = 1.96 * stats.se_elastic;
    s["mean_inelastic_reward"] = stats.mean_inelastic;
    s["half_width_inelastic"] = 1.96 * stats.se_inelastic;
    s["mean_rate_penalty"] = stats.mean_penalty;
    s["completion_rate"] = stats.completion_rate;
    s["half_width_completion"] = 1.96 * stats.se_completion;
    summary["stats"] = s;
    summary["trajectory_files"] = files;
    emit_summary(out, summary);
}

void cmd_sweep_lambda(const std::string &scenario_path, const std::vector<double> &grid,
                      const std::filesystem::path &out) {
    const ScenarioFile file = load_scenario_file(scenario_path);
    const auto rows = lambda_sweep(file, grid, parallelism_from_env());
    emit(out, "lambda_sweep.csv", lambda_sweep_csv(rows));
    ordered_json summary;
    summary["command"] = "sweep-lambda";
    summary["scenario"] = scenario_path;
    summary["points"] = rows.size();
    emit_summary(out, summary);
}

void cmd_sweep_ratebound(const std::string &scenario_path, const std::vector<double> &grid,
                         std::vector<double> true_bandwidths,
                         const std::filesystem::path &out) {
    const ScenarioFile file = load_scenario_file(scenario_path);
    for (double r : grid)
        if (!(r >= 0.0))
            throw validation_error("rate bounds must be non-negative");
    if (true_bandwidths.empty())
        true_bandwidths.push_back(file.scenario.bandwidth);
    std::vector<TrueModelOverride> truths;
    truths.reserve(true_bandwidths.size());
    for (double b : true_bandwidths) {
        if (!(b > 0.0))
            throw validation_error("true bandwidths must be positive");
        truths.push_back({b, std::nullopt});
    }
    const auto rows =
        ratebound_sweep(file.scenario, file.disc, grid, truths, parallelism_from_env());
    emit(out, "ratebound_sweep.csv", ratebound_sweep_csv(rows));
    ordered_json summary;
    summary["command"] = "sweep-ratebound";
    summary["scenario"] = scenario_path;
    summary["points"] = rows.size();
    emit_summary(out, summary);
}

} // namespace

int run_cli(int argc, char **argv) {
    CLI::App app{"Admission control for inelastic flows sharing a link with a "
                 "deadline-driven elastic flow"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string policy_path;
    std::string out_dir = ".";
    std::vector<double> grid;
    std::vector<double> true_bandwidths;
    std::uint64_t seed = 0;
    int count = 1000;

    const auto add_scenario = [&](CLI::App *sub) {
        sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
        sub->add_option("--out", out_dir, "Output directory (created if missing)");
    };

    CLI::App *risk = app.add_subcommand("risk", "Deadline-risk reports for fixed service rates");
    add_scenario(risk);
    risk->add_option("--grid", grid, "Comma-separated service rates in Mbps")
        ->required()
        ->delimiter(',');

    CLI::App *solve_cmd = app.add_subcommand("solve", "Solve the scenario for an optimal policy");
    add_scenario(solve_cmd);

    CLI::App *evaluate = app.add_subcommand("evaluate", "Evaluate a policy file on the scenario");
    add_scenario(evaluate);
    evaluate->add_option("--policy", policy_path, "Policy CSV to evaluate")->required();

    CLI::App *simulate = app.add_subcommand("simulate", "Sample seeded trajectories under a policy");
    add_scenario(simulate);
    simulate->add_option("--policy", policy_path, "Policy CSV to simulate")->required();
    simulate->add_option("--count", count, "Number of trajectories");
    simulate->add_option("--seed", seed, "Seed for the trajectory sampler");

    CLI::App *sweep_l = app.add_subcommand("sweep-lambda", "Utility frontier over inelastic weights");
    add_scenario(sweep_l);
    sweep_l->add_option("--grid", grid, "Comma-separated lambda values")
        ->required()
        ->delimiter(',');

    CLI::App *sweep_r =
        app.add_subcommand("sweep-ratebound", "Nominal vs omniscient utility over rate bounds");
    add_scenario(sweep_r);
    sweep_r->add_option("--grid", grid, "Comma-separated rate bounds R0 in Mbps")
        ->required()
        ->delimiter(',');
    sweep_r->add_option("--true-bandwidth", true_bandwidths,
                        "Comma-separated true bandwidths (default: the nominal one)")
        ->delimiter(',');

    risk->callback([&] { cmd_risk(scenario_path, grid, out_dir); });
    solve_cmd->callback([&] { cmd_solve(scenario_path, out_dir); });
    evaluate->callback([&] { cmd_evaluate(scenario_path, policy_path, out_dir); });
    simulate->callback([&] { cmd_simulate(scenario_path, policy_path, count, seed, out_dir); });
    sweep_l->callback([&] { cmd_sweep_lambda(scenario_path, grid, out_dir); });
    sweep_r->callback([&] { cmd_sweep_ratebound(scenario_path, grid, true_bandwidths, out_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const capacity_error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::domain_error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

} // namespace admctl
