#include "admctl/robustness.hpp"

#include <algorithm>
#include <thread>

namespace admctl {

EffectiveParams effective_action_params(double true_bandwidth, double load,
                                        double nominal_reward_rate) {
    if (!(true_bandwidth > 0.0))
        throw validation_error("true bandwidth must be positive");
    if (!(load >= 0.0) || !(nominal_reward_rate >= 0.0))
        throw validation_error("load and reward rate must be non-negative");
    EffectiveParams p;
    p.elastic_rate = std::max(0.0, true_bandwidth - load);
    p.inelastic_rate = load <= true_bandwidth ? nominal_reward_rate : 0.0;
    return p;
}

ControlSpace apply_true_model(const ControlSpace &nominal,
                              std::span<const InelasticFlowSpec> flows,
                              const TrueModelOverride &truth) {
    if (truth.flow_loads && truth.flow_loads->size() != flows.size())
        throw validation_error("true load list does not match the scenario's flow list");
    ControlSpace adjusted = nominal;
    adjusted.bandwidth = truth.bandwidth;
    adjusted.congestion_adjusted = true;
    for (auto &action : adjusted.actions) {
        double load = action.load;
        if (truth.flow_loads) {
            load = 0.0;
            for (int f : action.member_flows)
                load += (*truth.flow_loads)[static_cast<std::size_t>(f)];
        }
        EffectiveParams p =
            effective_action_params(truth.bandwidth, load, action.inelastic_reward_rate);
        action.load = load;
        action.elastic_rate = p.elastic_rate;
        action.inelastic_reward_rate = p.inelastic_rate;
    }
    return adjusted;
}

Matrix rate_bound_cost(const Discretization &d, double rate_bound,
                       double deadline_reward_over_horizon) {
    if (!(rate_bound >= 0.0))
        throw validation_error("rate bound must be non-negative");
    if (rate_bound == 0.0)
        return Matrix();
    Matrix penalty(d.stages, d.steps + 1);
    const double per_stage = deadline_reward_over_horizon * d.stage_length;
    for (int k = 0; k < d.stages; ++k) {
        const double t = (k + 1 == d.stages) ? d.horizon : (k + 1) * d.stage_length;
        const double line = d.total_size - rate_bound * t;
        for (int xp = 0; xp <= d.steps; ++xp) {
            const double s = xp == d.steps ? 0.0 : d.total_size - xp * d.step_size;
            penalty(k, xp) = s > line ? per_stage : 0.0;
        }
    }
    return penalty;
}

namespace {

void require_plain(const LinkScenario &scenario) {
    for (const auto &f : scenario.flows)
        if (f.stateful)
            throw validation_error(
                "model-mismatch analysis supports stateless scenarios only");
}

struct TrueSide {
    SspModel model;
    SolveResult solved;
    CostVector omniscient;
};

TrueSide build_true_side(const LinkScenario &scenario, const Discretization &d,
                         const ControlSpace &nominal_space, const TrueModelOverride &truth) {
    ControlSpace true_space = apply_true_model(nominal_space, scenario.flows, truth);
    LinkScenario true_scenario = scenario;
    true_scenario.bandwidth = truth.bandwidth;
    true_scenario.rate_bound = 0.0; // shaping is a property of the nominal solve only
    TrueSide side;
    side.model = assemble_model(true_scenario, d, true_space,
                                action_step_distributions(true_space, d));
    side.solved = solve(side.model);
    side.omniscient = decompose_cost(side.model, side.solved.policy);
    return side;
}

} // namespace

MismatchReport mismatch_eval(const LinkScenario &scenario, const Discretization &d,
                             const TrueModelOverride &truth) {
    scenario.validate();
    require_plain(scenario);

    ControlSpace nominal_space =
        calibrate_rewards(build_control_space(scenario.flows, scenario.bandwidth),
                          scenario.elastic_reward, scenario.elastic_deadline);
    SspModel nominal_model = assemble_model(scenario, d, nominal_space,
                                            action_step_distributions(nominal_space, d));
    SolveResult nominal = solve(nominal_model);

    TrueSide side = build_true_side(scenario, d, nominal_space, truth);

    MismatchReport report;
    report.nominal_policy = nominal.policy;
    report.omniscient_policy = side.solved.policy;
    report.nominal_cost = decompose_cost(side.model, nominal.policy);
    report.omniscient_cost = side.omniscient;
    report.gap.resize(report.nominal_cost.total.size());
    for (std::size_t i = 0; i < report.gap.size(); ++i)
        report.gap[i] = report.nominal_cost.total[i] - report.omniscient_cost.total[i];
    return report;
}

std::vector<RateBoundSweepRow> ratebound_sweep(const LinkScenario &scenario,
                                               const Discretization &d,
                                               std::span<const double> rate_bounds,
                                               std::span<const TrueModelOverride> truths,
                                               int parallelism) {
    scenario.validate();
    require_plain(scenario);
    if (rate_bounds.empty() || truths.empty())
        throw validation_error("rate-bound sweep needs at least one bound and one truth");

    ControlSpace nominal_space =
        calibrate_rewards(build_control_space(scenario.flows, scenario.bandwidth),
                          scenario.elastic_reward, scenario.elastic_deadline);

    std::vector<TrueSide> sides;
    sides.reserve(truths.size());
    for (const auto &truth : truths)
        sides.push_back(build_true_side(scenario, d, nominal_space, truth));

    std::vector<double> grid(rate_bounds.begin(), rate_bounds.end());
    std::sort(grid.begin(), grid.end());

    std::vector<RateBoundSweepRow> rows(grid.size() * truths.size());
    auto run_point = [&](std::size_t gi) {
        LinkScenario shaped = scenario;
        shaped.rate_bound = grid[gi];
        SspModel nominal_model = assemble_model(shaped, d, nominal_space,
                                                action_step_distributions(nominal_space, d));
        Policy shaped_policy = solve(nominal_model).policy;
        for (std::size_t ti = 0; ti < sides.size(); ++ti) {
            const TrueSide &side = sides[ti];
            CostVector nominal_cost = decompose_cost(side.model, shaped_policy);
            const long init = side.model.initial_state();
            RateBoundSweepRow row;
            row.rate_bound = grid[gi];
            row.true_bandwidth = truths[ti].bandwidth;
            row.elastic_nominal = -nominal_cost.elastic[init];
            row.inelastic_nominal = -nominal_cost.inelastic[init];
            row.elastic_omniscient = -side.omniscient.elastic[init];
            row.inelastic_omniscient = -side.omniscient.inelastic[init];
            rows[gi * truths.size() + ti] = row;
        }
    };

    int workers = std::max(1, parallelism);
    if (workers == 1) {
        for (std::size_t gi = 0; gi < grid.size(); ++gi)
            run_point(gi);
    } else {
        std::vector<std::thread> pool;
        std::size_t per = (grid.size() + workers - 1) / workers;
        for (int t = 0; t < workers; ++t) {
            std::size_t begin = t * per;
            std::size_t end = std::min(grid.size(), begin + per);
            if (begin >= end)
                break;
            pool.emplace_back([&, begin, end] {
                for (std::size_t gi = begin; gi < end; ++gi)
                    run_point(gi);
            });
        }
        for (auto &t : pool)
            t.join();
    }
    return rows;
}

} // namespace admctl
