#include "admctl/pipeline.hpp"

#include <algorithm>
#include <thread>

namespace admctl {

ModelBundle build_model(const ScenarioFile &file, std::size_t memory_cap) {
    const LinkScenario &sc = file.scenario;
    sc.validate();

    ModelBundle out;
    if (file.stateful) {
        std::vector<InelasticFlowSpec> stateless;
        for (const auto &f : sc.flows)
            if (!f.stateful)
                stateless.push_back(f);
        ControlSpace raw = build_control_space(stateless, sc.bandwidth);
        ControlSpace composite = build_composite_control_space(
            raw, file.stateful_load(), file.stateful_reward_rate());
        out.control = calibrate_rewards(std::move(composite), sc.elastic_reward,
                                        sc.elastic_deadline);
        const auto dists = action_step_distributions(out.control, file.disc);
        SspModel base = assemble_model(sc, file.disc, out.control, dists);
        out.chain = build_level_chain(*file.stateful);
        out.model = augment_model(base, *out.chain, memory_cap);
    } else {
        out.control = calibrate_rewards(build_control_space(sc.flows, sc.bandwidth),
                                        sc.elastic_reward, sc.elastic_deadline);
        const auto dists = action_step_distributions(out.control, file.disc);
        out.model = assemble_model(sc, file.disc, out.control, dists);
    }
    return out;
}

std::vector<LambdaSweepRow> lambda_sweep(const ScenarioFile &file,
                                         std::span<const double> lambdas,
                                         int parallelism) {
    if (lambdas.empty())
        throw validation_error("lambda sweep needs a non-empty grid");
    for (double l : lambdas)
        if (!(l >= 0.0))
            throw validation_error("lambda values must be non-negative");

    const ModelBundle bundle = build_model(file);
    std::vector<LambdaSweepRow> rows(lambdas.size());

    auto run_point = [&](std::size_t idx) {
        SspModel model = bundle.model;
        model.lambda_inelastic = lambdas[idx];
        const SolveResult solved = solve(model);
        const CostVector parts = decompose_cost(model, solved.policy);
        const auto init = static_cast<std::size_t>(model.initial_state());
        rows[idx] = {lambdas[idx], -parts.elastic[init], -parts.inelastic[init]};
    };

    const int workers =
        std::max(1, std::min<int>(parallelism, int(lambdas.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            run_point(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        const std::size_t chunk = (lambdas.size() + std::size_t(workers) - 1) / std::size_t(workers);
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = std::size_t(w) * chunk;
            const std::size_t hi = std::min(lambdas.size(), lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i)
                    run_point(i);
            });
        }
        for (auto &th : pool)
            th.join();
    }
    return rows;
}

RiskReport fixed_rate_risk(const Discretization &d, double rate) {
    if (!(rate >= 0.0))
        throw validation_error("rate must be non-negative");
    RiskReport out;
    out.rate = rate;
    const StepDistribution dist =
        poisson_step_probs(rate, d.step_size, d.stage_length, d.steps);
    const ProgressMatrix matrix = progress_matrix(dist);
    const auto stages = propagate(matrix, d.stages);
    out.envelope = progress_envelope(stages, d);
    out.miss_risk = out.envelope.back().miss_risk;
    return out;
}

} // namespace admctl
