#include "admctl/ssp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "admctl/robustness.hpp"

namespace admctl {

namespace {

enum class Part { total, elastic, inelastic, ratebound };

void check_finite(const SspModel &m) {
    auto bad = [](double v) { return !std::isfinite(v); };
    for (const auto &block : m.step_blocks)
        for (double v : block.data())
            if (bad(v))
                throw numeric_error("non-finite transition probability");
    for (const auto &rates : m.inelastic_rate)
        for (double v : rates)
            if (bad(v))
                throw numeric_error("non-finite inelastic reward rate");
    for (double v : m.completion_reward)
        if (bad(v))
            throw numeric_error("non-finite completion reward");
    for (double v : m.rate_penalty.data())
        if (bad(v))
            throw numeric_error("non-finite rate-bound penalty");
    if (bad(m.lambda_inelastic))
        throw numeric_error("non-finite inelastic weight");
}

// One backward pass over the stage layers. With `fixed` null the pass
// minimizes over actions (filling q/policy when given); otherwise it
// evaluates the fixed policy. The per-transition cost expression below is
// the model's single source of truth and the dense accessors mirror it.
std::vector<double> backward_pass(const SspModel &m, const Policy *fixed, Part part,
                                  Matrix *q_out, Policy *pol_out) {
    const int width = m.disc.steps + 1;
    const int stages = m.disc.stages;
    const int rows = m.rows_per_stage();
    const int action_count = m.action_count();
    const double stage_length = m.disc.stage_length;
    const double lambda = m.lambda_inelastic;
    const bool penalized = !m.rate_penalty.empty();

    std::vector<double> values(static_cast<std::size_t>(m.state_count()), 0.0);
    std::vector<double> next(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> cur(static_cast<std::size_t>(rows), 0.0);

    for (int k = stages - 1; k >= 0; --k) {
        for (int r = 0; r < rows; ++r) {
            const int w = r / width;
            const int x = r % width;
            const long state = m.state_of(w, x, k);
            const int a_first = fixed ? fixed->actions[static_cast<std::size_t>(state)] : 0;
            const int a_last = fixed ? a_first : action_count - 1;

            double best = std::numeric_limits<double>::infinity();
            int best_action = a_first;
            for (int a = a_first; a <= a_last; ++a) {
                const double reward_rate = m.inelastic_rate[a][w];
                const double g_inelastic = -(reward_rate * stage_length);
                const auto row = m.step_blocks[a].row(r);
                double sum = 0.0;
                for (int rp = 0; rp < rows; ++rp) {
                    const double p = row[rp];
                    if (p == 0.0)
                        continue;
                    const int xp = rp % width;
                    const double g_elastic =
                        (x < width - 1 && xp == width - 1) ? -m.completion_reward[k] : 0.0;
                    const double g_zero =
                        (penalized && x < width - 1) ? m.rate_penalty(k, xp) : 0.0;
                    double g;
                    switch (part) {
                    case Part::total:
                        g = g_elastic + lambda * g_inelastic + g_zero;
                        break;
                    case Part::elastic:
                        g = g_elastic;
                        break;
                    case Part::inelastic:
                        g = g_inelastic;
                        break;
                    case Part::ratebound:
                        g = g_zero;
                        break;
                    }
                    sum += p * (g + next[rp]);
                }
                if (q_out)
                    (*q_out)(static_cast<int>(state), a) = sum;
                if (sum < best) {
                    best = sum;
                    best_action = a;
                }
            }
            cur[r] = best;
            values[static_cast<std::size_t>(state)] = best;
            if (pol_out)
                pol_out->actions[static_cast<std::size_t>(state)] = best_action;
        }
        std::swap(next, cur);
    }
    return values;
}

void require_policy(const SspModel &m, const Policy &policy) {
    if (static_cast<long>(policy.actions.size()) != m.state_count())
        throw validation_error("policy covers " + std::to_string(policy.actions.size()) +
                               " states, model has " + std::to_string(m.state_count()));
    for (int a : policy.actions)
        if (a < 0 || a >= m.action_count())
            throw validation_error("policy action index out of range");
}

} // namespace

double SspModel::transition_prob(long i, long j, int a) const {
    const int last_step = disc.steps;
    const Cell from = cell_of_state(i);
    if (from.k == disc.stages) {
        if (from.x == last_step)
            return j == i ? 1.0 : 0.0; // terminal (and unreachable copies) self-loop
        return j == terminal_state() ? 1.0 : 0.0; // deadline passed
    }
    const Cell to = cell_of_state(j);
    if (to.k != from.k + 1)
        return 0.0;
    const auto row = step_blocks[a].row(from.level_slot * (last_step + 1) + from.x);
    if (to.k == disc.stages && to.x == last_step) {
        if (j != terminal_state())
            return 0.0; // level copies of the final cell collapse onto the terminal
        double mass = 0.0;
        for (int w = 0; w < levels; ++w)
            mass += row[w * (last_step + 1) + last_step];
        return mass;
    }
    return row[to.level_slot * (last_step + 1) + to.x];
}

double SspModel::cost_elastic(long i, long j, int a) const {
    (void)a;
    const Cell from = cell_of_state(i);
    if (from.k >= disc.stages)
        return 0.0;
    const Cell to = cell_of_state(j);
    if (to.k != from.k + 1)
        return 0.0;
    if (from.x < disc.steps && to.x == disc.steps)
        return -completion_reward[from.k];
    return 0.0;
}

double SspModel::cost_inelastic(long i, long j, int a) const {
    const Cell from = cell_of_state(i);
    if (from.k >= disc.stages)
        return 0.0;
    const Cell to = cell_of_state(j);
    if (to.k != from.k + 1)
        return 0.0;
    return -(inelastic_rate[a][from.level_slot] * disc.stage_length);
}

double SspModel::cost_ratebound(long i, long j, int a) const {
    (void)a;
    if (rate_penalty.empty())
        return 0.0;
    const Cell from = cell_of_state(i);
    if (from.k >= disc.stages || from.x >= disc.steps)
        return 0.0;
    const Cell to = cell_of_state(j);
    if (to.k != from.k + 1)
        return 0.0;
    return rate_penalty(from.k, to.x);
}

void SspModel::validate() const {
    const int rows = rows_per_stage();
    if (step_blocks.empty())
        throw validation_error("model has no actions");
    if (static_cast<int>(inelastic_rate.size()) != action_count())
        throw validation_error("inelastic rate table does not match the action count");
    for (const auto &rates : inelastic_rate)
        if (static_cast<int>(rates.size()) != levels)
            throw validation_error("inelastic rate table does not match the level count");
    if (static_cast<int>(completion_reward.size()) != disc.stages)
        throw validation_error("completion reward table does not match the stage count");
    if (!rate_penalty.empty() &&
        (rate_penalty.rows() != disc.stages || rate_penalty.cols() != disc.steps + 1))
        throw validation_error("rate penalty grid does not match the discretization");
    for (const auto &block : step_blocks) {
        if (block.rows() != rows || block.cols() != rows)
            throw validation_error("step block does not match rows per stage");
        for (int r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (double v : block.row(r)) {
                if (!(v >= 0.0))
                    throw validation_error("negative transition probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw validation_error("step block row does not sum to 1");
        }
    }
    check_finite(*this);
}

std::vector<StepDistribution> action_step_distributions(const ControlSpace &space,
                                                        const Discretization &d) {
    std::vector<StepDistribution> dists;
    dists.reserve(static_cast<std::size_t>(space.action_count()));
    for (const auto &action : space.actions)
        dists.push_back(
            poisson_step_probs(action.elastic_rate, d.step_size, d.stage_length, d.steps));
    return dists;
}

SspModel assemble_model(const LinkScenario &scenario, const Discretization &d,
                        const ControlSpace &space,
                        std::span<const StepDistribution> step_dists) {
    scenario.validate();
    if (!space.calibrated)
        throw validation_error("control space must be calibrated before assembly");
    space.validate_ordering();
    if (step_dists.size() != static_cast<std::size_t>(space.action_count()))
        throw validation_error("need exactly one step distribution per action");

    SspModel m;
    m.disc = d;
    m.control = space;
    m.lambda_inelastic = scenario.lambda_inelastic;
    m.step_blocks.reserve(step_dists.size());
    m.inelastic_rate.reserve(step_dists.size());
    for (std::size_t a = 0; a < step_dists.size(); ++a) {
        if (step_dists[a].steps() != d.steps)
            throw validation_error("step distribution width does not match the grid");
        m.step_blocks.push_back(progress_matrix(step_dists[a]).p);
        m.inelastic_rate.push_back({space.actions[a].inelastic_reward_rate});
    }
    m.completion_reward.resize(static_cast<std::size_t>(d.stages));
    for (int k = 0; k < d.stages; ++k) {
        // The last stage ends exactly at the deadline; computing it as
        // (k+1)*delta_T could land an ulp past T and zero the reward.
        double t_end = (k + 1 == d.stages) ? d.horizon : (k + 1) * d.stage_length;
        m.completion_reward[static_cast<std::size_t>(k)] =
            elastic_reward_at(scenario.elastic_reward, scenario.soft_deadline, t_end,
                              scenario.elastic_deadline);
    }
    double top_rate = elastic_reward_at(scenario.elastic_reward, scenario.soft_deadline,
                                        scenario.elastic_deadline, scenario.elastic_deadline) /
                      scenario.elastic_deadline;
    m.rate_penalty = rate_bound_cost(d, scenario.rate_bound, top_rate);
    m.validate();
    return m;
}

SolveResult solve(const SspModel &model) {
    check_finite(model);
    SolveResult result;
    result.q = Matrix(static_cast<int>(model.state_count()), model.action_count());
    result.policy.actions.assign(static_cast<std::size_t>(model.state_count()), 0);
    result.cost.total =
        backward_pass(model, nullptr, Part::total, &result.q, &result.policy);
    return result;
}

SolveResult solve_value_iteration(const SspModel &model) {
    check_finite(model);
    const long n = model.state_count();
    const int width = model.disc.steps + 1;
    const int rows = model.rows_per_stage();
    const double lambda = model.lambda_inelastic;
    const bool penalized = !model.rate_penalty.empty();

    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    std::vector<double> updated(static_cast<std::size_t>(n), 0.0);
    const int max_sweeps = 10 * (model.disc.stages + 2);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (long state = 0; state < n; ++state) {
            const auto cell = model.cell_of_state(state);
            if (cell.k == model.disc.stages) {
                updated[state] = 0.0; // absorption is cost-free
                continue;
            }
            const int r = cell.level_slot * width + cell.x;
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < model.action_count(); ++a) {
                const double g_inelastic =
                    -(model.inelastic_rate[a][cell.level_slot] * model.disc.stage_length);
                const auto row = model.step_blocks[a].row(r);
                double sum = 0.0;
                for (int rp = 0; rp < rows; ++rp) {
                    const double p = row[rp];
                    if (p == 0.0)
                        continue;
                    const int xp = rp % width;
                    const double g_elastic = (cell.x < width - 1 && xp == width - 1)
                                                 ? -model.completion_reward[cell.k]
                                                 : 0.0;
                    const double g_zero = (penalized && cell.x < width - 1)
                                              ? model.rate_penalty(cell.k, xp)
                                              : 0.0;
                    const double g = g_elastic + lambda * g_inelastic + g_zero;
                    const long succ = model.state_of(rp / width, xp, cell.k + 1);
                    sum += p * (g + values[static_cast<std::size_t>(succ)]);
                }
                if (sum < best)
                    best = sum;
            }
            updated[state] = best;
            change = std::max(change, std::abs(best - values[state]));
        }
        values.swap(updated);
        if (change <= 1e-12)
            break;
    }

    // Extract q and the greedy policy from the converged values.
    SolveResult result;
    result.q = Matrix(static_cast<int>(n), model.action_count());
    result.policy.actions.assign(static_cast<std::size_t>(n), 0);
    result.cost.total.assign(static_cast<std::size_t>(n), 0.0);
    for (long state = 0; state < n; ++state) {
        const auto cell = model.cell_of_state(state);
        if (cell.k == model.disc.stages)
            continue;
        const int r = cell.level_slot * width + cell.x;
        double best = std::numeric_limits<double>::infinity();
        int best_action = 0;
        for (int a = 0; a < model.action_count(); ++a) {
            const double g_inelastic =
                -(model.inelastic_rate[a][cell.level_slot] * model.disc.stage_length);
            const auto row = model.step_blocks[a].row(r);
            double sum = 0.0;
            for (int rp = 0; rp < rows; ++rp) {
                const double p = row[rp];
                if (p == 0.0)
                    continue;
                const int xp = rp % width;
                const double g_elastic = (cell.x < width - 1 && xp == width - 1)
                                             ? -model.completion_reward[cell.k]
                                             : 0.0;
                const double g_zero = (penalized && cell.x < width - 1)
                                          ? model.rate_penalty(cell.k, xp)
                                          : 0.0;
                const double g = g_elastic + lambda * g_inelastic + g_zero;
                const long succ = model.state_of(rp / width, xp, cell.k + 1);
                sum += p * (g + values[static_cast<std::size_t>(succ)]);
            }
            result.q(static_cast<int>(state), a) = sum;
            if (sum < best) {
                best = sum;
                best_action = a;
            }
        }
        result.cost.total[static_cast<std::size_t>(state)] = best;
        result.policy.actions[static_cast<std::size_t>(state)] = best_action;
    }
    return result;
}

CostVector evaluate_policy(const SspModel &model, const Policy &policy) {
    check_finite(model);
    require_policy(model, policy);
    CostVector cost;
    cost.total = backward_pass(model, &policy, Part::total, nullptr, nullptr);
    return cost;
}

CostVector decompose_cost(const SspModel &model, const Policy &policy) {
    check_finite(model);
    require_policy(model, policy);
    CostVector cost;
    cost.total = backward_pass(model, &policy, Part::total, nullptr, nullptr);
    cost.elastic = backward_pass(model, &policy, Part::elastic, nullptr, nullptr);
    cost.inelastic = backward_pass(model, &policy, Part::inelastic, nullptr, nullptr);
    cost.ratebound = backward_pass(model, &policy, Part::ratebound, nullptr, nullptr);
    return cost;
}

} // namespace admctl
