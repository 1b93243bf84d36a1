#include "admctl/sim.hpp"

#include <cmath>
#include <thread>

namespace admctl {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe reduce(const std::vector<double> &xs) {
    MeanSe out;
    const std::size_t n = xs.size();
    if (n == 0)
        return out;
    double total = 0.0;
    for (double v : xs)
        total += v;
    out.mean = total / double(n);
    if (n < 2)
        return out;
    double ss = 0.0;
    for (double v : xs) {
        const double d = v - out.mean;
        ss += d * d;
    }
    out.se = std::sqrt(ss / double(n - 1) / double(n));
    return out;
}

} // namespace

double uniform_variate(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t stage) {
    const std::uint64_t h = mix64(mix64(mix64(seed) ^ trajectory) ^ stage);
    return double(h >> 11) * 0x1.0p-53;
}

Trajectory sample_trajectory(const SspModel &model, const Policy &policy,
                             std::uint64_t seed, std::uint64_t index) {
    if (long(policy.actions.size()) != model.state_count())
        throw validation_error("policy length does not match the model");
    const int width = model.disc.steps + 1;
    const int stages = model.disc.stages;
    const int rows = model.rows_per_stage();

    Trajectory out;
    out.points.reserve(std::size_t(stages) + 1);
    int slot = model.urgency_levels;
    int x = 0;
    double cumulative = 0.0;
    for (int k = 0; k < stages; ++k) {
        const int a = policy.action_at(model, slot, x, k);
        if (a < 0 || a >= model.action_count())
            throw validation_error("policy action index out of range");
        const Matrix &blk = model.step_blocks[std::size_t(a)];
        const int row = slot * width + x;

        const double u = uniform_variate(seed, index, std::uint64_t(k));
        double cum = 0.0;
        int picked = row; // staying put is always well defined
        for (int c = 0; c < rows; ++c) {
            const double p = blk(row, c);
            if (p == 0.0)
                continue;
            cum += p;
            picked = c;
            if (u < cum)
                break;
        }
        const int next_slot = picked / width;
        const int next_x = picked % width;

        const long i = model.state_of(slot, x, k);
        const long j = (k + 1 == stages && next_x == width - 1)
                           ? model.terminal_state()
                           : model.state_of(next_slot, next_x, k + 1);
        const double ge = model.cost_elastic(i, j, a);
        const double gi = model.cost_inelastic(i, j, a);
        const double g0 = model.cost_ratebound(i, j, a);
        const double reward = -(ge + model.lambda_inelastic * gi + g0);
        out.elastic_reward += -ge;
        out.inelastic_reward += -gi;
        out.penalty += g0;
        cumulative += reward;

        TrajectoryPoint pt;
        pt.stage = k;
        pt.time = k * model.disc.stage_length;
        pt.step = x;
        pt.level = model.signed_level(slot);
        pt.remaining = (x == width - 1) ? 0.0 : model.disc.total_size - x * model.disc.step_size;
        pt.action = a + 1;
        pt.elastic_rate = model.control.actions[std::size_t(a)].elastic_rate;
        pt.stage_reward = reward;
        pt.cumulative_reward = cumulative;
        pt.done = x == width - 1;
        out.points.push_back(pt);

        slot = next_slot;
        x = next_x;
    }

    TrajectoryPoint last;
    last.stage = stages;
    last.time = model.disc.horizon;
    last.step = x;
    last.level = model.signed_level(slot);
    last.remaining = (x == width - 1) ? 0.0 : model.disc.total_size - x * model.disc.step_size;
    last.cumulative_reward = cumulative;
    last.done = x == width - 1;
    out.points.push_back(last);

    out.total_reward = cumulative;
    out.completed = last.done;
    return out;
}

BatchStats simulate_batch(const SspModel &model, const Policy &policy,
                          std::uint64_t seed, int count, int parallelism) {
    if (count <= 0)
        throw validation_error("trajectory count must be positive");
    // Workers must not throw, so the policy is vetted before they start.
    if (long(policy.actions.size()) != model.state_count())
        throw validation_error("policy length does not match the model");
    for (int a : policy.actions)
        if (a < 0 || a >= model.action_count())
            throw validation_error("policy action index out of range");
    const auto slots = static_cast<std::size_t>(count);
    std::vector<double> totals(slots);
    std::vector<double> elastic(slots);
    std::vector<double> inelastic(slots);
    std::vector<double> penalty(slots);
    std::vector<double> completed(slots);

    auto run_range = [&](int lo, int hi) {
        for (int t = lo; t < hi; ++t) {
            Trajectory tr = sample_trajectory(model, policy, seed, std::uint64_t(t));
            totals[std::size_t(t)] = tr.total_reward;
            elastic[std::size_t(t)] = tr.elastic_reward;
            inelastic[std::size_t(t)] = tr.inelastic_reward;
            penalty[std::size_t(t)] = tr.penalty;
            completed[std::size_t(t)] = tr.completed ? 1.0 : 0.0;
        }
    };

    const int workers = std::max(1, std::min(parallelism, count));
    if (workers == 1) {
        run_range(0, count);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        const int chunk = (count + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * chunk;
            const int hi = std::min(count, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto &th : pool)
            th.join();
    }

    BatchStats stats;
    stats.count = count;
    const MeanSe t = reduce(totals);
    const MeanSe e = reduce(elastic);
    const MeanSe i = reduce(inelastic);
    const MeanSe p = reduce(penalty);
    const MeanSe c = reduce(completed);
    stats.mean_total = t.mean;
    stats.se_total = t.se;
    stats.mean_elastic = e.mean;
    stats.se_elastic = e.se;
    stats.mean_inelastic = i.mean;
    stats.se_inelastic = i.se;
    stats.mean_penalty = p.mean;
    stats.se_penalty = p.se;
    stats.completion_rate = c.mean;
    stats.se_completion = c.se;
    return stats;
}

} // namespace admctl
