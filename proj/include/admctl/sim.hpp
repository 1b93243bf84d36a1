#pragma once

#include <cstdint>
#include <vector>

#include "admctl/ssp.hpp"

namespace admctl {

/// State at the start of a stage plus the decision taken there and the
/// reward accrued over the following stage. The final row (stage == stages)
/// carries no decision: action is 0 and the rates and stage reward are 0.
struct TrajectoryPoint {
    int stage = 0;
    double time = 0.0;
    int step = 0;              // completed size units x
    int level = 0;             // signed disruption level, 0 when unaugmented
    double remaining = 0.0;    // bytes left, 0 once complete
    int action = 0;            // 1-based action index, 0 on the final row
    double elastic_rate = 0.0;
    double stage_reward = 0.0; // elastic + lambda * inelastic - penalty
    double cumulative_reward = 0.0;
    bool done = false;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points; // stages + 1 rows
    double total_reward = 0.0;
    double elastic_reward = 0.0;   // unweighted component totals
    double inelastic_reward = 0.0;
    double penalty = 0.0;
    bool completed = false;
};

/// Deterministic counter RNG: the variate for (seed, trajectory, stage) is a
/// pure hash, so results are independent of threading and replay exactly.
double uniform_variate(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t stage);

Trajectory sample_trajectory(const SspModel &model, const Policy &policy,
                             std::uint64_t seed, std::uint64_t index);

struct BatchStats {
    int count = 0;
    double mean_total = 0.0;
    double se_total = 0.0;
    double mean_elastic = 0.0;
    double se_elastic = 0.0;
    double mean_inelastic = 0.0;
    double se_inelastic = 0.0;
    double mean_penalty = 0.0;
    double se_penalty = 0.0;
    double completion_rate = 0.0;
    double se_completion = 0.0;
};

/// Sample `count` trajectories keyed by (seed, 0..count-1) and summarize.
/// Bit-identical for any parallelism: trajectories are independent and the
/// reduction runs single threaded in index order.
BatchStats simulate_batch(const SspModel &model, const Policy &policy,
                          std::uint64_t seed, int count, int parallelism = 1);

} // namespace admctl
