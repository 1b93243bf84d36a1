#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "admctl/chain.hpp"
#include "admctl/scenario_io.hpp"
#include "admctl/ssp.hpp"
#include "admctl/stateful.hpp"

namespace admctl {

/// A scenario made solvable: the calibrated control space (composite when
/// the scenario has a stateful section), the level chain when augmented,
/// and the assembled model.
struct ModelBundle {
    ControlSpace control;
    std::optional<LevelChain> chain;
    SspModel model;
};

ModelBundle build_model(const ScenarioFile &file,
                        std::size_t memory_cap = std::size_t(2) << 30);

struct LambdaSweepRow {
    double lambda = 0.0;
    double elastic_utility = 0.0;
    double inelastic_utility = 0.0;
};

/// Re-solves the scenario for each inelastic weight; utilities are the
/// negated initial-state cost components of the optimal policy.
std::vector<LambdaSweepRow> lambda_sweep(const ScenarioFile &file,
                                         std::span<const double> lambdas,
                                         int parallelism = 1);

/// Deadline-risk prediction when the elastic flow is served at one fixed
/// rate for the whole horizon.
struct RiskReport {
    double rate = 0.0;
    std::vector<EnvelopePoint> envelope; // stages 0..N
    double miss_risk = 0.0;              // 1 - P(complete by stage N)
};

RiskReport fixed_rate_risk(const Discretization &d, double rate);

} // namespace admctl
