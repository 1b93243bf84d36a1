#pragma once

#include <optional>
#include <span>
#include <vector>

#include "admctl/core.hpp"
#include "admctl/scenario.hpp"
#include "admctl/ssp.hpp"

namespace admctl {

/// What the link actually looks like, as opposed to what the controller was
/// told: a true bandwidth and optionally true per-flow loads (input order of
/// the scenario's flow list).
struct TrueModelOverride {
    double bandwidth = 0.0;
    std::optional<std::vector<double>> flow_loads;
};

/// Congestion rules for one action under the true link: the elastic flow
/// receives R = max(0, B_true - load), and the admitted subset earns its
/// nominal reward rate only while it actually fits (load <= B_true), else 0.
struct EffectiveParams {
    double elastic_rate = 0.0;
    double inelastic_rate = 0.0;
};
EffectiveParams effective_action_params(double true_bandwidth, double load,
                                        double nominal_reward_rate);

/// The nominal control space re-parameterized against the true link. Action
/// identity (the admitted subsets and their order) is preserved so policies
/// transfer across the two models; the nominal ordering inequalities may no
/// longer hold, which is flagged on the returned space.
ControlSpace apply_true_model(const ControlSpace &nominal,
                              std::span<const InelasticFlowSpec> flows,
                              const TrueModelOverride &truth);

/// Per-destination penalty grid for the minimum-rate bound: entry (k, x') is
/// the extra cost on any transition from an incomplete step into destination
/// step x' at stage k+1 whose remaining size lies strictly above the line
/// S - R0 * t. The penalty rate V_E(T)/T matches the calibrated top
/// inelastic reward rate, so lagging costs as much per stage as the most
/// profitable admission earns. Returns an empty matrix when R0 = 0, leaving
/// the solve untouched down to the bit.
Matrix rate_bound_cost(const Discretization &d, double rate_bound,
                       double deadline_reward_over_horizon);

/// Cost of optimizing against the wrong model: the nominal policy (solved
/// with the scenario as given, including any rate-bound shaping) and the
/// omniscient policy (solved against the true link, no shaping) are both
/// evaluated against the true link, with per-component decompositions.
struct MismatchReport {
    Policy nominal_policy;
    Policy omniscient_policy;
    CostVector nominal_cost;    // under the true model
    CostVector omniscient_cost; // under the true model
    std::vector<double> gap;    // nominal_cost.total - omniscient_cost.total, >= 0
};
MismatchReport mismatch_eval(const LinkScenario &scenario, const Discretization &d,
                             const TrueModelOverride &truth);

/// One row of the rate-bound sweep: utilities (negated initial-state costs)
/// of the R0-shaped nominal policy and of the omniscient policy, both under
/// the link described by b_true.
struct RateBoundSweepRow {
    double rate_bound = 0.0;
    double true_bandwidth = 0.0;
    double elastic_nominal = 0.0;
    double inelastic_nominal = 0.0;
    double elastic_omniscient = 0.0;
    double inelastic_omniscient = 0.0;
};
std::vector<RateBoundSweepRow> ratebound_sweep(const LinkScenario &scenario,
                                               const Discretization &d,
                                               std::span<const double> rate_bounds,
                                               std::span<const TrueModelOverride> truths,
                                               int parallelism = 1);

} // namespace admctl
