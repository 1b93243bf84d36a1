#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "admctl/core.hpp"

namespace admctl {

/// One inelastic flow (or pre-aggregated flow group): constant load in Mbps
/// while admitted and reward rate in utils per second. Flows marked stateful
/// participate in the level-augmented model.
struct InelasticFlowSpec {
    double load = 0.0;        // Mbps
    double reward_rate = 0.0; // utils/s
    bool stateful = false;
};

/// Soft-deadline modification of the elastic reward: completion at or before
/// (1-alpha)*T earns a (1+beta) premium over the base reward.
struct SoftDeadline {
    double alpha = 0.0; // in (0,1); premium region is (0, (1-alpha)*T]
    double beta = 0.0;  // > 0; premium factor is 1+beta
};

/// Base elastic reward V(t) for completion at time t: either a constant or a
/// piecewise-constant table. A table entry (t_i, V_i) covers the interval
/// (t_{i-1}, t_i]; breakpoints must be strictly increasing with the last one
/// at or beyond the deadline, so the reward is positive on all of (0, T].
class ElasticRewardSpec {
  public:
    static ElasticRewardSpec constant(double value);
    static ElasticRewardSpec table(std::vector<std::pair<double, double>> breakpoints);

    bool is_constant() const { return breakpoints_.empty(); }
    double constant_value() const { return constant_; }
    const std::vector<std::pair<double, double>> &breakpoints() const { return breakpoints_; }

    /// Base reward for completion at time t (no soft-deadline premium, no
    /// beyond-deadline zeroing; callers use elastic_reward_at for that).
    double value_at(double t) const;

    /// Throws validation_error unless positive on (0, deadline].
    void validate(double deadline) const;

  private:
    double constant_ = 0.0;
    std::vector<std::pair<double, double>> breakpoints_;
};

/// Effective completion reward at time t under an optional soft deadline:
///   (1+beta) * V(t)  for 0 < t <= (1-alpha)*T,
///   V(t)             for (1-alpha)*T < t <= T,
///   0                for t > T.
/// Preconditions: t > 0 and T > 0.
double elastic_reward_at(const ElasticRewardSpec &reward,
                         const std::optional<SoftDeadline> &soft, double t,
                         double deadline);

/// Everything that defines one link-sharing problem instance, before
/// discretization: bandwidth B, the elastic flow (size S, deadline T, reward),
/// the inelastic flow list, the inelastic reward weight lambda, and the
/// optional minimum-rate bound R0 used for robustness shaping.
struct LinkScenario {
    double bandwidth = 0.0;        // B, Mbps
    double elastic_size = 0.0;     // S, Mb
    double elastic_deadline = 0.0; // T, s
    ElasticRewardSpec elastic_reward = ElasticRewardSpec::constant(1.0);
    std::optional<SoftDeadline> soft_deadline;
    std::vector<InelasticFlowSpec> flows;
    double lambda_inelastic = 0.0; // weight on inelastic reward in the objective
    double rate_bound = 0.0;       // R0, Mbps; 0 disables the penalty

    void validate() const; // throws validation_error
};

/// Uniform grid over the elastic flow's (remaining size, elapsed time) plane:
/// M size steps of width delta_S = S/M and N stages of length delta_T = T/N,
/// with 1 <= M <= N. Cell (x,k) means "s in (S-(x+1)delta_S, S-x delta_S]
/// and t in [k delta_T, (k+1) delta_T)", with x = M exactly at s = 0 and
/// k = N exactly at t = T. States are indexed i = 1 + x + (M+1)k, so i = 1 is
/// the initial cell (S, 0) and i = (M+1)(N+1) the terminal cell (0, T).
struct Discretization {
    int steps = 0;            // M
    int stages = 0;           // N
    double step_size = 0.0;   // delta_S, Mb
    double stage_length = 0.0; // delta_T, s
    double total_size = 0.0;  // S
    double horizon = 0.0;     // T

    static Discretization make(int steps, int stages, double total_size, double horizon);

    int state_count() const { return (steps + 1) * (stages + 1); }

    /// 1-based linear index of cell (x,k).
    int state_index(int x, int k) const { return 1 + x + (steps + 1) * k; }

    /// Inverse of state_index; throws validation_error when out of range.
    std::pair<int, int> cell_of(int index) const;
};

/// Cell containing the continuous pair (s,t). Comparisons are exact (no
/// epsilon fuzz), so callers that build s or t from repeated arithmetic
/// should quantize before calling. Throws std::domain_error for s outside
/// [0,S] or t outside [0,T].
std::pair<int, int> locate_state(const Discretization &d, double s, double t);

/// One admission decision: admit the first (a-1) flows of the sorted order.
struct ControlAction {
    double load = 0.0;                 // L(a), Mbps
    double elastic_rate = 0.0;         // R(a) = B - L(a) nominally, Mbps
    double inelastic_reward_rate = 0.0; // V_I(a), utils/s (raw until calibrated)
    std::vector<int> member_flows;     // indices into the input flow list
    bool admits_stateful = false;      // composite spaces: the stateful component's decision
    int stateless_index = -1;          // composite spaces: 0-based index into the stateless space
};

/// The nested admission subsets of a scenario's flows, sorted by reward
/// density so that loads are non-decreasing and reward rates non-decreasing
/// across actions, with action 1 admitting nothing.
struct ControlSpace {
    double bandwidth = 0.0;
    std::vector<ControlAction> actions; // actions[0] is action 1 (admit nothing)
    bool calibrated = false;
    bool composite = false;          // built from a stateless space x {deny,admit}
    int stateless_count = 0;         // composite spaces: number of stateless actions
    bool congestion_adjusted = false; // true-model spaces; ordering no longer guaranteed

    int action_count() const { return static_cast<int>(actions.size()); }

    /// Checks the nominal ordering (loads non-decreasing from 0, elastic
    /// rates non-increasing from B, reward rates non-decreasing from 0).
    /// Throws validation_error on violation; skipped for congestion-adjusted
    /// spaces, where the ordering can genuinely break.
    void validate_ordering() const;
};

/// Builds the nested control space over the given flows: flows are sorted by
/// non-increasing reward density V/L (load 0 with positive reward sorts
/// first; ties prefer smaller load, then input order), and action a admits
/// the first a-1 flows. Throws validation_error for negative loads or
/// rewards, or when the total load exceeds the bandwidth.
ControlSpace build_control_space(std::span<const InelasticFlowSpec> flows, double bandwidth);

/// Rescales all inelastic reward rates so the admit-everything action earns
/// V_I(m) = V_E(T)/T: running it for the whole horizon is then worth exactly
/// one on-time elastic completion. Idempotent. Throws validation_error when
/// the space has no admitting action or its raw reward rate is zero.
ControlSpace calibrate_rewards(ControlSpace space, const ElasticRewardSpec &reward,
                               double deadline);

} // namespace admctl
