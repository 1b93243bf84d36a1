#pragma once

#include <span>
#include <vector>

#include "admctl/chain.hpp"
#include "admctl/core.hpp"
#include "admctl/scenario.hpp"

namespace admctl {

/// Stochastic-shortest-path model over the discretized grid, stored in
/// blocked form rather than as full n x n matrices: transitions only ever
/// advance the stage, and the one-stage transition block of each action is
/// stage-invariant, so per action we keep one rows x rows block where
/// rows = levels * (M+1). Cost matrices are factored the same way:
///   G_E: -completion_reward[k] exactly on transitions that land on step M
///        from step x < M at stage k < N (on-time completion),
///   G_I: -inelastic_rate[a][w] * delta_T on every transition leaving a
///        stage k < N state (the admitted subset keeps earning after the
///        elastic flow completes, but not past the deadline),
///   G_0: rate_penalty(k, x') added on transitions from step x < M into
///        destination step x' at stage k+1 (empty when the bound is off).
/// The objective solved is G_E + lambda * G_I + G_0.
///
/// States are indexed level-major: the 0-based index of (w,x,k) is
/// w*(M+1)(N+1) + k*(M+1) + x, where w is the level slot (always 0 when
/// levels == 1; slot w corresponds to signed level w - urgency_levels).
/// Stage-N states are cost-free and feed the single terminal state, which is
/// the last index; level copies of the terminal cell collapse onto it.
struct SspModel {
    Discretization disc;
    ControlSpace control;
    int levels = 1;         // level slots per grid cell (1 = unaugmented)
    int urgency_levels = 0; // slots below the signed level 0
    double lambda_inelastic = 0.0;

    std::vector<Matrix> step_blocks;                 // per action
    std::vector<std::vector<double>> inelastic_rate; // per action, per level slot
    std::vector<double> completion_reward;           // per stage k: V_E((k+1) delta_T)
    Matrix rate_penalty;                             // stages x (M+1); may be empty

    int action_count() const { return static_cast<int>(step_blocks.size()); }
    int rows_per_stage() const { return levels * (disc.steps + 1); }
    int cells() const { return disc.state_count(); }
    long state_count() const { return static_cast<long>(levels) * cells(); }

    long state_of(int level_slot, int x, int k) const {
        return static_cast<long>(level_slot) * cells() +
               static_cast<long>(k) * (disc.steps + 1) + x;
    }
    long initial_state() const { return state_of(urgency_levels, 0, 0); }
    long terminal_state() const { return state_count() - 1; }

    struct Cell {
        int level_slot;
        int x;
        int k;
    };
    Cell cell_of_state(long state) const {
        int cells_per_level = cells();
        int level = static_cast<int>(state / cells_per_level);
        int rem = static_cast<int>(state % cells_per_level);
        return {level, rem % (disc.steps + 1), rem / (disc.steps + 1)};
    }

    /// Signed level of a level slot (0 for unaugmented models).
    int signed_level(int level_slot) const { return level_slot - urgency_levels; }

    /// Dense element accessors over 0-based global state indices. These are
    /// reference semantics for tests and generic checks, not the solver's
    /// hot path. Transition mass into any level copy of the final cell is
    /// reported against the single terminal index.
    double transition_prob(long i, long j, int a) const;
    double cost_elastic(long i, long j, int a) const;
    double cost_inelastic(long i, long j, int a) const;
    double cost_ratebound(long i, long j, int a) const;

    void validate() const; // structural and numeric checks, throws
};

/// One Poisson step distribution per action, at that action's elastic rate.
std::vector<StepDistribution> action_step_distributions(const ControlSpace &space,
                                                        const Discretization &d);

/// Assembles the unaugmented model for a calibrated control space: one step
/// distribution per action (built from that action's elastic rate), boundary
/// rows for the completed flow and the passed deadline, and the cost
/// factors described on SspModel. The rate-bound penalty grid is built from
/// scenario.rate_bound.
SspModel assemble_model(const LinkScenario &scenario, const Discretization &d,
                        const ControlSpace &space,
                        std::span<const StepDistribution> step_dists);

/// Stationary deterministic policy: one 0-based action per 0-based state.
struct Policy {
    std::vector<int> actions;

    int action_at(const SspModel &model, int level_slot, int x, int k) const {
        return actions[static_cast<std::size_t>(model.state_of(level_slot, x, k))];
    }
};

/// Optimal cost-to-go and per-component values. The component vectors are
/// filled by decompose_cost and satisfy
/// total = elastic + lambda * inelastic + ratebound within 1e-9.
struct CostVector {
    std::vector<double> total;
    std::vector<double> elastic;
    std::vector<double> inelastic;
    std::vector<double> ratebound;
};

struct SolveResult {
    Policy policy;
    CostVector cost; // total only
    Matrix q;        // n x m state-action values
};

/// Exact backward pass over the stage-layered graph: stage N states are
/// worth 0, and each earlier stage minimizes over actions against the next
/// stage's values. Argmin ties go to the smallest action index. Throws
/// numeric_error when non-finite values reach the solver.
SolveResult solve(const SspModel &model);

/// Generic value iteration to the same fixed point (sup-norm tolerance
/// 1e-12, at most 10*(N+2) sweeps), kept as an independent validation path.
SolveResult solve_value_iteration(const SspModel &model);

/// Cost-to-go of a fixed policy (total objective only).
CostVector evaluate_policy(const SspModel &model, const Policy &policy);

/// Per-component costs of a fixed policy: one evaluation per cost factor
/// plus the recomposed total.
CostVector decompose_cost(const SspModel &model, const Policy &policy);

} // namespace admctl
