#pragma once

#include <cstddef>
#include <vector>

#include "admctl/core.hpp"
#include "admctl/scenario.hpp"
#include "admctl/ssp.hpp"

namespace admctl {

/// Disruption-sensitivity model for the stateful inelastic flow set. Levels
/// w run from -D_u (most urgent) through 0 (not yet admitted), 1 (admitted
/// and fresh) up to D_p (stale), with D_p+1 permanent suspension. Each
/// sequence is a distribution over per-stage counts: pi[l] is the chance a
/// denied admitted set stales by l levels, epsilon[l] the chance an admitted
/// set recovers by l levels, gamma[l] the chance an unadmitted set's urgency
/// deepens by l levels. Sequences must carry unit mass within 1e-12 (they
/// are normalized exactly on use); motion past the level range folds into
/// the boundary target described on build_level_chain.
struct InelasticStateSpec {
    int persistence_levels = 1; // D_p >= 1
    int urgency_levels = 0;     // D_u >= 0
    std::vector<double> stale_probs;   // pi, deny while admitted
    std::vector<double> recover_probs; // epsilon, admit while admitted
    std::vector<double> decay_probs;   // gamma, deny while not admitted

    int level_count() const { return persistence_levels + urgency_levels + 2; }
    void validate() const;
};

/// Level-transition matrices under the stateful set's two decisions. Level
/// slots order the signed levels -D_u..D_p+1 as 0..D-1. Staleness past D_p
/// and urgency decay past -D_u both land in permanent suspension (the last
/// slot, absorbing under both decisions); admit-recovery past level 1 folds
/// into level 1, and admitting from any urgency level jumps to level 1.
struct LevelChain {
    int persistence_levels = 0;
    int urgency_levels = 0;
    Matrix persistence_deny;  // (D_p+1) x (D_p+1), levels 1..D_p+1
    Matrix persistence_admit; // (D_p+1) x (D_p+1)
    Matrix urgency_deny;      // (D_u+1) x D, levels -D_u..0 into all levels
    Matrix urgency_admit;     // (D_u+1) x D
    Matrix deny;              // D x D, composed
    Matrix admit;             // D x D, composed

    int level_count() const { return persistence_levels + urgency_levels + 2; }
    int suspension_slot() const { return level_count() - 1; }
    void validate() const; // throws validation_error
};

LevelChain build_level_chain(const InelasticStateSpec &spec);

/// Product of a stateless control space (raw, uncalibrated rewards) with the
/// stateful set's deny/admit decision: 2m actions ordered by composite load
/// (ties: reward rate, then deny before admit, then stateless index). The
/// result is raw; calibrate it before assembly. The reordered space must
/// still satisfy the load/reward ordering inequalities, which is enforced
/// when the model is assembled. Throws validation_error when the stateless
/// space is already calibrated or the combined load exceeds the bandwidth.
ControlSpace build_composite_control_space(const ControlSpace &stateless,
                                           double stateful_load,
                                           double stateful_reward_rate);

/// Lifts an unaugmented model over (x,k) to levels x steps x stages: the
/// transition block of each action becomes the product of its level matrix
/// (admit or deny, by the action's stateful decision) with its step block,
/// and in permanent suspension the admitting actions stop earning the
/// stateful set's share of the reward rate (they keep the stateless share).
/// Throws capacity_error when the blocks would exceed memory_cap bytes.
SspModel augment_model(const SspModel &base, const LevelChain &chain,
                       std::size_t memory_cap = std::size_t(2) << 30);

} // namespace admctl
