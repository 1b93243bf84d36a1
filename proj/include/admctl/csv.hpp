#pragma once

#include <span>
#include <string>

#include "admctl/chain.hpp"
#include "admctl/pipeline.hpp"
#include "admctl/robustness.hpp"
#include "admctl/sim.hpp"
#include "admctl/ssp.hpp"

namespace admctl {

/// All emitters format numbers with shortest round-trip notation and "\n"
/// line ends, so equal inputs give byte-equal files. Level-augmented models
/// add a signed `w` column after `x` in the policy and value schemas.

std::string policy_csv(const SspModel &model, const Policy &policy);
std::string value_csv(const SspModel &model, const CostVector &cost);
std::string risk_csv(std::span<const EnvelopePoint> envelope);
std::string trajectory_csv(const Trajectory &trajectory);
std::string lambda_sweep_csv(std::span<const LambdaSweepRow> rows);
std::string ratebound_sweep_csv(std::span<const RateBoundSweepRow> rows);

/// Inverse of policy_csv against the same model: accepts both schemas,
/// requires every decision state exactly once, and returns a full policy
/// (stage-N states, which decide nothing, get action 1). Throws
/// validation_error on schema or coverage problems.
Policy parse_policy_csv(const std::string &text, const SspModel &model);

void write_file(const std::string &path, const std::string &content);
std::string read_file(const std::string &path);

} // namespace admctl
