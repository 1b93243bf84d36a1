#pragma once

#include <optional>
#include <string>

#include "admctl/scenario.hpp"
#include "admctl/stateful.hpp"

namespace admctl {

struct ScenarioFile {
    LinkScenario scenario;
    Discretization disc;
    std::optional<InelasticStateSpec> stateful;

    bool has_stateful_flows() const;
    // Combined load and reward rate of the flows marked stateful.
    double stateful_load() const;
    double stateful_reward_rate() const;
};

/// Parses the JSON scenario document. Malformed JSON, missing or unknown
/// keys, and out-of-range values all raise validation_error.
ScenarioFile parse_scenario_text(const std::string &text);
ScenarioFile load_scenario_file(const std::string &path);

} // namespace admctl
