#include "admctl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace admctl {

ElasticRewardSpec ElasticRewardSpec::constant(double value) {
    ElasticRewardSpec spec;
    spec.constant_ = value;
    return spec;
}

ElasticRewardSpec ElasticRewardSpec::table(std::vector<std::pair<double, double>> breakpoints) {
    ElasticRewardSpec spec;
    spec.breakpoints_ = std::move(breakpoints);
    return spec;
}

double ElasticRewardSpec::value_at(double t) const {
    if (breakpoints_.empty())
        return constant_;
    for (const auto &[tb, v] : breakpoints_) {
        if (t <= tb)
            return v;
    }
    return breakpoints_.back().second;
}

void ElasticRewardSpec::validate(double deadline) const {
    if (breakpoints_.empty()) {
        if (!(constant_ > 0.0))
            throw validation_error("elastic reward must be positive");
        return;
    }
    double prev = 0.0;
    for (const auto &[tb, v] : breakpoints_) {
        if (!(tb > prev))
            throw validation_error("elastic reward breakpoints must be strictly increasing and positive");
        if (!(v > 0.0))
            throw validation_error("elastic reward values must be positive");
        prev = tb;
    }
    if (breakpoints_.back().first < deadline)
        throw validation_error("elastic reward table must cover the deadline");
}

double elastic_reward_at(const ElasticRewardSpec &reward,
                         const std::optional<SoftDeadline> &soft, double t,
                         double deadline) {
    if (!(t > 0.0))
        throw std::domain_error("completion time must be positive");
    if (t > deadline)
        return 0.0;
    double v = reward.value_at(t);
    if (soft && t <= (1.0 - soft->alpha) * deadline)
        v *= 1.0 + soft->beta;
    return v;
}

void LinkScenario::validate() const {
    if (!(bandwidth > 0.0))
        throw validation_error("bandwidth must be positive");
    if (!(elastic_size > 0.0))
        throw validation_error("elastic size must be positive");
    if (!(elastic_deadline > 0.0))
        throw validation_error("elastic deadline must be positive");
    if (!(lambda_inelastic >= 0.0))
        throw validation_error("lambda_I must be non-negative");
    if (!(rate_bound >= 0.0))
        throw validation_error("rate bound must be non-negative");
    if (soft_deadline) {
        if (!(soft_deadline->alpha > 0.0) || !(soft_deadline->alpha < 1.0))
            throw validation_error("soft deadline alpha must lie in (0,1)");
        if (!(soft_deadline->beta > 0.0))
            throw validation_error("soft deadline beta must be positive");
    }
    elastic_reward.validate(elastic_deadline);
    for (const auto &f : flows) {
        if (!(f.load >= 0.0))
            throw validation_error("flow load must be non-negative");
        if (!(f.reward_rate >= 0.0))
            throw validation_error("flow reward rate must be non-negative");
    }
}

Discretization Discretization::make(int steps, int stages, double total_size, double horizon) {
    if (steps < 1 || stages < steps)
        throw validation_error("discretization requires 1 <= M <= N");
    if (!(total_size > 0.0) || !(horizon > 0.0))
        throw validation_error("discretization requires positive size and horizon");
    Discretization d;
    d.steps = steps;
    d.stages = stages;
    d.total_size = total_size;
    d.horizon = horizon;
    d.step_size = total_size / steps;
    d.stage_length = horizon / stages;
    return d;
}

std::pair<int, int> Discretization::cell_of(int index) const {
    if (index < 1 || index > state_count())
        throw validation_error("state index out of range: " + std::to_string(index));
    int zero_based = index - 1;
    return {zero_based % (steps + 1), zero_based / (steps + 1)};
}

std::pair<int, int> locate_state(const Discretization &d, double s, double t) {
    if (std::isnan(s) || s < 0.0 || s > d.total_size)
        throw std::domain_error("remaining size outside [0, S]");
    if (std::isnan(t) || t < 0.0 || t > d.horizon)
        throw std::domain_error("elapsed time outside [0, T]");

    int x;
    if (s == 0.0) {
        x = d.steps;
    } else {
        // Cell x covers (S-(x+1)dS, S-x dS]; comparisons stay exact.
        x = static_cast<int>(std::floor((d.total_size - s) / d.step_size));
        x = std::clamp(x, 0, d.steps - 1);
        while (x > 0 && s > d.total_size - x * d.step_size)
            --x;
        while (x < d.steps - 1 && s <= d.total_size - (x + 1) * d.step_size)
            ++x;
    }

    int k;
    if (t == d.horizon) {
        k = d.stages;
    } else {
        // Stage k covers [k dT, (k+1) dT).
        k = static_cast<int>(std::floor(t / d.stage_length));
        k = std::clamp(k, 0, d.stages - 1);
        while (k > 0 && t < k * d.stage_length)
            --k;
        while (k < d.stages - 1 && t >= (k + 1) * d.stage_length)
            ++k;
    }
    return {x, k};
}

namespace {

// Reward density used for the admission order. Zero-load flows with positive
// reward are free wins and sort first; zero-load zero-reward flows are inert
// and sort by the tie rules instead.
double flow_ratio(const InelasticFlowSpec &f) {
    if (f.load == 0.0)
        return f.reward_rate > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return f.reward_rate / f.load;
}

} // namespace

ControlSpace build_control_space(std::span<const InelasticFlowSpec> flows, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw validation_error("bandwidth must be positive");
    double total_load = 0.0;
    for (const auto &f : flows) {
        if (!(f.load >= 0.0) || !(f.reward_rate >= 0.0))
            throw validation_error("flow loads and reward rates must be non-negative");
        total_load += f.load;
    }
    if (total_load > bandwidth)
        throw validation_error("total inelastic load exceeds bandwidth");

    std::vector<int> order(flows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ra = flow_ratio(flows[a]);
        double rb = flow_ratio(flows[b]);
        if (ra != rb)
            return ra > rb;
        if (flows[a].load != flows[b].load)
            return flows[a].load < flows[b].load;
        return a < b;
    });

    ControlSpace space;
    space.bandwidth = bandwidth;
    space.actions.reserve(flows.size() + 1);

    ControlAction current;
    current.elastic_rate = bandwidth;
    space.actions.push_back(current);
    for (int idx : order) {
        current.load += flows[idx].load;
        current.elastic_rate = bandwidth - current.load;
        current.inelastic_reward_rate += flows[idx].reward_rate;
        current.member_flows.push_back(idx);
        space.actions.push_back(current);
    }
    return space;
}

ControlSpace calibrate_rewards(ControlSpace space, const ElasticRewardSpec &reward,
                               double deadline) {
    if (space.action_count() < 2)
        throw validation_error("calibration needs at least one admitting action");
    if (!(deadline > 0.0))
        throw validation_error("calibration needs a positive deadline");
    double top = space.actions.back().inelastic_reward_rate;
    if (!(top > 0.0))
        throw validation_error("calibration needs a positive top reward rate");
    double target = reward.value_at(deadline) / deadline;
    if (!(target > 0.0))
        throw validation_error("elastic reward at the deadline must be positive");

    if (target != top) {
        // Divide-then-scale lands the top rate on the target exactly, so a
        // second calibration takes the early exit and changes nothing.
        for (auto &a : space.actions)
            a.inelastic_reward_rate = a.inelastic_reward_rate / top * target;
    }
    space.calibrated = true;
    return space;
}

void ControlSpace::validate_ordering() const {
    if (congestion_adjusted)
        return;
    if (actions.empty())
        throw validation_error("control space is empty");
    if (actions.front().load != 0.0 || actions.front().inelastic_reward_rate != 0.0)
        throw validation_error("action 1 must admit nothing");
    if (actions.front().elastic_rate != bandwidth)
        throw validation_error("action 1 must leave the full bandwidth");
    for (std::size_t a = 1; a < actions.size(); ++a) {
        if (actions[a].load < actions[a - 1].load)
            throw validation_error("loads must be non-decreasing across actions");
        if (actions[a].elastic_rate > actions[a - 1].elastic_rate)
            throw validation_error("elastic rates must be non-increasing across actions");
        if (actions[a].inelastic_reward_rate < actions[a - 1].inelastic_reward_rate)
            throw validation_error("reward rates must be non-decreasing across actions");
    }
    if (actions.back().elastic_rate < 0.0)
        throw validation_error("admit-everything action exceeds the bandwidth");
    if (calibrated && actions.size() >= 2 && !(actions[1].inelastic_reward_rate > 0.0))
        throw validation_error("first admitting action must earn a positive reward rate");
}

} // namespace admctl
