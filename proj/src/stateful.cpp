#include "admctl/stateful.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace admctl {

namespace {

std::vector<double> unit_sequence(const std::vector<double> &raw, const char *name) {
    if (raw.empty())
        throw validation_error(std::string(name) + " sequence is empty");
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0)
            throw validation_error(std::string(name) + " sequence has a negative or non-finite entry");
    }
    double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (std::fabs(total - 1.0) > 1e-12)
        throw validation_error(std::string(name) + " sequence mass is " + format_double(total) + ", expected 1");
    std::vector<double> out = raw;
    for (double &v : out)
        v /= total;
    return out;
}

double seq_at(const std::vector<double> &seq, int i) {
    return (i >= 0 && std::size_t(i) < seq.size()) ? seq[std::size_t(i)] : 0.0;
}

// Mass not covered by counts 0..count-1; folds into the boundary target.
double remainder_mass(const std::vector<double> &seq, int count) {
    double partial = 0.0;
    for (int i = 0; i < count; ++i)
        partial += seq_at(seq, i);
    return std::max(0.0, 1.0 - partial);
}

void check_rows(const Matrix &m, const char *name) {
    for (int r = 0; r < m.rows(); ++r) {
        double total = 0.0;
        for (int c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            if (!std::isfinite(v) || v < 0.0)
                throw validation_error(std::string(name) + " has a negative or non-finite entry");
            total += v;
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw validation_error(std::string(name) + " row " + std::to_string(r) + " sums to " + format_double(total));
    }
}

} // namespace

void InelasticStateSpec::validate() const {
    if (persistence_levels < 1)
        throw validation_error("persistence_levels must be at least 1");
    if (urgency_levels < 0)
        throw validation_error("urgency_levels must be non-negative");
    unit_sequence(stale_probs, "stale_probs");
    unit_sequence(recover_probs, "recover_probs");
    unit_sequence(decay_probs, "decay_probs");
}

void LevelChain::validate() const {
    if (persistence_levels < 1 || urgency_levels < 0)
        throw validation_error("level chain has invalid level counts");
    const int d = level_count();
    if (deny.rows() != d || deny.cols() != d || admit.rows() != d || admit.cols() != d)
        throw validation_error("level chain matrices do not match the level count");
    check_rows(deny, "level deny matrix");
    check_rows(admit, "level admit matrix");
    const int susp = suspension_slot();
    if (deny(susp, susp) != 1.0 || admit(susp, susp) != 1.0)
        throw validation_error("permanent suspension must be absorbing");
}

LevelChain build_level_chain(const InelasticStateSpec &spec) {
    spec.validate();
    const int dp = spec.persistence_levels;
    const int du = spec.urgency_levels;
    const int d = spec.level_count();
    const std::vector<double> pi = unit_sequence(spec.stale_probs, "stale_probs");
    const std::vector<double> eps = unit_sequence(spec.recover_probs, "recover_probs");
    const std::vector<double> gam = unit_sequence(spec.decay_probs, "decay_probs");

    LevelChain chain;
    chain.persistence_levels = dp;
    chain.urgency_levels = du;

    // Admitted side, slots 0..dp for levels 1..dp+1 (dp is suspension).
    Matrix pd(dp + 1, dp + 1);
    Matrix pa(dp + 1, dp + 1);
    for (int wi = 0; wi + 1 < dp + 1; ++wi) {
        for (int wj = wi; wj + 1 < dp + 1; ++wj)
            pd(wi, wj) = seq_at(pi, wj - wi);
        pd(wi, dp) = remainder_mass(pi, dp - wi);
    }
    pd(dp, dp) = 1.0;
    pa(0, 0) = 1.0;
    for (int wi = 1; wi + 1 < dp + 1; ++wi) {
        for (int wj = 1; wj <= wi; ++wj)
            pa(wi, wj) = seq_at(eps, wi - wj);
        pa(wi, 0) = remainder_mass(eps, wi);
    }
    pa(dp, dp) = 1.0;

    // Unadmitted side, slots 0..du for levels -du..0, targets over all levels.
    Matrix ud(du + 1, d);
    Matrix ua(du + 1, d);
    for (int ui = 0; ui <= du; ++ui) {
        for (int l = 0; l <= ui; ++l)
            ud(ui, l) = seq_at(gam, ui - l);
        ud(ui, d - 1) = remainder_mass(gam, ui + 1);
        ua(ui, du + 1) = 1.0;
    }

    Matrix deny(d, d);
    Matrix admit(d, d);
    for (int ui = 0; ui <= du; ++ui) {
        for (int c = 0; c < d; ++c) {
            deny(ui, c) = ud(ui, c);
            admit(ui, c) = ua(ui, c);
        }
    }
    for (int wi = 0; wi <= dp; ++wi) {
        for (int wj = 0; wj <= dp; ++wj) {
            deny(du + 1 + wi, du + 1 + wj) = pd(wi, wj);
            admit(du + 1 + wi, du + 1 + wj) = pa(wi, wj);
        }
    }

    chain.persistence_deny = std::move(pd);
    chain.persistence_admit = std::move(pa);
    chain.urgency_deny = std::move(ud);
    chain.urgency_admit = std::move(ua);
    chain.deny = std::move(deny);
    chain.admit = std::move(admit);
    chain.validate();
    return chain;
}

ControlSpace build_composite_control_space(const ControlSpace &stateless,
                                           double stateful_load,
                                           double stateful_reward_rate) {
    if (stateless.calibrated)
        throw validation_error("composite spaces are built from raw reward rates, before calibration");
    if (stateless.composite)
        throw validation_error("control space is already composite");
    if (stateless.actions.empty())
        throw validation_error("stateless control space is empty");
    if (!(stateful_load >= 0.0) || !std::isfinite(stateful_load))
        throw validation_error("stateful load must be non-negative");
    if (!(stateful_reward_rate >= 0.0) || !std::isfinite(stateful_reward_rate))
        throw validation_error("stateful reward rate must be non-negative");
    const double bandwidth = stateless.bandwidth;
    if (stateless.actions.back().load + stateful_load > bandwidth)
        throw validation_error("combined stateless and stateful load exceeds the bandwidth");

    ControlSpace out;
    out.bandwidth = bandwidth;
    out.composite = true;
    out.stateless_count = int(stateless.actions.size());
    out.actions.reserve(stateless.actions.size() * 2);
    for (std::size_t a2 = 0; a2 < stateless.actions.size(); ++a2) {
        for (int admit = 0; admit < 2; ++admit) {
            const ControlAction &base = stateless.actions[a2];
            ControlAction act;
            act.load = base.load + (admit ? stateful_load : 0.0);
            act.elastic_rate = bandwidth - act.load;
            act.inelastic_reward_rate = base.inelastic_reward_rate + (admit ? stateful_reward_rate : 0.0);
            act.member_flows = base.member_flows;
            act.admits_stateful = admit != 0;
            act.stateless_index = int(a2);
            out.actions.push_back(std::move(act));
        }
    }
    std::sort(out.actions.begin(), out.actions.end(),
              [](const ControlAction &a, const ControlAction &b) {
                  if (a.load != b.load)
                      return a.load < b.load;
                  if (a.inelastic_reward_rate != b.inelastic_reward_rate)
                      return a.inelastic_reward_rate < b.inelastic_reward_rate;
                  if (a.admits_stateful != b.admits_stateful)
                      return !a.admits_stateful;
                  return a.stateless_index < b.stateless_index;
              });
    return out;
}

SspModel augment_model(const SspModel &base, const LevelChain &chain,
                       std::size_t memory_cap) {
    if (base.levels != 1)
        throw validation_error("model is already level-augmented");
    chain.validate();

    const int d = chain.level_count();
    const int width = base.disc.steps + 1;
    const int rows = d * width;
    const int m = base.action_count();
    const long double block_bytes = 8.0L * m * rows * rows;
    const long double solver_bytes =
        8.0L * rows * (base.disc.stages + 1) * (m + 8);
    if (block_bytes + solver_bytes > static_cast<long double>(memory_cap)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "augmented model needs about %.0Lf bytes (cap %zu): "
                      "%d actions, %d levels, %d steps, %d stages",
                      block_bytes + solver_bytes, memory_cap, m, d,
                      base.disc.steps, base.disc.stages);
        throw capacity_error(buf);
    }

    // Admitting actions lose the stateful set's share of the reward rate in
    // permanent suspension; the deny partner with the same stateless members
    // carries exactly the remaining share.
    std::vector<double> suspended_rate(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        const ControlAction &act = base.control.actions[std::size_t(a)];
        suspended_rate[std::size_t(a)] = base.inelastic_rate[std::size_t(a)][0];
        if (!act.admits_stateful)
            continue;
        bool found = false;
        for (int b = 0; b < m; ++b) {
            const ControlAction &other = base.control.actions[std::size_t(b)];
            if (!other.admits_stateful && other.stateless_index == act.stateless_index) {
                suspended_rate[std::size_t(a)] = base.inelastic_rate[std::size_t(b)][0];
                found = true;
                break;
            }
        }
        if (!found)
            throw validation_error("admitting action has no deny partner with the same stateless members");
    }

    SspModel out;
    out.disc = base.disc;
    out.control = base.control;
    out.levels = d;
    out.urgency_levels = chain.urgency_levels;
    out.lambda_inelastic = base.lambda_inelastic;
    out.completion_reward = base.completion_reward;
    out.rate_penalty = base.rate_penalty;
    out.step_blocks.reserve(std::size_t(m));
    out.inelastic_rate.assign(std::size_t(m), std::vector<double>(std::size_t(d)));
    for (int a = 0; a < m; ++a) {
        const bool admits = base.control.actions[std::size_t(a)].admits_stateful;
        const Matrix &lvl = admits ? chain.admit : chain.deny;
        const Matrix &blk = base.step_blocks[std::size_t(a)];
        Matrix aug(rows, rows);
        for (int w = 0; w < d; ++w) {
            for (int wp = 0; wp < d; ++wp) {
                const double lw = lvl(w, wp);
                if (lw == 0.0)
                    continue;
                for (int x = 0; x < width; ++x) {
                    for (int xp = x; xp < width; ++xp)
                        aug(w * width + x, wp * width + xp) = lw * blk(x, xp);
                }
            }
        }
        out.step_blocks.push_back(std::move(aug));
        const double rate = base.inelastic_rate[std::size_t(a)][0];
        for (int w = 0; w < d; ++w)
            out.inelastic_rate[std::size_t(a)][std::size_t(w)] =
                (w == chain.suspension_slot()) ? suspended_rate[std::size_t(a)] : rate;
    }
    out.validate();
    return out;
}

} // namespace admctl
