#include "admctl/chain.hpp"

#include <algorithm>
#include <cmath>

#include "admctl/ssp.hpp"

namespace admctl {

namespace {

// Folds raw step probabilities raw[0..M-1] into a full distribution whose
// final entry is the complement, then repairs sub-1e-12 summation excess by
// shaving it off the largest entry. The repair keeps the plain left-to-right
// sum of the result at exactly 1, which downstream code relies on.
StepDistribution fold_tail(std::vector<double> head, int steps) {
    head.resize(static_cast<std::size_t>(steps), 0.0);
    double partial = 0.0;
    for (double v : head)
        partial += v;
    for (int tries = 0; partial > 1.0 && tries < 64; ++tries) {
        auto it = std::max_element(head.begin(), head.end());
        *it -= partial - 1.0;
        if (*it < 0.0)
            *it = 0.0;
        partial = 0.0;
        for (double v : head)
            partial += v;
    }
    if (partial > 1.0)
        throw numeric_error("step probabilities could not be normalized");
    head.push_back(1.0 - partial);
    StepDistribution dist{std::move(head)};
    dist.validate();
    return dist;
}

} // namespace

void StepDistribution::validate() const {
    if (probs.size() < 2)
        throw validation_error("step distribution needs at least steps 0 and 1");
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0) || !(v <= 1.0))
            throw validation_error("step probabilities must lie in [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw validation_error("step probabilities must sum to 1");
}

StepDistribution poisson_step_probs(double rate, double step_size, double stage_length,
                                    int steps) {
    if (!(rate >= 0.0))
        throw validation_error("service rate must be non-negative");
    if (!(step_size > 0.0) || !(stage_length > 0.0))
        throw validation_error("step size and stage length must be positive");
    if (steps < 1)
        throw validation_error("need at least one step");

    double mean = rate * stage_length / step_size;
    std::vector<double> head(static_cast<std::size_t>(steps), 0.0);
    if (mean > 0.0) {
        // Per-term log-space evaluation stays finite for large means, where
        // the cumulative-product recurrence would underflow at the front.
        double log_mean = std::log(mean);
        for (int y = 0; y < steps; ++y)
            head[y] = std::exp(y * log_mean - mean - std::lgamma(y + 1.0));
    } else {
        head[0] = 1.0;
    }
    return fold_tail(std::move(head), steps);
}

StepDistribution custom_step_probs(std::span<const double> raw, int steps) {
    if (steps < 1)
        throw validation_error("need at least one step");
    double total = 0.0;
    for (double v : raw) {
        if (!(v >= 0.0))
            throw validation_error("step probabilities must be non-negative");
        total += v;
    }
    if (total > 1.0 + 1e-12)
        throw validation_error("step probabilities exceed total mass 1");
    std::vector<double> head(raw.begin(),
                             raw.begin() + std::min(raw.size(), static_cast<std::size_t>(steps)));
    return fold_tail(std::move(head), steps);
}

ProgressMatrix progress_matrix(const StepDistribution &dist) {
    dist.validate();
    int steps = dist.steps();
    ProgressMatrix pm{Matrix(steps + 1, steps + 1)};
    for (int x = 0; x < steps; ++x) {
        for (int xp = x; xp < steps; ++xp)
            pm.p(x, xp) = dist.probs[xp - x];
        double overshoot = 0.0; // advance of M-x or more lands on M
        for (int y = steps - x; y <= steps; ++y)
            overshoot += dist.probs[y];
        pm.p(x, steps) = overshoot;
    }
    pm.p(steps, steps) = 1.0;
    return pm;
}

std::vector<StageDistribution> propagate(const ProgressMatrix &matrix, int stages) {
    if (stages < 1)
        throw validation_error("need at least one stage");
    std::vector<ProgressMatrix> same(static_cast<std::size_t>(stages), matrix);
    return propagate(same);
}

std::vector<StageDistribution> propagate(std::span<const ProgressMatrix> matrices) {
    if (matrices.empty())
        throw validation_error("need at least one stage matrix");
    int width = matrices.front().p.rows();
    for (const auto &m : matrices)
        if (m.p.rows() != width || m.p.cols() != width)
            throw validation_error("stage matrices must share dimensions");

    std::vector<StageDistribution> out;
    out.reserve(matrices.size() + 1);
    std::vector<double> f(static_cast<std::size_t>(width), 0.0);
    f[0] = 1.0;
    out.push_back({f});
    for (const auto &m : matrices) {
        std::vector<double> next(static_cast<std::size_t>(width), 0.0);
        for (int x = 0; x < width; ++x) {
            if (f[x] == 0.0)
                continue;
            for (int xp = x; xp < width; ++xp)
                next[xp] += f[x] * m.p(x, xp);
        }
        f = std::move(next);
        out.push_back({f});
    }
    return out;
}

MeanVariance mean_variance(const StageDistribution &f) {
    MeanVariance mv;
    for (std::size_t x = 0; x < f.probs.size(); ++x)
        mv.mean += static_cast<double>(x) * f.probs[x];
    for (std::size_t x = 0; x < f.probs.size(); ++x) {
        double d = static_cast<double>(x) - mv.mean;
        mv.variance += d * d * f.probs[x];
    }
    if (mv.variance < 0.0)
        mv.variance = 0.0;
    return mv;
}

double milestone_risk(const StageDistribution &f, int milestone) {
    if (milestone < 0 || milestone >= static_cast<int>(f.probs.size()))
        throw validation_error("milestone step out of range");
    double risk = 0.0;
    for (int y = 0; y < milestone; ++y)
        risk += f.probs[y];
    return risk;
}

std::vector<double> expected_stages_to_completion(const ProgressMatrix &matrix) {
    int steps = matrix.steps();
    double stay = matrix.p(0, 0);
    if (!(stay < 1.0))
        throw validation_error(
            "completion unreachable: no advancing probability mass, expectation is infinite");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1, 0.0);
    for (int x = steps - 1; x >= 0; --x) {
        double acc = 1.0;
        for (int xp = x + 1; xp < steps; ++xp)
            acc += matrix.p(x, xp) * t[xp];
        t[x] = acc / (1.0 - matrix.p(x, x));
    }
    return t;
}

std::vector<EnvelopePoint> progress_envelope(std::span<const StageDistribution> stages,
                                             const Discretization &d) {
    std::vector<EnvelopePoint> out;
    out.reserve(stages.size());
    auto clamp_size = [&](double s) { return std::clamp(s, 0.0, d.total_size); };
    for (std::size_t k = 0; k < stages.size(); ++k) {
        auto [theta, var] = mean_variance(stages[k]);
        double sigma = std::sqrt(var);
        EnvelopePoint pt;
        pt.stage = static_cast<int>(k);
        pt.time = static_cast<double>(k) * d.stage_length;
        pt.theta = theta;
        pt.sigma = sigma;
        pt.s_mean = clamp_size(d.total_size - d.step_size * theta);
        pt.s_low = clamp_size(d.total_size - d.step_size * (theta + sigma));
        pt.s_high = clamp_size(d.total_size - d.step_size * (theta - sigma));
        pt.miss_risk = milestone_risk(stages[k], static_cast<int>(stages[k].probs.size()) - 1);
        out.push_back(pt);
    }
    return out;
}

std::vector<ProgressMatrix> policy_progress_matrices(const SspModel &model,
                                                     const Policy &policy) {
    if (model.levels != 1)
        throw validation_error("policy progress matrices require an unaugmented model");
    int steps = model.disc.steps;
    std::vector<ProgressMatrix> out;
    out.reserve(static_cast<std::size_t>(model.disc.stages));
    for (int k = 0; k < model.disc.stages; ++k) {
        ProgressMatrix pm{Matrix(steps + 1, steps + 1)};
        for (int x = 0; x <= steps; ++x) {
            int a = policy.action_at(model, 0, x, k);
            auto row = model.step_blocks[a].row(x);
            for (int xp = 0; xp <= steps; ++xp)
                pm.p(x, xp) = row[xp];
        }
        out.push_back(std::move(pm));
    }
    return out;
}

} // namespace admctl
