#pragma once

#include <span>
#include <vector>

#include "admctl/core.hpp"
#include "admctl/scenario.hpp"

namespace admctl {

struct SspModel;
struct Policy;

/// Distribution of the number of size steps completed in one stage, with the
/// tail folded into the final entry: probs[y] for y < M is the raw step
/// probability and probs[M] = 1 - sum of the rest, so the entries sum to 1
/// exactly by construction.
struct StepDistribution {
    std::vector<double> probs; // length M+1

    int steps() const { return static_cast<int>(probs.size()) - 1; }
    void validate() const; // throws validation_error
};

/// Steps per stage when the elastic flow is served at a constant rate and
/// step completions arrive as a Poisson count with mean
/// rate * stage_length / step_size. Rate 0 yields a point mass at 0 steps.
StepDistribution poisson_step_probs(double rate, double step_size, double stage_length,
                                    int steps);

/// Step distribution from explicit raw probabilities raw[0], raw[1], ...;
/// mass at or beyond index `steps`, and any mass missing from the sequence,
/// folds into the final entry. Throws validation_error for negative entries
/// or total mass above 1.
StepDistribution custom_step_probs(std::span<const double> raw, int steps);

/// One-stage transition matrix over steps 0..M. Upper triangular: from step
/// x the chain advances y steps with probability probs[y] and any advance
/// that would pass step M lands on M, which is absorbing.
struct ProgressMatrix {
    Matrix p; // (M+1) x (M+1)

    int steps() const { return p.rows() - 1; }
};

ProgressMatrix progress_matrix(const StepDistribution &dist);

/// Probability over steps 0..M after some number of stages.
struct StageDistribution {
    std::vector<double> probs;
};

/// Stage distributions f(0..N) from f(0) concentrated at step 0, either
/// under one fixed matrix or a per-stage sequence (stage k uses matrices[k]).
std::vector<StageDistribution> propagate(const ProgressMatrix &matrix, int stages);
std::vector<StageDistribution> propagate(std::span<const ProgressMatrix> matrices);

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;
};

MeanVariance mean_variance(const StageDistribution &f);

/// Probability of being strictly below the milestone step.
double milestone_risk(const StageDistribution &f, int milestone);

/// Expected stages to reach the absorbing step M from each starting step,
/// by back-substitution on the upper-triangular transient block. Throws
/// validation_error when some step cannot advance (probs[0] = 1), which
/// makes the expectation infinite.
std::vector<double> expected_stages_to_completion(const ProgressMatrix &matrix);

/// Remaining-size trajectory summary at one stage: the mean curve and the
/// one-standard-deviation band, clamped to [0, S]; theta and sigma are the
/// unclamped step-space mean and deviation, and miss_risk is the probability
/// that the flow is not yet complete at this stage.
struct EnvelopePoint {
    int stage = 0;
    double time = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
    double s_mean = 0.0;
    double s_low = 0.0;
    double s_high = 0.0;
    double miss_risk = 0.0;
};

std::vector<EnvelopePoint> progress_envelope(std::span<const StageDistribution> stages,
                                             const Discretization &d);

/// Per-stage progress matrices induced by a policy on an unaugmented model:
/// entry (x, x') of matrix k is the transition probability from cell (x,k)
/// to (x',k+1) under the policy's action there. Throws validation_error for
/// level-augmented models, whose elastic progress is not a step chain.
std::vector<ProgressMatrix> policy_progress_matrices(const SspModel &model,
                                                     const Policy &policy);

} // namespace admctl
