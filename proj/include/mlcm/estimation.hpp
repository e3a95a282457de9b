#pragma once

#include "mlcm/click_model.hpp"
#include "mlcm/session.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mlcm {

enum class LikelihoodMode {
    /// Bernoulli log-likelihood of the per-position marginal click
    /// probabilities; defined for arbitrary click patterns.
    Positionwise,
    /// Exact session probability under the strict cascade model; requires
    /// every click set to be a prefix {1..m}, m >= 1.
    Cascade,
};

struct FitOptions {
    LikelihoodMode likelihood_mode = LikelihoodMode::Positionwise;
    double clamp_epsilon = 1e-6;
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    std::uint64_t init_seed = 0;
};

struct FitResult {
    ClickModel model;
    double final_log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false; // gradient norm at the solution below tolerance
};

/// Log-likelihood of the sessions under the model. Positionwise mode clamps
/// every predicted click probability to [eps, 1-eps]; cascade mode throws a
/// DomainError naming the offending session when a click set is not a
/// nonempty prefix.
double log_likelihood(const ClickModel& model, const std::vector<Session>& sessions,
                      const FitOptions& opts);

/// Gradient of log_likelihood in unconstrained coordinates: logit for every
/// learnable table cell, softmax (last logit pinned to zero) for the intent
/// mixture. Vector length equals the variant's free-coordinate count.
std::vector<double> log_likelihood_gradient(const ClickModel& model,
                                            const std::vector<Session>& sessions,
                                            const FitOptions& opts);

/// Number of free optimization coordinates of a variant; zero only for the
/// fully pinned IntentAgnosticDefault.
int learnable_dimension(ModelVariant variant, int n_intents);

/// BFGS maximization of log_likelihood from the seeded deterministic
/// initialization. Stops when the gradient norm falls below
/// opts.gradient_tolerance, when an iteration improves the log-likelihood by
/// less than 1e-9, or at opts.max_iterations.
FitResult fit(ModelVariant variant, const std::vector<Session>& sessions,
              const IntentSpace& intents, const FitOptions& opts);

struct HoldoutCell {
    double perplexity = 0.0;
    double final_log_likelihood = 0.0; // training log-likelihood
    bool converged = false;
};

struct HoldoutReport {
    std::vector<ModelVariant> variants;
    std::vector<std::vector<HoldoutCell>> cells;    // [repeat][variant]
    std::vector<std::vector<ClickModel>> fitted;    // parameter snapshots, same shape

    /// Test perplexities of one variant across repeats (a t-test column).
    std::vector<double> perplexity_column(int variant_idx) const;
};

/// The repeated hold-out protocol: for repeat r split with seed + r, fit every
/// learnable variant on the train part and evaluate the perplexity of every
/// variant (defaults included) on the test part.
HoldoutReport repeated_holdout(const std::vector<Session>& sessions,
                               const std::vector<ModelVariant>& variants, int n_repeats,
                               double test_fraction, std::uint64_t seed,
                               const IntentSpace& intents, const FitOptions& opts);

/// TSV rows: repeat, variant, perplexity, final_ll, converged.
void write_holdout_report(std::ostream& out, const HoldoutReport& report);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

/// Two-sided paired t-test on the differences x - y with n-1 degrees of
/// freedom. Zero-variance differences degenerate to (0, 1) for a zero mean and
/// (+-inf, 0) otherwise.
TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y);

} // namespace mlcm
