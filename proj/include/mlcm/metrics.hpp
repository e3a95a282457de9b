#pragma once

#include "mlcm/click_model.hpp"
#include "mlcm/session.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mlcm {

/// Expected reciprocal rank of the first satisfaction under the model's
/// cascade walk: sum_i p_i sum_k pRel_{i,k}/k prod_{j<k}(1 - pRel_{i,j}).
double err_score(const ClickModel& model, const std::vector<RankedDoc>& serp);

struct PerplexityReport {
    std::vector<double> per_position;
    double average = 0.0;
};

/// Click predictor abstraction scored by perplexity: probability of a click at
/// the 1-based position of the session.
using ClickPredictor = std::function<double(const Session&, int position)>;

/// Per-position perplexity of the predictor on sessions of uniform length,
/// with predictions clamped to [eps, 1-eps]. 1 is ideal, higher is worse.
PerplexityReport perplexity_of_predictor(const ClickPredictor& predictor,
                                         const std::vector<Session>& sessions,
                                         double clamp_epsilon);

/// Perplexity of a click model's marginal click probabilities.
PerplexityReport perplexity(const ClickModel& model, const std::vector<Session>& sessions,
                            double clamp_epsilon = 1e-6);

/// Normalized improvement (p_baseline - p_improved) / (p_baseline - 1) * 100.
double perplexity_gain(double p_baseline, double p_improved);

/// The five absolute online metrics of one session. All zero when the session
/// has no clicks.
struct OnlineMetrics {
    double uctr = 0.0;    // any-click indicator
    double max_rr = 0.0;  // 1 / shallowest clicked rank
    double min_rr = 0.0;  // 1 / deepest clicked rank
    double mean_rr = 0.0; // mean of reciprocal clicked ranks
    double plc = 0.0;     // click count / deepest clicked rank

    std::array<double, 5> as_array() const { return {uctr, max_rr, min_rr, mean_rr, plc}; }
};

inline constexpr std::array<const char*, 5> kOnlineMetricNames = {"UCTR", "MaxRR", "MinRR",
                                                                  "MeanRR", "PLC"};

OnlineMetrics online_metrics(const Session& session);

struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
};

/// Weighted Pearson coefficient with weights normalized to their sum. Empty
/// optional when either weighted variance vanishes.
std::optional<double> weighted_correlation(const std::vector<WeightedPoint>& points);

struct CorrelationReport {
    std::vector<std::string> model_names;
    // coefficient per (model, online metric), metrics ordered as kOnlineMetricNames
    std::vector<std::array<std::optional<double>, 5>> coefficients;
    int n_configurations = 0;
    long n_sessions = 0;
};

/// Groups sessions by configuration and correlates each model's err_score of
/// the configuration's SERP against the mean online metrics of its sessions,
/// weighting by session count.
CorrelationReport correlation_report(const std::vector<ClickModel>& models,
                                     const std::vector<Session>& sessions);

void write_correlation_report(std::ostream& out, const CorrelationReport& report);
void write_perplexity_report(std::ostream& out, const PerplexityReport& report);

} // namespace mlcm
