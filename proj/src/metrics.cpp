#include "mlcm/metrics.hpp"

#include "mlcm/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mlcm {

double err_score(const ClickModel& model, const std::vector<RankedDoc>& serp) {
    if (serp.empty()) throw DomainError("err_score: empty SERP");
    const bool aware = is_intent_aware(model.variant());

    double score = 0.0;
    for (int i = 0; i < model.effective_intents(); ++i) {
        double examine = 1.0;
        double per_intent = 0.0;
        for (std::size_t k = 0; k < serp.size(); ++k) {
            const RankedDoc& d = serp[k];
            if (!d.grade) throw DomainError("err_score: unjudged document '" + d.url + "'");
            const int lang = aware ? model.intents().require_index(d.language) : 0;
            const double rel = model.relevance(i, lang, *d.grade);
            per_intent += examine * rel / static_cast<double>(k + 1);
            examine *= 1.0 - rel;
        }
        score += model.intent_prob(i) * per_intent;
    }
    return score;
}

PerplexityReport perplexity_of_predictor(const ClickPredictor& predictor,
                                         const std::vector<Session>& sessions,
                                         double clamp_epsilon) {
    if (sessions.empty()) throw DomainError("perplexity: empty session list");
    const std::size_t k_max = sessions.front().docs.size();
    for (const Session& s : sessions)
        if (s.docs.size() != k_max)
            throw DomainError("perplexity: sessions must have uniform length (session '" +
                              s.session_id + "' differs)");

    PerplexityReport report;
    report.per_position.assign(k_max, 0.0);
    const double inv_n = 1.0 / static_cast<double>(sessions.size());
    for (std::size_t k = 1; k <= k_max; ++k) {
        double log_sum = 0.0; // sum of per-session log factors
        for (const Session& s : sessions) {
            const double q =
                std::clamp(predictor(s, static_cast<int>(k)), clamp_epsilon, 1.0 - clamp_epsilon);
            log_sum += s.clicked(static_cast<int>(k)) ? std::log(q) : std::log(1.0 - q);
        }
        report.per_position[k - 1] = std::exp(-log_sum * inv_n);
    }
    double total = 0.0;
    for (double p : report.per_position) total += p;
    report.average = total / static_cast<double>(k_max);
    return report;
}

PerplexityReport perplexity(const ClickModel& model, const std::vector<Session>& sessions,
                            double clamp_epsilon) {
    return perplexity_of_predictor(
        [&model](const Session& s, int position) {
            return click_probability(model, s.docs, position);
        },
        sessions, clamp_epsilon);
}

double perplexity_gain(double p_baseline, double p_improved) {
    if (!(p_baseline > 1.0))
        throw DomainError("perplexity_gain: baseline perplexity must exceed 1");
    return (p_baseline - p_improved) / (p_baseline - 1.0) * 100.0;
}

OnlineMetrics online_metrics(const Session& session) {
    OnlineMetrics m;
    if (session.clicks.empty()) return m;

    const int shallowest = session.clicks.front();
    const int deepest = session.clicks.back();
    m.uctr = 1.0;
    m.max_rr = 1.0 / static_cast<double>(shallowest);
    m.min_rr = 1.0 / static_cast<double>(deepest);
    double rr_sum = 0.0;
    for (int pos : session.clicks) rr_sum += 1.0 / static_cast<double>(pos);
    m.mean_rr = rr_sum / static_cast<double>(session.clicks.size());
    m.plc = static_cast<double>(session.clicks.size()) / static_cast<double>(deepest);
    return m;
}

std::optional<double> weighted_correlation(const std::vector<WeightedPoint>& points) {
    if (points.size() < 2) throw DomainError("weighted_correlation: need at least 2 points");
    double w_sum = 0.0;
    for (const WeightedPoint& p : points) {
        if (!(p.w > 0.0)) throw DomainError("weighted_correlation: weights must be positive");
        w_sum += p.w;
    }

    double mean_x = 0.0, mean_y = 0.0;
    for (const WeightedPoint& p : points) {
        mean_x += p.w * p.x;
        mean_y += p.w * p.y;
    }
    mean_x /= w_sum;
    mean_y /= w_sum;

    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (const WeightedPoint& p : points) {
        const double dx = p.x - mean_x;
        const double dy = p.y - mean_y;
        cov += p.w * dx * dy;
        var_x += p.w * dx * dx;
        var_y += p.w * dy * dy;
    }
    cov /= w_sum;
    var_x /= w_sum;
    var_y /= w_sum;

    if (var_x <= 0.0 || var_y <= 0.0) return std::nullopt;
    return cov / std::sqrt(var_x * var_y);
}

CorrelationReport correlation_report(const std::vector<ClickModel>& models,
                                     const std::vector<Session>& sessions) {
    const auto groups = group_by_configuration(sessions);
    if (groups.size() < 2)
        throw DomainError("correlation_report: need at least 2 configurations");

    struct ConfigPoint {
        const std::vector<RankedDoc>* serp;
        std::array<double, 5> mean_online;
        double weight;
    };
    std::vector<ConfigPoint> configs;
    configs.reserve(groups.size());
    long n_sessions = 0;
    for (const auto& [key, group] : groups) {
        ConfigPoint c;
        c.serp = &group.front().docs;
        c.weight = static_cast<double>(group.size());
        c.mean_online.fill(0.0);
        for (const Session& s : group) {
            const auto metrics = online_metrics(s).as_array();
            for (std::size_t m = 0; m < metrics.size(); ++m) c.mean_online[m] += metrics[m];
        }
        for (double& v : c.mean_online) v /= c.weight;
        configs.push_back(c);
        n_sessions += static_cast<long>(group.size());
    }

    CorrelationReport report;
    report.n_configurations = static_cast<int>(configs.size());
    report.n_sessions = n_sessions;
    for (const ClickModel& model : models) {
        std::vector<double> scores;
        scores.reserve(configs.size());
        for (const ConfigPoint& c : configs) scores.push_back(err_score(model, *c.serp));

        std::array<std::optional<double>, 5> row;
        for (std::size_t m = 0; m < row.size(); ++m) {
            std::vector<WeightedPoint> points;
            points.reserve(configs.size());
            for (std::size_t c = 0; c < configs.size(); ++c)
                points.push_back({scores[c], configs[c].mean_online[m], configs[c].weight});
            row[m] = weighted_correlation(points);
        }
        report.model_names.push_back(to_string(model.variant()));
        report.coefficients.push_back(row);
    }
    return report;
}

void write_correlation_report(std::ostream& out, const CorrelationReport& report) {
    out << "variant";
    for (const char* name : kOnlineMetricNames) out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < report.model_names.size(); ++i) {
        out << report.model_names[i];
        for (const auto& coeff : report.coefficients[i])
            out << '\t' << (coeff ? detail::format_double(*coeff) : std::string("nan"));
        out << '\n';
    }
}

void write_perplexity_report(std::ostream& out, const PerplexityReport& report) {
    for (std::size_t k = 0; k < report.per_position.size(); ++k)
        out << (k + 1) << '\t' << detail::format_double(report.per_position[k]) << '\n';
    out << "average\t" << detail::format_double(report.average) << '\n';
}

} // namespace mlcm
