#include "mlcm/estimation.hpp"

#include "mlcm/error.hpp"
#include "mlcm/metrics.hpp"
#include "mlcm/rng.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

namespace mlcm {

namespace {

constexpr double kLikelihoodImprovementStop = 1e-9;
constexpr double kArmijoSlope = 1e-4;

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Parameter layout: unconstrained coordinates <-> model probabilities.
// Table cells use a logistic reparameterization; the intent mixture uses a
// softmax with the last logit pinned to zero.
// ---------------------------------------------------------------------------

struct Layout {
    ModelVariant variant;
    int n_intents = 1;
    int n_table = 0;  // learnable table cells (0 when the table is pinned)
    int n_intent = 0; // free mixture coordinates

    int dim() const { return n_table + n_intent; }

    // Coordinate behind the table cell read by relevance(intent, lang, grade);
    // -1 when the cell is pinned to the default map.
    int table_coord(int intent_idx, int lang_idx, int grade) const {
        switch (variant) {
            case ModelVariant::IntentAgnosticDefault:
            case ModelVariant::IADefault: return -1;
            case ModelVariant::IntentAgnosticLearned: return grade;
            case ModelVariant::IASameParams: return intent_idx == lang_idx ? grade : 0;
            case ModelVariant::IADiffParams:
                return intent_idx * kGradeCount + (intent_idx == lang_idx ? grade : 0);
            case ModelVariant::EIA:
                return (intent_idx * n_intents + lang_idx) * kGradeCount + grade;
        }
        return -1;
    }
};

Layout make_layout(ModelVariant variant, int n_intents) {
    Layout layout;
    layout.variant = variant;
    layout.n_intents = n_intents;
    layout.n_table = has_default_table(variant) ? 0 : ClickModel::table_size(variant, n_intents);
    layout.n_intent = is_intent_aware(variant) ? n_intents - 1 : 0;
    return layout;
}

std::vector<double> softmax_pinned(std::span<const double> free_logits) {
    double max_logit = 0.0; // the pinned logit
    for (double v : free_logits) max_logit = std::max(max_logit, v);
    std::vector<double> probs(free_logits.size() + 1);
    double denom = 0.0;
    for (std::size_t i = 0; i < free_logits.size(); ++i) {
        probs[i] = std::exp(free_logits[i] - max_logit);
        denom += probs[i];
    }
    probs.back() = std::exp(-max_logit);
    denom += probs.back();
    for (double& p : probs) p /= denom;
    return probs;
}

ClickModel model_from_theta(const Layout& layout, const IntentSpace& intents,
                            std::span<const double> theta) {
    std::vector<double> table(static_cast<std::size_t>(layout.n_table));
    for (int c = 0; c < layout.n_table; ++c) table[c] = sigmoid(theta[c]);

    std::vector<double> intent_probs;
    if (is_intent_aware(layout.variant))
        intent_probs = softmax_pinned(theta.subspan(layout.n_table, layout.n_intent));

    return ClickModel(layout.variant, intents, std::move(intent_probs), std::move(table));
}

// ---------------------------------------------------------------------------
// Session aggregation. Sessions sharing the (language, grade) signature of
// their ranking share every model prediction, so the likelihood only needs
// per-signature click counts. This keeps evaluation cost bounded by the
// number of distinct rankings instead of the number of sessions.
// ---------------------------------------------------------------------------

struct SigGroup {
    std::vector<std::pair<int, int>> docs; // (lang index, grade)
    std::vector<double> click_count;       // positionwise: clicks per position
    std::vector<double> prefix_count;      // cascade: sessions per prefix length
    double session_count = 0.0;
};

struct PreparedLog {
    std::vector<SigGroup> groups;
    std::size_t max_len = 0;
};

PreparedLog prepare_log(const IntentSpace& intents, const std::vector<Session>& sessions,
                        LikelihoodMode mode) {
    PreparedLog log;
    std::map<std::vector<std::pair<int, int>>, std::size_t> index;
    std::vector<std::pair<int, int>> key;
    for (const Session& s : sessions) {
        key.clear();
        for (const RankedDoc& d : s.docs) {
            if (!d.grade)
                throw DomainError("log_likelihood: unjudged document in session '" +
                                  s.session_id + "'");
            key.emplace_back(intents.require_index(d.language), static_cast<int>(*d.grade));
        }
        auto [it, inserted] = index.try_emplace(key, log.groups.size());
        if (inserted) {
            SigGroup group;
            group.docs = key;
            group.click_count.assign(key.size(), 0.0);
            group.prefix_count.assign(key.size(), 0.0);
            log.groups.push_back(std::move(group));
            log.max_len = std::max(log.max_len, key.size());
        }
        SigGroup& group = log.groups[it->second];
        group.session_count += 1.0;
        if (mode == LikelihoodMode::Cascade) {
            const int m = static_cast<int>(s.clicks.size());
            if (m == 0 || s.clicks.back() != m)
                throw DomainError("log_likelihood: session '" + s.session_id +
                                  "' has a non-prefix click set, impossible under the strict "
                                  "cascade model");
            group.prefix_count[m - 1] += 1.0;
        } else {
            for (int pos : s.clicks) group.click_count[pos - 1] += 1.0;
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// Likelihood and gradient. The gradient (when requested) is with respect to
// the layout's unconstrained coordinates evaluated at the model's current
// probabilities; the chain factors are r(1-r) for logistic cells and
// p_a(delta - p) for the softmax, so no inverse mapping is ever needed.
// ---------------------------------------------------------------------------

struct Scratch {
    std::vector<std::vector<double>> rel;    // [intent][doc]
    std::vector<std::vector<double>> prefix; // [intent][0..len]
    std::vector<double> w;                   // positionwise dLL/dQ_k
    std::vector<double> suffix;              // cascade exclusion products
};

double eval_log_likelihood(const ClickModel& model, const PreparedLog& log, LikelihoodMode mode,
                           double eps, const Layout* layout, std::vector<double>* grad) {
    const int n_eff = model.effective_intents();
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    std::vector<double> dll_dp(static_cast<std::size_t>(n_eff), 0.0);

    Scratch scratch;
    scratch.rel.assign(n_eff, std::vector<double>(log.max_len, 0.0));
    scratch.prefix.assign(n_eff, std::vector<double>(log.max_len + 1, 1.0));
    scratch.w.assign(log.max_len + 1, 0.0);
    scratch.suffix.assign(log.max_len + 1, 1.0);

    double ll = 0.0;
    for (const SigGroup& group : log.groups) {
        const int len = static_cast<int>(group.docs.size());
        for (int i = 0; i < n_eff; ++i) {
            scratch.prefix[i][0] = 1.0;
            for (int j = 0; j < len; ++j) {
                const double r = model.relevance(i, group.docs[j].first,
                                                 static_cast<Grade>(group.docs[j].second));
                scratch.rel[i][j] = r;
                scratch.prefix[i][j + 1] = scratch.prefix[i][j] * (1.0 - r);
            }
        }

        if (mode == LikelihoodMode::Positionwise) {
            for (int k = 1; k <= len; ++k) {
                double q_raw = 0.0;
                for (int i = 0; i < n_eff; ++i)
                    q_raw += model.intent_prob(i) * scratch.prefix[i][k - 1];
                const double q = std::clamp(q_raw, eps, 1.0 - eps);
                const double n1 = group.click_count[k - 1];
                const double n0 = group.session_count - n1;
                ll += n1 * std::log(q) + n0 * std::log(1.0 - q);
                if (grad)
                    scratch.w[k] = (q_raw > eps && q_raw < 1.0 - eps)
                                       ? n1 / q_raw - n0 / (1.0 - q_raw)
                                       : 0.0;
            }
            if (!grad) continue;
            for (int i = 0; i < n_eff; ++i) {
                const double p_i = model.intent_prob(i);
                for (int k = 1; k <= len; ++k)
                    dll_dp[i] += scratch.w[k] * scratch.prefix[i][k - 1];
                if (layout->n_table == 0) continue;
                for (int j = 0; j < len; ++j) {
                    const int coord = layout->table_coord(i, group.docs[j].first,
                                                          group.docs[j].second);
                    if (coord < 0) continue;
                    double excl = scratch.prefix[i][j];
                    double acc = 0.0;
                    for (int k = j + 2; k <= len; ++k) {
                        acc += scratch.w[k] * excl;
                        excl *= 1.0 - scratch.rel[i][k - 1];
                    }
                    const double r = scratch.rel[i][j];
                    (*grad)[coord] += -p_i * acc * r * (1.0 - r);
                }
            }
        } else {
            for (int m = 1; m <= len; ++m) {
                const double count = group.prefix_count[m - 1];
                if (count == 0.0) continue;
                double prob = 0.0;
                for (int i = 0; i < n_eff; ++i) {
                    const double t_i = m < len
                                           ? scratch.prefix[i][m - 1] * scratch.rel[i][m - 1]
                                           : scratch.prefix[i][len - 1];
                    prob += model.intent_prob(i) * t_i;
                }
                ll += count * std::log(std::max(prob, 1e-300));
                if (!grad) continue;

                const double coef = count / std::max(prob, 1e-300);
                const int top = m < len ? m - 2 : len - 2; // last doc of the unsatisfied run
                for (int i = 0; i < n_eff; ++i) {
                    const double p_i = model.intent_prob(i);
                    const double t_i = m < len
                                           ? scratch.prefix[i][m - 1] * scratch.rel[i][m - 1]
                                           : scratch.prefix[i][len - 1];
                    dll_dp[i] += coef * t_i;
                    if (layout->n_table == 0) continue;

                    if (m < len) {
                        const int coord = layout->table_coord(i, group.docs[m - 1].first,
                                                              group.docs[m - 1].second);
                        if (coord >= 0) {
                            const double r = scratch.rel[i][m - 1];
                            (*grad)[coord] +=
                                coef * p_i * scratch.prefix[i][m - 1] * r * (1.0 - r);
                        }
                    }
                    if (top < 0) continue;
                    scratch.suffix[top + 1] = 1.0;
                    for (int j = top; j >= 0; --j)
                        scratch.suffix[j] = scratch.suffix[j + 1] * (1.0 - scratch.rel[i][j]);
                    const double tail = m < len ? scratch.rel[i][m - 1] : 1.0;
                    for (int j = 0; j <= top; ++j) {
                        const int coord = layout->table_coord(i, group.docs[j].first,
                                                              group.docs[j].second);
                        if (coord < 0) continue;
                        const double excl = scratch.prefix[i][j] * scratch.suffix[j + 1];
                        const double r = scratch.rel[i][j];
                        (*grad)[coord] += -coef * p_i * tail * excl * r * (1.0 - r);
                    }
                }
            }
        }
    }

    if (grad && layout->n_intent > 0) {
        double weighted = 0.0;
        for (int i = 0; i < n_eff; ++i) weighted += model.intent_prob(i) * dll_dp[i];
        for (int a = 0; a < layout->n_intent; ++a)
            (*grad)[layout->n_table + a] += model.intent_prob(a) * (dll_dp[a] - weighted);
    }
    return ll;
}

double norm2(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

} // namespace

int learnable_dimension(ModelVariant variant, int n_intents) {
    return make_layout(variant, n_intents).dim();
}

double log_likelihood(const ClickModel& model, const std::vector<Session>& sessions,
                      const FitOptions& opts) {
    const PreparedLog log = prepare_log(model.intents(), sessions, opts.likelihood_mode);
    return eval_log_likelihood(model, log, opts.likelihood_mode, opts.clamp_epsilon, nullptr,
                               nullptr);
}

std::vector<double> log_likelihood_gradient(const ClickModel& model,
                                            const std::vector<Session>& sessions,
                                            const FitOptions& opts) {
    const Layout layout = make_layout(model.variant(), model.intents().size());
    std::vector<double> grad(static_cast<std::size_t>(layout.dim()), 0.0);
    const PreparedLog log = prepare_log(model.intents(), sessions, opts.likelihood_mode);
    eval_log_likelihood(model, log, opts.likelihood_mode, opts.clamp_epsilon, &layout, &grad);
    return grad;
}

FitResult fit(ModelVariant variant, const std::vector<Session>& sessions,
              const IntentSpace& intents, const FitOptions& opts) {
    if (sessions.empty()) throw DomainError("fit: empty session list");
    const Layout layout = make_layout(variant, intents.size());
    const int dim = layout.dim();
    if (dim == 0)
        throw DomainError("fit: variant '" + to_string(variant) + "' has no learnable parameters");
    if (opts.max_iterations < 1) throw DomainError("fit: max_iterations must be positive");
    if (!(opts.clamp_epsilon > 0.0 && opts.clamp_epsilon < 0.5))
        throw DomainError("fit: clamp_epsilon must lie in (0, 0.5)");

    const PreparedLog log = prepare_log(intents, sessions, opts.likelihood_mode);

    // Deterministic initialization: all coordinates at zero (probability 0.5,
    // uniform intents) plus +-0.01 noise to break ties.
    std::vector<double> theta(static_cast<std::size_t>(dim));
    Rng rng(opts.init_seed);
    for (double& t : theta) t = rng.next_double(-0.01, 0.01);

    std::vector<double> grad(static_cast<std::size_t>(dim));
    const auto evaluate = [&](std::span<const double> point, std::vector<double>& grad_out) {
        const ClickModel model = model_from_theta(layout, intents, point);
        return -eval_log_likelihood(model, log, opts.likelihood_mode, opts.clamp_epsilon,
                                    &layout, &grad_out);
        // minimize f = -LL; grad_out holds dLL/dtheta and is negated below
    };

    double f = evaluate(theta, grad);
    for (double& g : grad) g = -g;

    // Dense inverse-Hessian approximation.
    std::vector<double> hess(static_cast<std::size_t>(dim) * dim, 0.0);
    const auto reset_hessian = [&] {
        std::fill(hess.begin(), hess.end(), 0.0);
        for (int i = 0; i < dim; ++i) hess[static_cast<std::size_t>(i) * dim + i] = 1.0;
    };
    reset_hessian();
    bool scaled = false;

    std::vector<double> direction(static_cast<std::size_t>(dim));
    std::vector<double> theta_new(static_cast<std::size_t>(dim));
    std::vector<double> grad_new(static_cast<std::size_t>(dim));
    std::vector<double> hy(static_cast<std::size_t>(dim));

    int iterations = 0;
    bool first_step = true;
    while (iterations < opts.max_iterations) {
        if (norm2(grad) < opts.gradient_tolerance) break;

        for (int i = 0; i < dim; ++i) {
            double sum = 0.0;
            for (int j = 0; j < dim; ++j)
                sum += hess[static_cast<std::size_t>(i) * dim + j] * grad[j];
            direction[i] = -sum;
        }
        double slope = 0.0;
        for (int i = 0; i < dim; ++i) slope += direction[i] * grad[i];
        if (slope >= 0.0) { // not a descent direction: restart from steepest descent
            reset_hessian();
            for (int i = 0; i < dim; ++i) direction[i] = -grad[i];
            slope = 0.0;
            for (int i = 0; i < dim; ++i) slope += direction[i] * grad[i];
            if (slope == 0.0) break;
        }

        double alpha = first_step ? std::min(1.0, 1.0 / std::max(1.0, norm2(grad))) : 1.0;
        double f_new = f;
        bool accepted = false;
        for (int trial = 0; trial < 60; ++trial) {
            for (int i = 0; i < dim; ++i) theta_new[i] = theta[i] + alpha * direction[i];
            f_new = evaluate(theta_new, grad_new);
            for (double& g : grad_new) g = -g;
            const double slack = 1e-12 * std::abs(f) + 1e-300;
            if (f_new <= f + kArmijoSlope * alpha * slope + slack) { accepted = true; break; }
            alpha *= 0.5;
        }
        if (!accepted) break;
        ++iterations;
        first_step = false;

        const double improvement = f - f_new;

        double ys = 0.0, yy = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double s_i = alpha * direction[i];
            const double y_i = grad_new[i] - grad[i];
            ys += y_i * s_i;
            yy += y_i * y_i;
        }
        if (ys > 1e-12 * std::sqrt(yy) * alpha * norm2(direction)) {
            if (!scaled && yy > 0.0) { // scale before the first update
                const double gamma = ys / yy;
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j)
                        hess[static_cast<std::size_t>(i) * dim + j] =
                            i == j ? gamma : 0.0;
                scaled = true;
            }
            const double rho = 1.0 / ys;
            double yhy = 0.0;
            for (int i = 0; i < dim; ++i) {
                double sum = 0.0;
                for (int j = 0; j < dim; ++j)
                    sum += hess[static_cast<std::size_t>(i) * dim + j] *
                           (grad_new[j] - grad[j]);
                hy[i] = sum;
                yhy += (grad_new[i] - grad[i]) * sum;
            }
            for (int i = 0; i < dim; ++i) {
                const double s_i = alpha * direction[i];
                for (int j = 0; j < dim; ++j) {
                    const double s_j = alpha * direction[j];
                    hess[static_cast<std::size_t>(i) * dim + j] +=
                        (1.0 + rho * yhy) * rho * s_i * s_j - rho * (hy[i] * s_j + s_i * hy[j]);
                }
            }
        }

        theta.swap(theta_new);
        grad.swap(grad_new);
        f = f_new;
        if (improvement < kLikelihoodImprovementStop) break;
    }

    FitResult result{model_from_theta(layout, intents, theta), -f, iterations,
                     norm2(grad) < opts.gradient_tolerance};
    return result;
}

std::vector<double> HoldoutReport::perplexity_column(int variant_idx) const {
    std::vector<double> column;
    column.reserve(cells.size());
    for (const auto& row : cells) column.push_back(row[variant_idx].perplexity);
    return column;
}

HoldoutReport repeated_holdout(const std::vector<Session>& sessions,
                               const std::vector<ModelVariant>& variants, int n_repeats,
                               double test_fraction, std::uint64_t seed,
                               const IntentSpace& intents, const FitOptions& opts) {
    if (n_repeats < 1) throw DomainError("repeated_holdout: n_repeats must be positive");
    if (variants.empty()) throw DomainError("repeated_holdout: no variants given");

    HoldoutReport report;
    report.variants = variants;
    for (int r = 1; r <= n_repeats; ++r) {
        try {
            const SplitResult split = random_split(sessions, test_fraction, seed + r);
            std::vector<HoldoutCell> row;
            std::vector<ClickModel> models;
            for (ModelVariant variant : variants) {
                HoldoutCell cell;
                if (learnable_dimension(variant, intents.size()) > 0) {
                    const FitResult res = fit(variant, split.train, intents, opts);
                    cell.final_log_likelihood = res.final_log_likelihood;
                    cell.converged = res.converged;
                    models.push_back(res.model);
                } else {
                    ClickModel model = ClickModel::with_default_table(variant, intents);
                    cell.final_log_likelihood = log_likelihood(model, split.train, opts);
                    cell.converged = true;
                    models.push_back(std::move(model));
                }
                cell.perplexity =
                    perplexity(models.back(), split.test, opts.clamp_epsilon).average;
                row.push_back(cell);
            }
            report.cells.push_back(std::move(row));
            report.fitted.push_back(std::move(models));
        } catch (const Error& e) {
            throw Error("repeat " + std::to_string(r) + ": " + e.what());
        }
    }
    return report;
}

void write_holdout_report(std::ostream& out, const HoldoutReport& report) {
    out << "repeat\tvariant\tperplexity\tfinal_ll\tconverged\n";
    for (std::size_t r = 0; r < report.cells.size(); ++r)
        for (std::size_t v = 0; v < report.variants.size(); ++v) {
            const HoldoutCell& cell = report.cells[r][v];
            out << (r + 1) << '\t' << to_string(report.variants[v]) << '\t'
                << detail::format_double(cell.perplexity) << '\t'
                << detail::format_double(cell.final_log_likelihood) << '\t'
                << (cell.converged ? 1 : 0) << '\n';
        }
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

} // namespace

TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DomainError("paired_t_test: samples differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw DomainError("paired_t_test: need at least 2 pairs");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = (x[i] - y[i]) - mean;
        var += dev * dev;
    }
    var /= static_cast<double>(n - 1);

    if (var <= 0.0) {
        if (mean == 0.0) return {0.0, 1.0};
        return {mean > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity(),
                0.0};
    }

    const double df = static_cast<double>(n - 1);
    const double t = mean / std::sqrt(var / static_cast<double>(n));
    const double p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return {t, p};
}

} // namespace mlcm
