#include "mlcm/session.hpp"

#include "mlcm/error.hpp"
#include "mlcm/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace mlcm {

std::string to_string(Grade g) {
    switch (g) {
        case Grade::Bad: return "Bad";
        case Grade::Fair: return "Fair";
        case Grade::Good: return "Good";
        case Grade::Excellent: return "Excellent";
        case Grade::Perfect: return "Perfect";
    }
    return "Bad";
}

std::optional<Grade> grade_from_token(std::string_view token) {
    if (token == "Bad") return Grade::Bad;
    if (token == "Fair") return Grade::Fair;
    if (token == "Good") return Grade::Good;
    if (token == "Excellent") return Grade::Excellent;
    if (token == "Perfect") return Grade::Perfect;
    if (token.size() == 1 && token[0] >= '0' && token[0] <= '4')
        return static_cast<Grade>(token[0] - '0');
    return std::nullopt;
}

std::vector<Session> filter_pipeline(const std::vector<Session>& sessions,
                                     const FilterPolicy& policy) {
    if (policy.top_k < 1) throw DomainError("filter policy: top_k must be positive");
    if (policy.allowed_languages.empty())
        throw DomainError("filter policy: allowed_languages must be nonempty");

    std::vector<Session> kept;
    kept.reserve(sessions.size());
    for (const Session& s : sessions) {
        if (policy.allowed_region && s.region != *policy.allowed_region) continue;

        Session out = s;
        if (static_cast<int>(out.docs.size()) > policy.top_k)
            out.docs.resize(policy.top_k);
        while (!out.clicks.empty() && out.clicks.back() > static_cast<int>(out.docs.size()))
            out.clicks.pop_back();

        bool drop = false;
        for (const RankedDoc& d : out.docs) {
            if (policy.require_judgments && !d.grade.has_value()) { drop = true; break; }
            if (!policy.allowed_languages.count(d.language)) { drop = true; break; }
        }
        if (!drop) kept.push_back(std::move(out));
    }
    return kept;
}

std::map<Configuration, std::vector<Session>> group_by_configuration(
    const std::vector<Session>& sessions) {
    std::map<Configuration, std::vector<Session>> groups;
    for (const Session& s : sessions) {
        Configuration key;
        key.query_id = s.query_id;
        key.urls.reserve(s.docs.size());
        for (const RankedDoc& d : s.docs) key.urls.push_back(d.url);
        groups[std::move(key)].push_back(s);
    }
    return groups;
}

SplitResult random_split(const std::vector<Session>& sessions, double test_fraction,
                         std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DomainError("random_split: test_fraction must lie in (0, 1)");

    const std::size_t n = sessions.size();
    SplitResult result;
    if (n == 0) return result;

    // floor on the test side, with a tiny nudge so exact rationals like
    // 3/10 * 10 do not round down through floating-point error.
    const auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(n) + 1e-9));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.next_below(i + 1);
        std::swap(order[i], order[j]);
    }

    std::vector<bool> in_test(n, false);
    for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

    result.test.reserve(n_test);
    result.train.reserve(n - n_test);
    for (std::size_t i = 0; i < n; ++i)
        (in_test[i] ? result.test : result.train).push_back(sessions[i]);
    return result;
}

std::map<std::pair<int, int>, double> click_language_distribution(
    const std::vector<Session>& sessions, int total_clicks, const LanguageId& english_like,
    const LanguageId& native_like) {
    if (total_clicks < 1)
        throw DomainError("click_language_distribution: total_clicks must be positive");

    std::map<std::pair<int, int>, long> counts;
    long qualifying = 0;
    for (const Session& s : sessions) {
        if (static_cast<int>(s.clicks.size()) != total_clicks) continue;
        int english = 0, native = 0;
        bool known = true;
        for (int pos : s.clicks) {
            const LanguageId& lang = s.docs[pos - 1].language;
            if (lang == english_like) ++english;
            else if (lang == native_like) ++native;
            else { known = false; break; }
        }
        if (!known) continue; // click on a language outside the two-way split
        ++qualifying;
        ++counts[{english, native}];
    }

    std::map<std::pair<int, int>, double> percentages;
    for (const auto& [split, count] : counts)
        percentages[split] = 100.0 * static_cast<double>(count) / static_cast<double>(qualifying);
    return percentages;
}

} // namespace mlcm
