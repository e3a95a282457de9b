#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlcm {

/// Editorial relevance grade on the 5-grade scale.
enum class Grade : int { Bad = 0, Fair = 1, Good = 2, Excellent = 3, Perfect = 4 };

inline constexpr int kMaxGrade = 4;
inline constexpr int kGradeCount = 5;

std::string to_string(Grade g);

/// Parses a symbolic grade name or an integer 0..4. Empty optional on failure.
std::optional<Grade> grade_from_token(std::string_view token);

/// A result language; the intent values of the multilingual setting.
using LanguageId = std::string;

/// One ranked result: URL, document language and (possibly missing) judgment.
struct RankedDoc {
    std::string url;
    LanguageId language;
    std::optional<Grade> grade; // empty = no editorial judgment (NA)
};

/// One user/query interaction: the presented ranking plus the observed clicks.
struct Session {
    std::string session_id;
    std::string query_id;
    std::string region;
    std::vector<RankedDoc> docs;  // presentation order
    std::vector<int> clicks;      // 1-based positions, sorted, unique

    bool clicked(int position) const {
        return std::binary_search(clicks.begin(), clicks.end(), position);
    }
};

/// A query together with the ordered result URLs; the grouping unit for
/// offline/online metric correlation. Equality is the full URL order.
struct Configuration {
    std::string query_id;
    std::vector<std::string> urls;

    auto operator<=>(const Configuration&) const = default;
};

/// Session-selection policy applied before any model fitting or evaluation.
struct FilterPolicy {
    int top_k = 5;
    std::set<LanguageId> allowed_languages;
    std::optional<std::string> allowed_region;
    bool require_judgments = true;
};

/// Truncates every session to its first top_k documents (dropping deeper
/// clicks) and removes sessions with unjudged documents, documents in a
/// language outside the allowed set, or a mismatched region. Input order is
/// preserved; the operation is idempotent.
std::vector<Session> filter_pipeline(const std::vector<Session>& sessions,
                                     const FilterPolicy& policy);

/// Partitions sessions by (query_id, ordered URL list).
std::map<Configuration, std::vector<Session>> group_by_configuration(
    const std::vector<Session>& sessions);

struct SplitResult {
    std::vector<Session> test;
    std::vector<Session> train;
};

/// Uniformly random partition with |test| = floor(test_fraction * N).
/// Deterministic for a fixed seed; input order is preserved inside each part.
SplitResult random_split(const std::vector<Session>& sessions, double test_fraction,
                         std::uint64_t seed);

/// Distribution of click-language splits: over sessions with exactly
/// total_clicks clicks, the percentage whose clicks divide as E clicks on
/// english_like documents and N on native_like ones (E + N = total_clicks).
/// Empty map when no session qualifies; otherwise values sum to 100.
std::map<std::pair<int, int>, double> click_language_distribution(
    const std::vector<Session>& sessions, int total_clicks,
    const LanguageId& english_like, const LanguageId& native_like);

} // namespace mlcm
