#pragma once

#include "mlcm/click_model.hpp"
#include "mlcm/rng.hpp"
#include "mlcm/session.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mlcm {

/// Synthetic corpus shape: SERPs of judged documents with languages and grades
/// sampled independently from the given mixes.
struct CorpusSpec {
    int n_queries = 1;
    int serp_size = 5;
    std::vector<std::pair<LanguageId, double>> language_mix;
    std::array<double, kGradeCount> grade_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
    std::uint64_t seed = 0;
};

struct SerpEntry {
    std::string query_id;
    std::vector<RankedDoc> docs;
};

std::vector<SerpEntry> generate_corpus(const CorpusSpec& spec);

/// User behavior of the generator. Strict mode clicks every examined document
/// and stops only on satisfaction; dbn mode adds snippet attraction and
/// abandonment, producing realistic skips and no-click sessions.
struct BehaviorSpec {
    enum class Mode { Strict, Dbn };
    Mode mode = Mode::Strict;
    std::array<double, kGradeCount> attraction = {0.3, 0.45, 0.6, 0.75, 0.9}; // by grade
    double abandonment = 0.1;
};

/// One cascade walk over the SERP; returns the clicked positions (sorted).
std::vector<int> simulate_session(const ClickModel& model, const BehaviorSpec& behavior,
                                  const std::vector<RankedDoc>& serp, Rng& rng);

/// sessions_per_serp sessions for every SERP. Each session draws from its own
/// stream keyed by (seed, query id, session index), so the output is
/// independent of corpus iteration order.
std::vector<Session> simulate_log(const ClickModel& model, const BehaviorSpec& behavior,
                                  const std::vector<SerpEntry>& corpus, int sessions_per_serp,
                                  std::uint64_t seed);

// Corpus file: TSV "query_id<TAB>docs" with the session-log doc encoding.
void write_corpus(std::ostream& out, const std::vector<SerpEntry>& corpus);
std::vector<SerpEntry> read_corpus(std::istream& in);
void save_corpus(const std::string& path, const std::vector<SerpEntry>& corpus);
std::vector<SerpEntry> load_corpus(const std::string& path);

} // namespace mlcm
