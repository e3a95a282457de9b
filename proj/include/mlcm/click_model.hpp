#pragma once

#include "mlcm/session.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlcm {

/// The model family, ordered from the classic intent-agnostic baseline to the
/// extended intent-aware variant. The variant fixes how the relevance table is
/// keyed and which parameters are learnable.
enum class ModelVariant {
    IntentAgnosticDefault, // p_r(grade) fixed to the default grade map
    IntentAgnosticLearned, // p_r(grade) learned
    IADefault,             // p_r(effective grade) fixed; intent mixture learned
    IASameParams,          // p_r(effective grade) learned, shared across intents
    IADiffParams,          // p_r(intent, effective grade) learned
    EIA,                   // p_r(intent, doc language, grade) learned
};

std::string to_string(ModelVariant v);
std::optional<ModelVariant> variant_from_token(std::string_view token);

/// True for the variants whose relevance probability depends on the intent.
bool is_intent_aware(ModelVariant v);

/// True for the variants whose relevance table is pinned to the default map.
bool has_default_table(ModelVariant v);

/// The ordered finite set of allowed query intents (languages).
class IntentSpace {
public:
    explicit IntentSpace(std::vector<LanguageId> languages);

    int size() const { return static_cast<int>(languages_.size()); }
    const LanguageId& at(int i) const { return languages_[i]; }
    const std::vector<LanguageId>& languages() const { return languages_; }
    std::optional<int> index_of(const LanguageId& lang) const;

    /// Index of lang, or a DomainError naming it when outside the space.
    int require_index(const LanguageId& lang) const;

    bool operator==(const IntentSpace& other) const { return languages_ == other.languages_; }

private:
    std::vector<LanguageId> languages_;
};

/// Default relevance mapping (2^g - 1) / (2^g_max - 1).
double default_relevance(Grade g, int g_max = kMaxGrade);
double default_relevance(int g, int g_max = kMaxGrade);

/// Projection of a universal judgment onto an intent: the grade itself when the
/// document language matches the intent, Bad otherwise.
Grade per_intent_grade(const IntentSpace& intents, const LanguageId& intent,
                       const LanguageId& doc_language, Grade grade);

/// An immutable model variant plus its parameter store: the intent mixture and
/// the relevance-probability table whose key arity depends on the variant.
class ClickModel {
public:
    /// intent_probs must be empty for intent-agnostic variants and must sum to
    /// one otherwise; relevance_table must be empty for the default variants
    /// and total over the variant's key domain otherwise.
    ClickModel(ModelVariant variant, IntentSpace intents, std::vector<double> intent_probs,
               std::vector<double> relevance_table);

    /// Model with the default grade map; intent_probs defaults to uniform for
    /// the intent-aware variants.
    static ClickModel with_default_table(ModelVariant variant, IntentSpace intents,
                                         std::vector<double> intent_probs = {});

    ModelVariant variant() const { return variant_; }
    const IntentSpace& intents() const { return intents_; }

    /// Number of mixture components: 1 for intent-agnostic variants, |I| else.
    int effective_intents() const { return static_cast<int>(intent_probs_.size()); }
    double intent_prob(int intent_idx) const { return intent_probs_[intent_idx]; }
    const std::vector<double>& intent_probs() const { return intent_probs_; }

    /// Core relevance lookup by indices into the intent space. For the
    /// intent-agnostic variants intent_idx must be 0 and lang_idx is ignored.
    double relevance(int intent_idx, int lang_idx, Grade grade) const;

    const std::vector<double>& relevance_table() const { return table_; }

    /// Number of relevance-table cells for the variant (the table is always
    /// stored fully materialized, defaults included).
    static int table_size(ModelVariant variant, int n_intents);

private:
    ModelVariant variant_;
    IntentSpace intents_;
    std::vector<double> intent_probs_; // length = effective intents, sums to 1
    std::vector<double> table_;        // length = table_size(variant, |I|)
};

/// Probability that a user with the given intent is satisfied by the document,
/// resolved through the variant's table keying. The intent must belong to the
/// model's intent space and the document must be judged.
double relevance_probability(const ClickModel& model, const LanguageId& intent,
                             const RankedDoc& doc);

/// Marginal probability of a click at position k (1-based) on the given SERP:
/// the intent mixture of the cascade examination probabilities. Position 1 is
/// always examined, so the value there is exactly 1.
double click_probability(const ClickModel& model, const std::vector<RankedDoc>& serp, int k);

struct StopDistribution {
    std::vector<double> at_position; // mass of first satisfaction at position k+1
    double none = 0.0;               // user exhausts the SERP unsatisfied
};

/// Distribution of the first-satisfaction position under the cascade walk.
/// Masses sum to one.
StopDistribution stop_distribution(const ClickModel& model, const std::vector<RankedDoc>& serp);

/// Parameter count as reported in model comparisons: the relevance-table cells
/// plus the free intent-mixture coordinates of the intent-aware variants.
int parameter_count(ModelVariant variant, int n_intents, int n_grades);

// Parameter file (UTF-8 TSV): "# variant <tag>" and "# languages <l1,l2,...>"
// header comments, then "name<TAB>value" lines with names intent_prob:<lang>
// and prel:<grade>, prel:<intent>:<grade> or prel:<intent>:<doclang>:<grade>
// per the variant arity. Values round-trip exactly.
void write_parameter_file(std::ostream& out, const ClickModel& model);
ClickModel read_parameter_file(std::istream& in);
void save_parameter_file(const std::string& path, const ClickModel& model);
ClickModel load_parameter_file(const std::string& path);

} // namespace mlcm
