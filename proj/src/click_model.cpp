#include "mlcm/click_model.hpp"

#include "mlcm/error.hpp"
#include "text_util.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mlcm {

namespace {

constexpr double kProbSumTolerance = 1e-12;

} // namespace

std::string to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::IntentAgnosticDefault: return "intent-agnostic-default";
        case ModelVariant::IntentAgnosticLearned: return "intent-agnostic-learned";
        case ModelVariant::IADefault: return "ia-default";
        case ModelVariant::IASameParams: return "ia-same-params";
        case ModelVariant::IADiffParams: return "ia-diff-params";
        case ModelVariant::EIA: return "eia";
    }
    return "eia";
}

std::optional<ModelVariant> variant_from_token(std::string_view token) {
    if (token == "intent-agnostic-default" || token == "agnostic-default")
        return ModelVariant::IntentAgnosticDefault;
    if (token == "intent-agnostic-learned" || token == "agnostic-learned")
        return ModelVariant::IntentAgnosticLearned;
    if (token == "ia-default") return ModelVariant::IADefault;
    if (token == "ia-same-params" || token == "ia-same") return ModelVariant::IASameParams;
    if (token == "ia-diff-params" || token == "ia-diff") return ModelVariant::IADiffParams;
    if (token == "eia") return ModelVariant::EIA;
    return std::nullopt;
}

bool is_intent_aware(ModelVariant v) {
    return v != ModelVariant::IntentAgnosticDefault && v != ModelVariant::IntentAgnosticLearned;
}

bool has_default_table(ModelVariant v) {
    return v == ModelVariant::IntentAgnosticDefault || v == ModelVariant::IADefault;
}

IntentSpace::IntentSpace(std::vector<LanguageId> languages) : languages_(std::move(languages)) {
    if (languages_.empty()) throw DomainError("intent space must be nonempty");
    for (std::size_t i = 0; i < languages_.size(); ++i) {
        const LanguageId& lang = languages_[i];
        if (lang.empty()) throw DomainError("intent space: empty language token");
        if (lang.find_first_of(":,|;\t ") != std::string::npos)
            throw DomainError("intent space: language token '" + lang +
                              "' contains a reserved character");
        for (std::size_t j = i + 1; j < languages_.size(); ++j)
            if (languages_[j] == lang)
                throw DomainError("intent space: duplicate language '" + lang + "'");
    }
}

std::optional<int> IntentSpace::index_of(const LanguageId& lang) const {
    for (std::size_t i = 0; i < languages_.size(); ++i)
        if (languages_[i] == lang) return static_cast<int>(i);
    return std::nullopt;
}

int IntentSpace::require_index(const LanguageId& lang) const {
    const auto idx = index_of(lang);
    if (!idx) throw DomainError("language '" + lang + "' is outside the intent space");
    return *idx;
}

double default_relevance(Grade g, int g_max) { return default_relevance(static_cast<int>(g), g_max); }

double default_relevance(int g, int g_max) {
    if (g_max < 1) throw DomainError("default_relevance: g_max must be positive");
    if (g < 0 || g > g_max) throw DomainError("default_relevance: grade outside 0..g_max");
    return (std::exp2(g) - 1.0) / (std::exp2(g_max) - 1.0);
}

Grade per_intent_grade(const IntentSpace& intents, const LanguageId& intent,
                       const LanguageId& doc_language, Grade grade) {
    intents.require_index(intent);
    intents.require_index(doc_language);
    return intent == doc_language ? grade : Grade::Bad;
}

int ClickModel::table_size(ModelVariant variant, int n_intents) {
    switch (variant) {
        case ModelVariant::IntentAgnosticDefault:
        case ModelVariant::IntentAgnosticLearned:
        case ModelVariant::IADefault:
        case ModelVariant::IASameParams: return kGradeCount;
        case ModelVariant::IADiffParams: return n_intents * kGradeCount;
        case ModelVariant::EIA: return n_intents * n_intents * kGradeCount;
    }
    return 0;
}

namespace {

std::vector<double> default_table(ModelVariant variant, int n_intents) {
    std::vector<double> table(static_cast<std::size_t>(ClickModel::table_size(variant, n_intents)));
    if (variant == ModelVariant::EIA) {
        for (int i = 0; i < n_intents; ++i)
            for (int l = 0; l < n_intents; ++l)
                for (int g = 0; g < kGradeCount; ++g)
                    table[(static_cast<std::size_t>(i) * n_intents + l) * kGradeCount + g] =
                        i == l ? default_relevance(g) : default_relevance(0);
    } else if (variant == ModelVariant::IADiffParams) {
        for (int i = 0; i < n_intents; ++i)
            for (int g = 0; g < kGradeCount; ++g)
                table[static_cast<std::size_t>(i) * kGradeCount + g] = default_relevance(g);
    } else {
        for (int g = 0; g < kGradeCount; ++g) table[g] = default_relevance(g);
    }
    return table;
}

} // namespace

ClickModel::ClickModel(ModelVariant variant, IntentSpace intents, std::vector<double> intent_probs,
                       std::vector<double> relevance_table)
    : variant_(variant), intents_(std::move(intents)), intent_probs_(std::move(intent_probs)),
      table_(std::move(relevance_table)) {
    const int n = intents_.size();

    if (is_intent_aware(variant_)) {
        if (static_cast<int>(intent_probs_.size()) != n)
            throw DomainError("click model: need one intent probability per language");
        double sum = 0.0;
        for (double p : intent_probs_) {
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("click model: intent probability outside [0, 1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbSumTolerance)
            throw DomainError("click model: intent probabilities must sum to 1");
    } else {
        if (!intent_probs_.empty())
            throw DomainError("click model: intent-agnostic variants take no intent probabilities");
        intent_probs_ = {1.0};
    }

    if (has_default_table(variant_)) {
        if (!table_.empty())
            throw DomainError("click model: default variants take no relevance table");
        table_ = default_table(variant_, n);
    } else {
        if (static_cast<int>(table_.size()) != table_size(variant_, n))
            throw DomainError("click model: relevance table must be total over the key domain");
        for (double p : table_)
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("click model: relevance probability outside [0, 1]");
    }
}

ClickModel ClickModel::with_default_table(ModelVariant variant, IntentSpace intents,
                                          std::vector<double> intent_probs) {
    const int n = intents.size();
    if (is_intent_aware(variant) && intent_probs.empty())
        intent_probs.assign(static_cast<std::size_t>(n), 1.0 / n);
    if (has_default_table(variant))
        return ClickModel(variant, std::move(intents), std::move(intent_probs), {});
    return ClickModel(variant, std::move(intents), std::move(intent_probs),
                      default_table(variant, n));
}

double ClickModel::relevance(int intent_idx, int lang_idx, Grade grade) const {
    const int g = static_cast<int>(grade);
    const int n = intents_.size();
    switch (variant_) {
        case ModelVariant::IntentAgnosticDefault:
        case ModelVariant::IntentAgnosticLearned: return table_[g];
        case ModelVariant::IADefault:
        case ModelVariant::IASameParams: return table_[intent_idx == lang_idx ? g : 0];
        case ModelVariant::IADiffParams:
            return table_[static_cast<std::size_t>(intent_idx) * kGradeCount +
                          (intent_idx == lang_idx ? g : 0)];
        case ModelVariant::EIA:
            return table_[(static_cast<std::size_t>(intent_idx) * n + lang_idx) * kGradeCount + g];
    }
    return 0.0;
}

double relevance_probability(const ClickModel& model, const LanguageId& intent,
                             const RankedDoc& doc) {
    const int intent_idx = model.intents().require_index(intent);
    if (!doc.grade) throw DomainError("relevance_probability: document '" + doc.url +
                                      "' has no judgment");
    if (!is_intent_aware(model.variant())) return model.relevance(0, 0, *doc.grade);
    const int lang_idx = model.intents().require_index(doc.language);
    return model.relevance(intent_idx, lang_idx, *doc.grade);
}

namespace {

// (lang index, grade) pairs of a fully judged SERP, resolved against the
// model's intent space. For intent-agnostic models the language is not used.
std::vector<std::pair<int, Grade>> resolve_serp(const ClickModel& model,
                                                const std::vector<RankedDoc>& serp) {
    std::vector<std::pair<int, Grade>> docs;
    docs.reserve(serp.size());
    const bool aware = is_intent_aware(model.variant());
    for (const RankedDoc& d : serp) {
        if (!d.grade) throw DomainError("unjudged document '" + d.url + "' in SERP");
        const int lang = aware ? model.intents().require_index(d.language) : 0;
        docs.emplace_back(lang, *d.grade);
    }
    return docs;
}

} // namespace

double click_probability(const ClickModel& model, const std::vector<RankedDoc>& serp, int k) {
    if (k < 1 || k > static_cast<int>(serp.size()))
        throw DomainError("click_probability: position out of range");
    const auto docs = resolve_serp(model, serp);
    double total = 0.0;
    for (int i = 0; i < model.effective_intents(); ++i) {
        double examine = 1.0;
        for (int j = 0; j + 1 < k; ++j)
            examine *= 1.0 - model.relevance(i, docs[j].first, docs[j].second);
        total += model.intent_prob(i) * examine;
    }
    return total;
}

StopDistribution stop_distribution(const ClickModel& model, const std::vector<RankedDoc>& serp) {
    if (serp.empty()) throw DomainError("stop_distribution: empty SERP");
    const auto docs = resolve_serp(model, serp);

    StopDistribution dist;
    dist.at_position.assign(serp.size(), 0.0);
    dist.none = 0.0;
    for (int i = 0; i < model.effective_intents(); ++i) {
        const double p_i = model.intent_prob(i);
        double examine = 1.0;
        for (std::size_t k = 0; k < docs.size(); ++k) {
            const double rel = model.relevance(i, docs[k].first, docs[k].second);
            dist.at_position[k] += p_i * examine * rel;
            examine *= 1.0 - rel;
        }
        dist.none += p_i * examine;
    }
    return dist;
}

int parameter_count(ModelVariant variant, int n_intents, int n_grades) {
    if (n_intents < 1) throw DomainError("parameter_count: n_intents must be positive");
    if (n_grades < 2) throw DomainError("parameter_count: n_grades must be at least 2");
    switch (variant) {
        case ModelVariant::IntentAgnosticDefault:
        case ModelVariant::IntentAgnosticLearned: return n_grades;
        case ModelVariant::IADefault:
        case ModelVariant::IASameParams: return n_grades + (n_intents - 1);
        case ModelVariant::IADiffParams: return n_intents * n_grades + (n_intents - 1);
        case ModelVariant::EIA: return n_intents * n_intents * n_grades + (n_intents - 1);
    }
    return 0;
}

namespace {

std::string table_cell_name(ModelVariant variant, const IntentSpace& intents, int cell) {
    const int n = intents.size();
    switch (variant) {
        case ModelVariant::IntentAgnosticDefault:
        case ModelVariant::IntentAgnosticLearned:
        case ModelVariant::IADefault:
        case ModelVariant::IASameParams:
            return "prel:" + to_string(static_cast<Grade>(cell));
        case ModelVariant::IADiffParams:
            return "prel:" + intents.at(cell / kGradeCount) + ":" +
                   to_string(static_cast<Grade>(cell % kGradeCount));
        case ModelVariant::EIA: {
            const int g = cell % kGradeCount;
            const int pair = cell / kGradeCount;
            return "prel:" + intents.at(pair / n) + ":" + intents.at(pair % n) + ":" +
                   to_string(static_cast<Grade>(g));
        }
    }
    return {};
}

} // namespace

void write_parameter_file(std::ostream& out, const ClickModel& model) {
    out << "# variant " << to_string(model.variant()) << '\n';
    out << "# languages ";
    const auto& langs = model.intents().languages();
    for (std::size_t i = 0; i < langs.size(); ++i) {
        if (i) out << ',';
        out << langs[i];
    }
    out << '\n';
    if (is_intent_aware(model.variant()))
        for (int i = 0; i < model.intents().size(); ++i)
            out << "intent_prob:" << model.intents().at(i) << '\t'
                << detail::format_double(model.intent_prob(i)) << '\n';
    const auto& table = model.relevance_table();
    for (std::size_t cell = 0; cell < table.size(); ++cell)
        out << table_cell_name(model.variant(), model.intents(), static_cast<int>(cell)) << '\t'
            << detail::format_double(table[cell]) << '\n';
}

ClickModel read_parameter_file(std::istream& in) {
    std::optional<ModelVariant> variant;
    std::optional<IntentSpace> intents;
    std::vector<std::pair<std::string, double>> params;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream header(line);
            std::string hash, key, value;
            header >> hash >> key >> value;
            if (key == "variant") {
                variant = variant_from_token(value);
                if (!variant) throw ParseError(line_no, "unknown variant '" + value + "'");
            } else if (key == "languages") {
                std::vector<LanguageId> langs;
                for (auto token : detail::split_view(value, ','))
                    langs.emplace_back(token);
                intents.emplace(std::move(langs));
            }
            continue;
        }
        const auto fields = detail::split_view(line, '\t');
        if (fields.size() != 2) throw ParseError(line_no, "expected name<TAB>value");
        params.emplace_back(std::string(fields[0]), detail::parse_double(fields[1], line_no));
    }

    if (!variant) throw ParseError(line_no, "missing '# variant' header");
    if (!intents) throw ParseError(line_no, "missing '# languages' header");

    const int n = intents->size();
    std::vector<double> intent_probs;
    std::vector<bool> have_intent(static_cast<std::size_t>(n), false);
    if (is_intent_aware(*variant)) intent_probs.assign(static_cast<std::size_t>(n), 0.0);

    const int cells = ClickModel::table_size(*variant, n);
    std::vector<double> table(static_cast<std::size_t>(cells), 0.0);
    std::vector<bool> have_cell(static_cast<std::size_t>(cells), false);
    std::vector<std::string> cell_names(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c) cell_names[c] = table_cell_name(*variant, *intents, c);

    for (const auto& [name, value] : params) {
        if (name.rfind("intent_prob:", 0) == 0) {
            if (!is_intent_aware(*variant))
                throw ParseError(0, "intent_prob entry in an intent-agnostic parameter file");
            const int idx = intents->require_index(name.substr(12));
            if (have_intent[idx]) throw ParseError(0, "duplicate parameter '" + name + "'");
            have_intent[idx] = true;
            intent_probs[idx] = value;
            continue;
        }
        bool found = false;
        for (int c = 0; c < cells; ++c) {
            if (cell_names[c] == name) {
                if (have_cell[c]) throw ParseError(0, "duplicate parameter '" + name + "'");
                have_cell[c] = true;
                table[c] = value;
                found = true;
                break;
            }
        }
        if (!found) throw ParseError(0, "unknown parameter name '" + name + "'");
    }

    if (is_intent_aware(*variant))
        for (int i = 0; i < n; ++i)
            if (!have_intent[i])
                throw ParseError(0, "missing intent_prob:" + intents->at(i));
    for (int c = 0; c < cells; ++c)
        if (!have_cell[c]) throw ParseError(0, "missing parameter '" + cell_names[c] + "'");

    if (has_default_table(*variant)) {
        for (int c = 0; c < cells; ++c)
            if (std::abs(table[c] - default_relevance(c % kGradeCount)) > 1e-12)
                throw ParseError(0, "default-table variant with a non-default value for '" +
                                        cell_names[c] + "'");
        table.clear();
    }

    return ClickModel(*variant, std::move(*intents), std::move(intent_probs), std::move(table));
}

void save_parameter_file(const std::string& path, const ClickModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write parameter file: " + path);
    write_parameter_file(out, model);
}

ClickModel load_parameter_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open parameter file: " + path);
    return read_parameter_file(in);
}

} // namespace mlcm
