#include "teamform/config.hpp"

#include <cstdlib>
#include <set>

#include "teamform/error.hpp"
#include "teamform/population_io.hpp"

namespace teamform {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object, complaining about anything left unread.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), ErrorCategory::Config, where() + " must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            fail(ErrorCategory::Config, where(key) + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(std::string_view key = {}) const {
        std::string s = path_.empty() ? "config" : path_;
        if (!key.empty()) s += "." + std::string(key);
        return s;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(ErrorCategory::Config, "unknown key '" + where(key) + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

std::string_view to_string(CvNormalization n) {
    return n == CvNormalization::Bounded ? "bounded" : "capped";
}

CvNormalization parse_cv_normalization(std::string_view s) {
    if (s == "bounded") return CvNormalization::Bounded;
    if (s == "capped") return CvNormalization::Capped;
    fail(ErrorCategory::Config, "cv_normalization must be 'bounded' or 'capped'");
}

std::string_view to_string(DiversityScoreMode m) {
    return m == DiversityScoreMode::Level ? "level" : "delta";
}

DiversityScoreMode parse_diversity_mode(std::string_view s) {
    if (s == "level") return DiversityScoreMode::Level;
    if (s == "delta") return DiversityScoreMode::Delta;
    fail(ErrorCategory::Config, "diversity_mode must be 'level' or 'delta'");
}

template <typename Enum, std::size_t N, typename Parse>
void read_distribution(Section& parent, const char* key, std::array<double, N>& out, Parse parse) {
    const json* j = parent.child(key);
    if (!j) return;
    require(j->is_object(), ErrorCategory::Config, parent.where(key) + " must map category names to probabilities");
    std::array<double, N> dist{};
    for (const auto& [name, value] : j->items()) {
        Enum e{};
        try {
            e = parse(name);
        } catch (const Error&) {
            fail(ErrorCategory::Config, parent.where(key) + ": unknown category '" + name + "'");
        }
        require(value.is_number(), ErrorCategory::Config, parent.where(key) + "." + name + " must be a number");
        dist[static_cast<std::size_t>(e)] = value.template get<double>();
    }
    out = dist;
}

json schema_to_json(const AttributeSchema& s) {
    return {{"gender_categories", s.gender_categories},
            {"race_categories", s.race_categories},
            {"ethnicity_categories", s.ethnicity_categories},
            {"international_categories", s.international_categories},
            {"min_age", s.min_age},
            {"max_age", s.max_age},
            {"cv_normalization", to_string(s.cv_normalization)},
            {"cv_cap", s.cv_cap}};
}

}  // namespace

json config_to_json(const ExperimentConfig& c, bool include_output_dir) {
    json j;
    j["conditions"] = json::array();
    for (auto cond : c.conditions) j["conditions"].push_back(to_string(cond));
    j["sessions"] = c.sessions;
    j["agents"] = c.agents;
    j["rounds"] = c.rounds;
    j["seed"] = c.seed;
    j["pilot_size"] = c.pilot_size;
    j["permutations"] = c.permutations;
    if (include_output_dir) j["output_dir"] = c.output_dir.string();

    j["ga"] = {{"generations", c.ga.generations},
               {"population_size", c.ga.population_size},
               {"swap_attempts_per_generation",
                c.ga.swap_attempts_per_generation ? json(*c.ga.swap_attempts_per_generation) : json(nullptr)},
               {"restarts", c.ga.restarts}};
    j["policy"] = {{"min_criteria", c.policy.min_criteria},
                   {"max_criteria", c.policy.max_criteria},
                   {"skill_probability", c.policy.skill_probability},
                   {"min_importance", c.policy.min_importance},
                   {"max_importance", c.policy.max_importance},
                   {"accept_probability", c.policy.accept_probability},
                   {"random_intercepts", c.policy.random_intercepts}};
    j["choice"] = {{"intercept", c.choice.intercept},
                   {"rank", c.choice.rank},
                   {"same_gender", c.choice.same_gender},
                   {"diversity", c.choice.diversity},
                   {"treatment", c.choice.treatment},
                   {"interaction", c.choice.interaction},
                   {"random_intercept_variance", c.choice.random_intercept_variance}};
    j["recommender"] = {{"diversity_floor", c.recommender.diversity_floor},
                        {"diversity_mode", to_string(c.recommender.diversity_mode)},
                        {"page_size", c.recommender.page_size},
                        {"schema", schema_to_json(c.recommender.schema)}};

    json gender = json::object();
    for (std::size_t i = 0; i < kGenderCount; ++i) gender[std::string(to_string(static_cast<Gender>(i)))] = c.demographics.gender[i];
    json race = json::object();
    for (std::size_t i = 0; i < kRaceCount; ++i) race[std::string(to_string(static_cast<Race>(i)))] = c.demographics.race[i];
    j["demographics"] = {{"gender", gender},
                         {"race", race},
                         {"hispanic", c.demographics.hispanic},
                         {"international", c.demographics.international},
                         {"min_age", c.demographics.min_age},
                         {"max_age", c.demographics.max_age},
                         {"min_skill", c.demographics.min_skill},
                         {"max_skill", c.demographics.max_skill}};
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    Section top(j, "");

    if (const json* conds = top.child("conditions")) {
        require(conds->is_array(), ErrorCategory::Config, "config.conditions must be a list");
        c.conditions.clear();
        for (const auto& v : *conds) {
            require(v.is_string(), ErrorCategory::Config, "config.conditions entries must be strings");
            try {
                c.conditions.push_back(parse_condition(v.get<std::string>()));
            } catch (const Error& e) {
                fail(ErrorCategory::Config, e.what());
            }
        }
    }
    top.read("sessions", c.sessions);
    top.read("agents", c.agents);
    top.read("rounds", c.rounds);
    top.read("seed", c.seed);
    top.read("pilot_size", c.pilot_size);
    top.read("permutations", c.permutations);
    std::string out = c.output_dir.string();
    top.read("output_dir", out);
    c.output_dir = out;

    if (const json* g = top.child("ga")) {
        Section s(*g, "config.ga");
        s.read("generations", c.ga.generations);
        s.read("population_size", c.ga.population_size);
        s.read("restarts", c.ga.restarts);
        if (const json* swaps = s.child("swap_attempts_per_generation"); swaps && !swaps->is_null()) {
            require(swaps->is_number_unsigned(), ErrorCategory::Config,
                    "config.ga.swap_attempts_per_generation must be a positive integer or null");
            c.ga.swap_attempts_per_generation = swaps->get<std::size_t>();
        }
        s.finish();
    }
    if (const json* p = top.child("policy")) {
        Section s(*p, "config.policy");
        s.read("min_criteria", c.policy.min_criteria);
        s.read("max_criteria", c.policy.max_criteria);
        s.read("skill_probability", c.policy.skill_probability);
        s.read("min_importance", c.policy.min_importance);
        s.read("max_importance", c.policy.max_importance);
        s.read("accept_probability", c.policy.accept_probability);
        s.read("random_intercepts", c.policy.random_intercepts);
        s.finish();
    }
    if (const json* p = top.child("choice")) {
        Section s(*p, "config.choice");
        s.read("intercept", c.choice.intercept);
        s.read("rank", c.choice.rank);
        s.read("same_gender", c.choice.same_gender);
        s.read("diversity", c.choice.diversity);
        s.read("treatment", c.choice.treatment);
        s.read("interaction", c.choice.interaction);
        s.read("random_intercept_variance", c.choice.random_intercept_variance);
        s.finish();
    }
    if (const json* r = top.child("recommender")) {
        Section s(*r, "config.recommender");
        s.read("diversity_floor", c.recommender.diversity_floor);
        s.read("page_size", c.recommender.page_size);
        std::string mode(to_string(c.recommender.diversity_mode));
        s.read("diversity_mode", mode);
        c.recommender.diversity_mode = parse_diversity_mode(mode);
        if (const json* sc = s.child("schema")) {
            auto& schema = c.recommender.schema;
            Section ss(*sc, "config.recommender.schema");
            ss.read("gender_categories", schema.gender_categories);
            ss.read("race_categories", schema.race_categories);
            ss.read("ethnicity_categories", schema.ethnicity_categories);
            ss.read("international_categories", schema.international_categories);
            ss.read("min_age", schema.min_age);
            ss.read("max_age", schema.max_age);
            ss.read("cv_cap", schema.cv_cap);
            std::string norm(to_string(schema.cv_normalization));
            ss.read("cv_normalization", norm);
            schema.cv_normalization = parse_cv_normalization(norm);
            ss.finish();
        }
        s.finish();
    }
    if (const json* d = top.child("demographics")) {
        Section s(*d, "config.demographics");
        read_distribution<Gender>(s, "gender", c.demographics.gender, parse_gender);
        read_distribution<Race>(s, "race", c.demographics.race, parse_race);
        s.read("hispanic", c.demographics.hispanic);
        s.read("international", c.demographics.international);
        s.read("min_age", c.demographics.min_age);
        s.read("max_age", c.demographics.max_age);
        s.read("min_skill", c.demographics.min_skill);
        s.read("max_skill", c.demographics.max_skill);
        s.finish();
    }
    top.finish();
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::Config, std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_config(text);
    } catch (const Error& e) {
        fail(e.category(), path.string() + ": " + e.what());
    }
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& configured) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return configured;
}

}  // namespace teamform
