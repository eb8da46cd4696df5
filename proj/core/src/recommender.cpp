#include "teamform/recommender.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "teamform/error.hpp"

namespace teamform {

std::string criterion_key(const Criterion& c) {
    switch (c.kind) {
    case CriterionKind::SkillLevel: return "skill:" + std::string(to_string(c.skill));
    case CriterionKind::SimilarAge: return "similar_age";
    case CriterionKind::SameGender: return "same_gender";
    case CriterionKind::SameRace: return "same_race";
    case CriterionKind::SameInternationality: return "same_international";
    }
    return "unknown";
}

Criterion parse_criterion(std::string_view key, int importance) {
    Criterion c;
    c.importance = importance;
    if (key.starts_with("skill:")) {
        c.kind = CriterionKind::SkillLevel;
        c.skill = parse_skill(key.substr(6));
    } else if (key == "similar_age") {
        c.kind = CriterionKind::SimilarAge;
    } else if (key == "same_gender") {
        c.kind = CriterionKind::SameGender;
    } else if (key == "same_race") {
        c.kind = CriterionKind::SameRace;
    } else if (key == "same_international") {
        c.kind = CriterionKind::SameInternationality;
    } else {
        fail(ErrorCategory::InvalidInput, "unknown criterion '" + std::string(key) + "'");
    }
    return c;
}

std::vector<Criterion> parse_query_spec(std::string_view spec) {
    std::vector<Criterion> out;
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const auto item = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
        const auto eq = item.find('=');
        require(eq != std::string_view::npos, ErrorCategory::InvalidInput,
                "query item '" + std::string(item) + "' must be key=weight");
        const auto weight_text = item.substr(eq + 1);
        int weight = 0;
        const auto* first = weight_text.data();
        if (!weight_text.empty() && weight_text.front() == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, weight_text.data() + weight_text.size(), weight);
        require(ec == std::errc{} && ptr == weight_text.data() + weight_text.size(), ErrorCategory::InvalidInput,
                "bad weight in query item '" + std::string(item) + "'");
        out.push_back(parse_criterion(item.substr(0, eq), weight));
    }
    return out;
}

void Query::validate() const {
    require(criteria.size() >= 2, ErrorCategory::InvalidInput, "a query needs at least two criteria");
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        require(c.importance != 0 && c.importance >= kMinImportance && c.importance <= kMaxImportance,
                ErrorCategory::InvalidInput, "criterion " + criterion_key(c) + ": importance must be in [-3,3] and nonzero");
        for (std::size_t j = 0; j < i; ++j) {
            require(!criteria[j].same_target(c), ErrorCategory::InvalidInput,
                    "criterion " + criterion_key(c) + " repeated");
        }
    }
}

std::string_view to_string(RankingMode mode) noexcept {
    return mode == RankingMode::FitOnly ? "fit_only" : "fairness";
}

RankingMode parse_ranking_mode(std::string_view text) {
    if (text == "fit_only") return RankingMode::FitOnly;
    if (text == "fairness") return RankingMode::Fairness;
    fail(ErrorCategory::InvalidInput, "unknown ranking mode '" + std::string(text) + "'");
}

void RecommenderConfig::validate() const {
    schema.validate();
    require(diversity_floor > 0.0 && diversity_floor <= 1.0, ErrorCategory::Config,
            "recommender: diversity_floor must be in (0,1]");
    require(page_size >= 1, ErrorCategory::Config, "recommender: page_size must be >= 1");
}

double criterion_score(const Participant& searcher, const Participant& candidate, const Criterion& criterion,
                       const AttributeSchema& schema) {
    switch (criterion.kind) {
    case CriterionKind::SkillLevel:
        return static_cast<double>(candidate.skill(criterion.skill) - kMinSkill) / (kMaxSkill - kMinSkill);
    case CriterionKind::SimilarAge:
        return std::max(0.0, 1.0 - std::abs(searcher.age - candidate.age) / schema.age_range());
    case CriterionKind::SameGender: return searcher.gender == candidate.gender ? 1.0 : 0.0;
    case CriterionKind::SameRace: return searcher.race == candidate.race ? 1.0 : 0.0;
    case CriterionKind::SameInternationality: return searcher.international == candidate.international ? 1.0 : 0.0;
    }
    return 0.0;
}

FitScore fit_score(const Participant& searcher, const Participant& candidate, const Query& query,
                   const AttributeSchema& schema) {
    double score = 0.0;
    double lowest = 0.0;
    double highest = 0.0;
    for (const auto& c : query.criteria) {
        const double w = c.importance;
        score += w * criterion_score(searcher, candidate, c, schema);
        (w < 0 ? lowest : highest) += w;
    }
    FitScore out{score, 100.0};
    if (highest > lowest) out.match_percent = 100.0 * (score - lowest) / (highest - lowest);
    return out;
}

double marginal_diversity(std::span<const Participant* const> team, const Participant& candidate,
                          const RecommenderConfig& config) {
    require(!team.empty(), ErrorCategory::InvalidInput, "marginal_diversity: team must include the searcher");
    std::array<const Participant*, kMaxTeamSize> joined{};
    require(team.size() < kMaxTeamSize, ErrorCategory::InvalidInput,
            "marginal_diversity: team is already full");
    for (std::size_t i = 0; i < team.size(); ++i) {
        require(team[i]->id != candidate.id, ErrorCategory::InvalidInput,
                "candidate " + std::to_string(raw(candidate.id)) + " already in team");
        joined[i] = team[i];
    }
    joined[team.size()] = &candidate;
    const double after =
        diversity_profile(std::span<const Participant* const>(joined.data(), team.size() + 1), config.schema)
            .mean_component();
    double d = after;
    if (config.diversity_mode == DiversityScoreMode::Delta) {
        d = after - diversity_profile(team, config.schema).mean_component();
    }
    return std::clamp(d, config.diversity_floor, 1.0);
}

RecommendationPage rank_candidates(const Population& population, std::span<const ParticipantId> team,
                                   std::span<const Candidate> pool, const Query& query, RankingMode mode,
                                   const RecommenderConfig& config, std::size_t page) {
    query.validate();
    require(page >= 1, ErrorCategory::InvalidInput, "page numbers start at 1");
    const Participant& searcher = population.at(query.searcher);
    require(std::find(team.begin(), team.end(), query.searcher) != team.end(), ErrorCategory::InvalidInput,
            "searcher's team must include the searcher");

    std::vector<const Participant*> members;
    for (auto id : team) members.push_back(&population.at(id));

    std::vector<Recommendation> ranked;
    if (team.size() < kMaxTeamSize) {
        for (const auto& c : pool) {
            if (c.id == query.searcher || std::find(team.begin(), team.end(), c.id) != team.end()) continue;
            if (c.group_size + team.size() > kMaxTeamSize) continue;
            const Participant& candidate = population.at(c.id);
            const FitScore fit = fit_score(searcher, candidate, query, config.schema);
            Recommendation r;
            r.candidate = c.id;
            r.fit_score = fit.score;
            r.match_percent = fit.match_percent;
            r.diversity_score = marginal_diversity(members, candidate, config);
            r.combined_score = mode == RankingMode::Fairness ? fit.score * r.diversity_score : fit.score;
            ranked.push_back(r);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
        return a.candidate < b.candidate;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;

    RecommendationPage out;
    out.page = page;
    out.total = ranked.size();
    const std::size_t begin = (page - 1) * config.page_size;
    if (begin < ranked.size()) {
        const std::size_t end = std::min(ranked.size(), begin + config.page_size);
        out.items.assign(ranked.begin() + static_cast<std::ptrdiff_t>(begin),
                         ranked.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

}  // namespace teamform
