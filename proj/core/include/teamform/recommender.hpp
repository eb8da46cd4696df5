#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamform/diversity.hpp"
#include "teamform/types.hpp"

namespace teamform {

enum class CriterionKind : std::uint8_t { SkillLevel, SimilarAge, SameGender, SameRace, SameInternationality };

inline constexpr int kMinImportance = -3;
inline constexpr int kMaxImportance = 3;

struct Criterion {
    CriterionKind kind = CriterionKind::SkillLevel;
    Skill skill = Skill::Campaigns;  // meaningful for SkillLevel only
    int importance = 0;

    /// Same kind (and skill, for SkillLevel), ignoring importance.
    bool same_target(const Criterion& other) const noexcept {
        return kind == other.kind && (kind != CriterionKind::SkillLevel || skill == other.skill);
    }
    friend bool operator==(const Criterion&, const Criterion&) = default;
};

/// Text form used by the CLI and event logs: "skill:design", "similar_age",
/// "same_gender", "same_race", "same_international".
std::string criterion_key(const Criterion& c);
Criterion parse_criterion(std::string_view key, int importance);

/// Parses "key=weight,key=weight", e.g. "skill:design=2,same_gender=-3".
std::vector<Criterion> parse_query_spec(std::string_view spec);

struct Query {
    ParticipantId searcher{};
    std::vector<Criterion> criteria;

    /// At least two criteria, each with a nonzero importance in [-3,3], no repeated target.
    void validate() const;
};

enum class RankingMode : std::uint8_t { FitOnly, Fairness };

/// Level: D is the diversity of the team after adding the candidate.
/// Delta: D is the change relative to the current team. Both are floored.
enum class DiversityScoreMode : std::uint8_t { Level, Delta };

std::string_view to_string(RankingMode mode) noexcept;
RankingMode parse_ranking_mode(std::string_view text);

struct RecommenderConfig {
    AttributeSchema schema;
    double diversity_floor = 0.01;
    DiversityScoreMode diversity_mode = DiversityScoreMode::Level;
    std::size_t page_size = 10;

    void validate() const;
};

/// Per-criterion score in [0,1].
double criterion_score(const Participant& searcher, const Participant& candidate, const Criterion& criterion,
                       const AttributeSchema& schema);

struct FitScore {
    double score = 0.0;          // sum of importance * criterion score
    double match_percent = 0.0;  // position of score between the query's attainable extremes
};

FitScore fit_score(const Participant& searcher, const Participant& candidate, const Query& query,
                   const AttributeSchema& schema);

/// Average normalized diversity of team + candidate, floored at config.diversity_floor.
double marginal_diversity(std::span<const Participant* const> team, const Participant& candidate,
                          const RecommenderConfig& config);

struct Candidate {
    ParticipantId id{};
    std::size_t group_size = 1;  // size of the candidate's current group
};

struct Recommendation {
    ParticipantId candidate{};
    double fit_score = 0.0;
    double diversity_score = 0.0;
    double combined_score = 0.0;
    std::size_t rank = 0;  // 1-based over the whole ordering
    double match_percent = 0.0;
};

struct RecommendationPage {
    std::vector<Recommendation> items;
    std::size_t page = 1;
    std::size_t total = 0;  // eligible candidates across all pages
};

/// Ranks `pool` for the searcher, whose current team is `team` (which includes the
/// searcher). Candidates in `team`, the searcher, and candidates whose group would
/// overflow a team of four are dropped before scoring.
RecommendationPage rank_candidates(const Population& population, std::span<const ParticipantId> team,
                                   std::span<const Candidate> pool, const Query& query, RankingMode mode,
                                   const RecommenderConfig& config, std::size_t page = 1);

}  // namespace teamform
