#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "teamform/protocol.hpp"
#include "teamform/random.hpp"
#include "teamform/recommender.hpp"
#include "teamform/types.hpp"

namespace teamform {

/// Logistic choice model for "does the searcher invite this recommendation".
/// Defaults are the fitted fixed effects and participant random-intercept variance.
struct ChoiceModelParams {
    double intercept = -3.17;
    double rank = -1.20;
    double same_gender = 0.26;
    double diversity = -0.11;
    double treatment = -0.33;
    double interaction = 0.95;  // diversity x treatment
    double random_intercept_variance = 0.42;

    /// (intercept, rank, same_gender, diversity, treatment, interaction)
    std::array<double, 6> coefficients() const noexcept {
        return {intercept, rank, same_gender, diversity, treatment, interaction};
    }
    void validate() const;
};

struct AgentPolicy {
    int min_criteria = 2;
    int max_criteria = 3;
    double skill_probability = 0.49;
    int min_importance = 1;
    int max_importance = 3;
    double accept_probability = 0.8;
    bool random_intercepts = true;  // draw u ~ N(0, variance) per agent

    void validate() const;
};

struct StandardizationMoments {
    double rank_mean = 0.0;
    double rank_sd = 1.0;
    double diversity_mean = 0.0;
    double diversity_sd = 1.0;

    void validate() const;
    friend bool operator==(const StandardizationMoments&, const StandardizationMoments&) = default;
};

/// Means and population standard deviations of the samples.
StandardizationMoments estimate_moments(std::span<const double> ranks, std::span<const double> diversities);

struct Standardized {
    double rank_z = 0.0;
    double diversity_z = 0.0;
};

Standardized standardize(const StandardizationMoments& moments, double raw_rank, double raw_diversity);

/// Draws 2..3 criteria; each is a skill criterion with probability
/// policy.skill_probability, otherwise one of the four demographic criteria.
/// Importances are positive. A repeated criterion is re-drawn within its class.
Query gen_query(ParticipantId searcher, const AgentPolicy& policy, Rng& rng);

double logistic(double x) noexcept;

double choice_probability(const ChoiceModelParams& params, double rank_z, bool same_gender, double diversity_z,
                          bool treatment, double u);

struct Agent {
    ParticipantId id{};
    double intercept_offset = 0.0;  // personal random intercept u
};

/// One displayed recommendation together with the agent's choice draw.
struct Exposure {
    ParticipantId searcher{};
    ParticipantId candidate{};
    std::uint32_t round = 0;
    std::uint32_t rank = 0;
    double raw_diversity = 0.0;
    double rank_z = 0.0;
    bool same_gender = false;
    double diversity_z = 0.0;
    bool treatment = false;
    bool chosen = false;   // Bernoulli(choice_probability) outcome
    bool invited = false;  // first chosen item in rank order
    friend bool operator==(const Exposure&, const Exposure&) = default;
};

struct SessionDynamics {
    RecommenderConfig recommender;
    ChoiceModelParams choice;
    AgentPolicy policy;
    RankingMode mode = RankingMode::FitOnly;
    StandardizationMoments moments;

    bool treatment() const noexcept { return mode == RankingMode::Fairness; }
};

/// Everyone outside the searcher's group, with their group sizes.
std::vector<Candidate> candidate_pool(const AssemblyState& state, ParticipantId searcher);

struct StepResult {
    std::optional<InvitationId> invitation;
    std::vector<Exposure> exposures;
};

/// Query, look at the first page, and invite the first recommendation whose
/// choice draw succeeds. Agents already in a full team do nothing.
StepResult agent_step(const Agent& agent, AssemblyState& state, const Population& population,
                      const SessionDynamics& dynamics, Rng& rng);

/// Every pending recipient of every open invitation accepts with
/// policy.accept_probability and declines otherwise.
void answer_invitations(AssemblyState& state, const AgentPolicy& policy, Rng& rng);

/// Moments of rank and diversity over `recommendations` first-page
/// recommendations shown to random searchers before any team forms.
StandardizationMoments pilot_moments(const Population& population, const RecommenderConfig& recommender,
                                     const AgentPolicy& policy, RankingMode mode, std::size_t recommendations,
                                     Rng& rng);

std::vector<Agent> make_agents(const Population& population, const ChoiceModelParams& params,
                               const AgentPolicy& policy, Rng& rng);

struct AssemblyRun {
    AssemblyState state;
    Partition partition;
    std::vector<Exposure> exposures;
    StandardizationMoments moments;
    double grouped_fraction = 0.0;     // in a group of >= 2 just before the deadline
    double full_team_fraction = 0.0;   // in a group of 4 just before the deadline
};

struct AssemblyOptions {
    std::size_t rounds = 10;
    std::size_t pilot_size = 500;
};

/// Full agency session: pilot moments, `rounds` rounds of agent steps in a
/// shuffled order followed by invitation answers, then the deadline fill.
AssemblyRun simulate_assembly(const Population& population, const RecommenderConfig& recommender,
                              const ChoiceModelParams& choice, const AgentPolicy& policy, RankingMode mode,
                              const AssemblyOptions& options, Rng& rng);

/// Synthetic exposures drawn straight from the choice model: pages of `page_size`
/// ranks, same-gender ~ Bernoulli(0.5), diversity_z ~ N(0,1), treatment assigned
/// per searcher, `queries_per_searcher` pages per searcher.
std::vector<Exposure> simulate_choice_exposures(const ChoiceModelParams& params, std::size_t count,
                                                bool random_intercepts, Rng& rng, std::size_t page_size = 10,
                                                std::size_t queries_per_searcher = 2);

}  // namespace teamform
