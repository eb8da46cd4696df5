#include "teamform/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "teamform/error.hpp"

namespace teamform {

namespace {

constexpr std::array<CriterionKind, 4> kDemographicCriteria{
    CriterionKind::SimilarAge, CriterionKind::SameGender, CriterionKind::SameRace,
    CriterionKind::SameInternationality};

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_sd(std::span<const double> xs, double mean) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

void ChoiceModelParams::validate() const {
    require(random_intercept_variance >= 0.0, ErrorCategory::Config,
            "choice model: random_intercept_variance must be >= 0");
}

void AgentPolicy::validate() const {
    require(min_criteria >= 2 && max_criteria >= min_criteria, ErrorCategory::Config,
            "agent policy: need 2 <= min_criteria <= max_criteria");
    require(max_criteria <= static_cast<int>(kDemographicCriteria.size()), ErrorCategory::Config,
            "agent policy: max_criteria must be <= 4");
    require(min_importance >= 1 && max_importance <= kMaxImportance && min_importance <= max_importance,
            ErrorCategory::Config, "agent policy: importances must lie in [1,3]");
    require(probability(skill_probability) && probability(accept_probability), ErrorCategory::Config,
            "agent policy: probabilities must lie in [0,1]");
}

void StandardizationMoments::validate() const {
    require(rank_sd > 0.0 && diversity_sd > 0.0, ErrorCategory::Domain, "standardization sd must be positive");
}

StandardizationMoments estimate_moments(std::span<const double> ranks, std::span<const double> diversities) {
    require(!ranks.empty() && !diversities.empty(), ErrorCategory::Domain, "moments need samples");
    StandardizationMoments m;
    m.rank_mean = mean_of(ranks);
    m.rank_sd = population_sd(ranks, m.rank_mean);
    m.diversity_mean = mean_of(diversities);
    m.diversity_sd = population_sd(diversities, m.diversity_mean);
    return m;
}

Standardized standardize(const StandardizationMoments& moments, double raw_rank, double raw_diversity) {
    moments.validate();
    return {(raw_rank - moments.rank_mean) / moments.rank_sd,
            (raw_diversity - moments.diversity_mean) / moments.diversity_sd};
}

Query gen_query(ParticipantId searcher, const AgentPolicy& policy, Rng& rng) {
    policy.validate();
    Query q;
    q.searcher = searcher;
    const int count = rng.uniform_int(policy.min_criteria, policy.max_criteria);
    while (static_cast<int>(q.criteria.size()) < count) {
        Criterion c;
        const bool skill = rng.bernoulli(policy.skill_probability);
        const bool skills_left = std::count_if(q.criteria.begin(), q.criteria.end(), [](const Criterion& x) {
                                     return x.kind == CriterionKind::SkillLevel;
                                 }) < static_cast<std::ptrdiff_t>(kSkillCount);
        do {
            if (skill && skills_left) {
                c.kind = CriterionKind::SkillLevel;
                c.skill = static_cast<Skill>(rng.below(kSkillCount));
            } else {
                c.kind = kDemographicCriteria[rng.below(kDemographicCriteria.size())];
            }
        } while (std::any_of(q.criteria.begin(), q.criteria.end(),
                             [&](const Criterion& x) { return x.same_target(c); }));
        c.importance = rng.uniform_int(policy.min_importance, policy.max_importance);
        q.criteria.push_back(c);
    }
    return q;
}

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double choice_probability(const ChoiceModelParams& params, double rank_z, bool same_gender, double diversity_z,
                          bool treatment, double u) {
    const double t = treatment ? 1.0 : 0.0;
    const double eta = params.intercept + params.rank * rank_z + params.same_gender * (same_gender ? 1.0 : 0.0) +
                       params.diversity * diversity_z + params.treatment * t +
                       params.interaction * diversity_z * t + u;
    return logistic(eta);
}

std::vector<Candidate> candidate_pool(const AssemblyState& state, ParticipantId searcher) {
    const auto& own = state.group_of(searcher);
    std::vector<Candidate> pool;
    for (auto id : state.participants()) {
        if (std::find(own.begin(), own.end(), id) != own.end()) continue;
        pool.push_back({id, state.group_size(id)});
    }
    return pool;
}

StepResult agent_step(const Agent& agent, AssemblyState& state, const Population& population,
                      const SessionDynamics& dynamics, Rng& rng) {
    StepResult result;
    const auto team = state.group_of(agent.id);
    if (team.size() >= kMaxTeamSize) return result;

    const Query query = gen_query(agent.id, dynamics.policy, rng);
    const auto pool = candidate_pool(state, agent.id);
    const auto page = rank_candidates(population, team, pool, query, dynamics.mode, dynamics.recommender, 1);
    state.log_query(query);
    state.log_recommendations(agent.id, page.items);

    const Participant& searcher = population.at(agent.id);
    std::optional<std::size_t> first_chosen;
    for (const auto& rec : page.items) {
        const auto z = standardize(dynamics.moments, static_cast<double>(rec.rank), rec.diversity_score);
        Exposure e;
        e.searcher = agent.id;
        e.candidate = rec.candidate;
        e.round = state.round();
        e.rank = static_cast<std::uint32_t>(rec.rank);
        e.raw_diversity = rec.diversity_score;
        e.rank_z = z.rank_z;
        e.same_gender = population.at(rec.candidate).gender == searcher.gender;
        e.diversity_z = z.diversity_z;
        e.treatment = dynamics.treatment();
        const double p = choice_probability(dynamics.choice, e.rank_z, e.same_gender, e.diversity_z, e.treatment,
                                            agent.intercept_offset);
        e.chosen = rng.bernoulli(p);
        if (e.chosen && !first_chosen) first_chosen = result.exposures.size();
        result.exposures.push_back(e);
    }
    if (first_chosen) {
        auto& chosen = result.exposures[*first_chosen];
        chosen.invited = true;
        result.invitation = state.send_invitation(agent.id, chosen.candidate);
    }
    return result;
}

void answer_invitations(AssemblyState& state, const AgentPolicy& policy, Rng& rng) {
    for (auto id : state.open_invitations()) {
        const Invitation& inv = state.invitation(id);
        if (inv.status != InvitationStatus::Open) continue;  // voided by an earlier merge
        const auto recipients = inv.responses;
        for (const auto& [member, response] : recipients) {
            if (response != Response::Pending) continue;
            const Response answer = rng.bernoulli(policy.accept_probability) ? Response::Accepted : Response::Declined;
            state.respond(id, member, answer);
            if (state.invitation(id).status != InvitationStatus::Open) break;
        }
    }
}

StandardizationMoments pilot_moments(const Population& population, const RecommenderConfig& recommender,
                                     const AgentPolicy& policy, RankingMode mode, std::size_t recommendations,
                                     Rng& rng) {
    require(population.size() >= 2, ErrorCategory::InvalidInput, "pilot needs at least two participants");
    require(recommendations >= 1, ErrorCategory::Config, "pilot size must be >= 1");
    const auto members = population.members();
    std::vector<double> ranks;
    std::vector<double> diversities;
    while (ranks.size() < recommendations) {
        const auto& searcher = members[rng.below(members.size())];
        const Query query = gen_query(searcher.id, policy, rng);
        std::vector<Candidate> pool;
        for (const auto& p : members) {
            if (p.id != searcher.id) pool.push_back({p.id, 1});
        }
        const std::array<ParticipantId, 1> team{searcher.id};
        const auto page = rank_candidates(population, team, pool, query, mode, recommender, 1);
        for (const auto& rec : page.items) {
            if (ranks.size() == recommendations) break;
            ranks.push_back(static_cast<double>(rec.rank));
            diversities.push_back(rec.diversity_score);
        }
    }
    auto m = estimate_moments(ranks, diversities);
    // A degenerate pilot (one candidate, or clones) has no spread; leave that axis unscaled.
    if (m.rank_sd <= 0.0) m.rank_sd = 1.0;
    if (m.diversity_sd <= 0.0) m.diversity_sd = 1.0;
    return m;
}

std::vector<Agent> make_agents(const Population& population, const ChoiceModelParams& params,
                               const AgentPolicy& policy, Rng& rng) {
    std::vector<Agent> agents;
    const double sd = std::sqrt(params.random_intercept_variance);
    for (const auto& p : population.members()) {
        agents.push_back({p.id, policy.random_intercepts ? rng.normal(0.0, sd) : 0.0});
    }
    return agents;
}

AssemblyRun simulate_assembly(const Population& population, const RecommenderConfig& recommender,
                              const ChoiceModelParams& choice, const AgentPolicy& policy, RankingMode mode,
                              const AssemblyOptions& options, Rng& rng) {
    recommender.validate();
    choice.validate();
    policy.validate();

    SessionDynamics dynamics{recommender, choice, policy, mode, {}};
    dynamics.moments = pilot_moments(population, recommender, policy, mode, options.pilot_size, rng);
    auto agents = make_agents(population, choice, policy, rng);

    const auto ids = population.ids();
    AssemblyRun run{AssemblyState(ids), {}, {}, dynamics.moments};
    for (std::size_t round = 0; round < options.rounds; ++round) {
        std::vector<std::size_t> order(agents.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order.begin(), order.end());
        for (auto idx : order) {
            auto step = agent_step(agents[idx], run.state, population, dynamics, rng);
            run.exposures.insert(run.exposures.end(), step.exposures.begin(), step.exposures.end());
        }
        answer_invitations(run.state, policy, rng);
        run.state.advance_round();
    }

    std::size_t grouped = 0;
    std::size_t full = 0;
    for (const auto& g : run.state.groups()) {
        if (g.size() >= 2) grouped += g.size();
        if (g.size() == kMaxTeamSize) full += g.size();
    }
    const double n = static_cast<double>(population.size());
    run.grouped_fraction = static_cast<double>(grouped) / n;
    run.full_team_fraction = static_cast<double>(full) / n;
    run.partition = run.state.finalize(rng);
    return run;
}

std::vector<Exposure> simulate_choice_exposures(const ChoiceModelParams& params, std::size_t count,
                                                bool random_intercepts, Rng& rng, std::size_t page_size,
                                                std::size_t queries_per_searcher) {
    require(page_size >= 2 && queries_per_searcher >= 1, ErrorCategory::InvalidInput,
            "exposure simulation needs page_size >= 2");
    params.validate();
    std::vector<double> ranks(page_size);
    std::iota(ranks.begin(), ranks.end(), 1.0);
    const std::vector<double> unit{0.0, 1.0};
    auto moments = estimate_moments(ranks, unit);
    moments.diversity_mean = 0.0;
    moments.diversity_sd = 1.0;
    const double sd = std::sqrt(params.random_intercept_variance);

    std::vector<Exposure> out;
    out.reserve(count);
    std::uint32_t searcher = 0;
    while (out.size() < count) {
        const bool treatment = (searcher % 2) == 1;
        const double u = random_intercepts ? rng.normal(0.0, sd) : 0.0;
        for (std::size_t q = 0; q < queries_per_searcher && out.size() < count; ++q) {
            bool invited = false;
            for (std::size_t r = 1; r <= page_size && out.size() < count; ++r) {
                Exposure e;
                e.searcher = participant_id(searcher);
                e.candidate = participant_id(static_cast<std::uint32_t>(r));
                e.rank = static_cast<std::uint32_t>(r);
                e.rank_z = (static_cast<double>(r) - moments.rank_mean) / moments.rank_sd;
                e.same_gender = rng.bernoulli(0.5);
                e.diversity_z = rng.normal();
                e.raw_diversity = e.diversity_z;
                e.treatment = treatment;
                e.chosen = rng.bernoulli(choice_probability(params, e.rank_z, e.same_gender, e.diversity_z,
                                                            e.treatment, u));
                e.invited = e.chosen && !invited;
                invited = invited || e.chosen;
                out.push_back(e);
            }
        }
        ++searcher;
    }
    return out;
}

}  // namespace teamform
