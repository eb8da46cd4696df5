#include <benchmark/benchmark.h>

#include <vector>

#include "teamform/diversity.hpp"
#include "teamform/harness.hpp"
#include "teamform/optimizer.hpp"
#include "teamform/recommender.hpp"
#include "teamform/stats.hpp"

using namespace teamform;

namespace {

Population population(std::size_t n, std::uint64_t seed = 1) {
    Rng rng(seed);
    return synth_population(n, DemographicSpec{}, rng);
}

void BM_DiversityProfile(benchmark::State& state) {
    const auto pop = population(4);
    std::vector<const Participant*> team;
    for (const auto& p : pop.members()) team.push_back(&p);
    const AttributeSchema schema;
    for (auto _ : state) benchmark::DoNotOptimize(diversity_profile(team, schema));
}
BENCHMARK(BM_DiversityProfile);

void BM_GaPartition(benchmark::State& state) {
    const auto pop = population(static_cast<std::size_t>(state.range(0)));
    const AttributeSchema schema;
    GaConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(ga_partition(pop, cfg, schema));
}
BENCHMARK(BM_GaPartition)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
    const auto pop = population(static_cast<std::size_t>(state.range(0)));
    const AttributeSchema schema;
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_partition(pop, schema));
}
BENCHMARK(BM_BruteForce)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_RankCandidates(benchmark::State& state) {
    const auto pop = population(static_cast<std::size_t>(state.range(0)));
    const std::vector<ParticipantId> team{pop.members().front().id};
    std::vector<Candidate> pool;
    for (const auto& p : pop.members()) {
        if (p.id != team.front()) pool.push_back({p.id, 1});
    }
    Query q;
    q.searcher = team.front();
    q.criteria = {parse_criterion("skill:design", 3), parse_criterion("same_gender", 1)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            rank_candidates(pop, team, pool, q, RankingMode::Fairness, RecommenderConfig{}));
    }
}
BENCHMARK(BM_RankCandidates)->Arg(32)->Arg(256);

void BM_LogisticFit(benchmark::State& state) {
    Rng rng(2);
    const auto ex = simulate_choice_exposures(ChoiceModelParams{}, static_cast<std::size_t>(state.range(0)), false, rng);
    for (auto _ : state) benchmark::DoNotOptimize(choice_audit(ex, ChoiceModelParams{}));
}
BENCHMARK(BM_LogisticFit)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_AnovaPermutation(benchmark::State& state) {
    Rng rng(3);
    stats::GroupSamples g;
    for (int c = 0; c < 4; ++c) {
        std::vector<double> xs(80);
        for (auto& x : xs) x = rng.normal();
        g.add(std::to_string(c), xs);
    }
    for (auto _ : state) benchmark::DoNotOptimize(stats::anova_f(g, 10000, 1));
}
BENCHMARK(BM_AnovaPermutation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
