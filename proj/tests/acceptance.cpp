// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "teamform/diversity.hpp"
#include "teamform/error.hpp"
#include "teamform/harness.hpp"
#include "teamform/optimizer.hpp"
#include "teamform/population_io.hpp"
#include "teamform/protocol.hpp"
#include "teamform/recommender.hpp"
#include "teamform/stats.hpp"

using namespace teamform;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int number, const std::string& name, const std::function<Outcome()>& check) {
    const auto start = Clock::now();
    Outcome out;
    try {
        out = check();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    if (!out.pass) ++failures;
    std::printf("%s %d %s: %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", number, name.c_str(), out.detail.c_str(),
                elapsed);
    std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Outcome metric_exactness() {
    const auto start = Clock::now();
    const std::vector<Gender> genders{Gender::Female, Gender::Female, Gender::Male, Gender::Male};
    const double b = blau(genders);
    const std::vector<double> ages{2.0, 4.0};
    const double cv = coefficient_of_variation(ages);
    const double elapsed = seconds_since(start);
    const bool ok = std::abs(b - 0.5) <= 1e-12 && std::abs(cv - 1.0 / 3.0) <= 1e-12 && elapsed < 1.0;
    return {ok, fmt("blau=%.17g cv=%.17g (unit cases run under ctest)", b, cv)};
}

Outcome ga_vs_oracle() {
    int good = 0;
    double slowest = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(seed, 0x6A));
        const auto pop = teamform::testing::mixed_population(8, rng);
        const AttributeSchema schema;
        const auto start = Clock::now();
        GaConfig cfg;
        cfg.rng_seed = seed;
        const auto ga = ga_partition(pop, cfg, schema);
        slowest = std::max(slowest, seconds_since(start));
        const auto oracle = brute_force_partition(pop, schema);
        good += ga.selected_objectives.total() >= 0.95 * oracle.best_total;
    }
    return {good >= 90 && slowest < 1.0, fmt("%d/100 within 0.95 of optimum, slowest run %.3fs", good, slowest)};
}

Outcome ga_vs_random() {
    const auto start = Clock::now();
    std::vector<double> ga_total, random_total;
    const AttributeSchema schema;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(derive_seed(seed, 0x3A));
        const auto pop = synth_population(32, DemographicSpec{}, rng);
        GaConfig cfg;
        cfg.rng_seed = derive_seed(seed, 1);
        ga_total.push_back(ga_partition(pop, cfg, schema).selected_objectives.total());
        Rng r(derive_seed(seed, 2));
        random_total.push_back(objectives(random_partition(pop, kMaxTeamSize, r), pop, schema).total());
    }
    const double p = stats::permutation_mean_difference_p(ga_total, random_total, 10000, 3);
    const double ga_mean = stats::mean(ga_total), random_mean = stats::mean(random_total);
    const bool ok = ga_mean > random_mean && p < 0.05 && seconds_since(start) < 120.0;
    return {ok, fmt("mean total ga=%.4f random=%.4f p=%.4g", ga_mean, random_mean, p)};
}

Outcome choice_recovery() {
    const auto start = Clock::now();
    const ChoiceModelParams params;
    Rng rng(2024);
    const auto fixed = choice_audit(simulate_choice_exposures(params, 10000, false, rng), params);
    bool ok = fixed.converged && !fixed.separation && fixed.coefficients.size() == 6;
    double worst = 0.0;
    const CoefficientAudit* worst_coefficient = nullptr;
    for (const auto& c : fixed.coefficients) {
        if (std::abs(c.recovered - c.generating) >= worst) {
            worst = std::abs(c.recovered - c.generating);
            worst_coefficient = &c;
        }
    }
    ok = ok && worst <= 0.10;

    Rng rng2(2025);
    const auto mixed = choice_audit(simulate_choice_exposures(params, 10000, true, rng2), params);
    double interaction_error = INFINITY;
    for (const auto& c : mixed.coefficients) {
        if (c.name == "interaction") interaction_error = std::abs(c.recovered - c.generating);
    }
    ok = ok && interaction_error <= 0.15 && seconds_since(start) < 30.0;
    return {ok, fmt("u=0 worst |error| %.4f (%s, se %.3f); random intercepts interaction |error| %.4f", worst,
                    worst_coefficient ? worst_coefficient->name.c_str() : "none",
                    worst_coefficient ? worst_coefficient->standard_error : 0.0, interaction_error)};
}

// The default experiment is shared by criteria 5, 7 and 9.
ExperimentResult default_experiment;

Outcome composition_ordering() {
    const auto start = Clock::now();
    default_experiment = run_experiment(ExperimentConfig{}, 1);
    const auto& report = default_experiment.report;
    const auto* surface = find_metric(report, "surface_score");
    const auto* gender = find_metric(report, "gender_blau");
    if (!surface || !gender) return {false, "metrics missing from report"};
    const auto* sa = find_pair(*surface, Condition::AlgorithmicDiverse, Condition::SelfAssembled);
    const auto* ga = find_pair(*gender, Condition::AlgorithmicDiverse, Condition::SelfAssembled);
    if (!sa || !ga) return {false, "pairwise comparisons missing"};
    auto mean_of = [&](const MetricAnalysis& m, Condition c) {
        for (std::size_t i = 0; i < m.conditions.size(); ++i) {
            if (m.conditions[i] == c) return m.descriptives[i].mean;
        }
        return std::nan("");
    };
    // Delta is mean(self_assembled) - mean(algorithmic_diverse), matching the reported sign.
    const bool a = sa->delta < 0 && sa->p_adjusted < 0.05 && std::abs(sa->delta) >= 0.62 / 2 &&
                   std::abs(sa->delta) <= 0.62 * 2;
    const double fair = mean_of(*surface, Condition::FairnessAware);
    const double self = mean_of(*surface, Condition::SelfAssembled);
    const bool b = fair > self;
    const bool c = ga->delta < 0 && ga->p_adjusted < 0.05;
    const bool ok = a && b && c && seconds_since(start) < 600.0;
    return {ok, fmt("(a) surface delta=%.4f p_adj=%.4g %s; (b) fairness %.4f vs self %.4f %s; (c) gender delta=%.4f "
                    "p_adj=%.4g %s",
                    sa->delta, sa->p_adjusted, a ? "ok" : "no", fair, self, b ? "ok" : "no", ga->delta,
                    ga->p_adjusted, c ? "ok" : "no")};
}

Outcome reranking_property() {
    std::vector<double> fair, fit;
    const AgentPolicy policy;
    for (std::uint64_t pool_seed = 0; pool_seed < 100; ++pool_seed) {
        Rng rng(derive_seed(pool_seed, 0x66));
        const auto pop = synth_population(32, DemographicSpec{}, rng);
        const auto searcher = participant_id(1 + static_cast<std::uint32_t>(rng.below(32)));
        const auto query = gen_query(searcher, policy, rng);
        const std::vector<ParticipantId> team{searcher};
        std::vector<Candidate> pool;
        for (const auto& p : pop.members()) {
            if (p.id != searcher) pool.push_back({p.id, 1});
        }
        for (auto mode : {RankingMode::FitOnly, RankingMode::Fairness}) {
            const auto page = rank_candidates(pop, team, pool, query, mode, RecommenderConfig{});
            double d = 0;
            for (std::size_t i = 0; i < 5; ++i) d += page.items[i].diversity_score;
            (mode == RankingMode::Fairness ? fair : fit).push_back(d / 5);
        }
    }
    const double p = stats::paired_permutation_p(fair, fit, 10000, 6);
    const bool ok = stats::mean(fair) > stats::mean(fit) && p < 0.05;
    return {ok, fmt("top-5 mean D fairness=%.4f fit_only=%.4f p=%.4g", stats::mean(fair), stats::mean(fit), p)};
}

Outcome rank_effect() {
    std::array<double, 10> shown{}, chosen{};
    for (const auto& s : default_experiment.sessions) {
        for (const auto& e : s.exposures) {
            if (e.rank < 1 || e.rank > 10) continue;
            shown[e.rank - 1] += 1;
            chosen[e.rank - 1] += e.chosen;
        }
    }
    std::vector<double> decile, rate;
    std::string rates;
    for (std::size_t i = 0; i < 10; ++i) {
        if (shown[i] == 0) continue;
        decile.push_back(static_cast<double>(i + 1));
        rate.push_back(chosen[i] / shown[i]);
        rates += fmt("%s%.3f", rates.empty() ? "" : ",", rate.back());
    }
    if (decile.size() < 2) return {false, "no exposures recorded"};
    const double rho = stats::spearman(decile, rate);
    return {rho < -0.9, fmt("spearman rho=%.4f, rates by rank [%s]", rho, rates.c_str())};
}

Outcome protocol_safety() {
    Rng rng(88);
    std::vector<ParticipantId> participants;
    for (std::uint32_t i = 1; i <= 24; ++i) participants.push_back(participant_id(i));
    AssemblyState state(participants);
    std::size_t merges = 0;
    for (int step = 0; step < 10000; ++step) {
        const auto action = rng.below(10);
        try {
            if (action < 4) {
                state.send_invitation(participants[rng.below(24)], participants[rng.below(24)]);
            } else if (action < 8) {
                const auto open = state.open_invitations();
                if (!open.empty()) {
                    const auto& inv = state.invitation(open[rng.below(open.size())]);
                    const auto member = inv.responses[rng.below(inv.responses.size())].first;
                    const Response choices[] = {Response::Accepted, Response::Accepted, Response::Declined,
                                                Response::Ignored};
                    const auto before = state.group_size(member);
                    const auto id = inv.id;
                    state.respond(id, member, choices[rng.below(4)]);
                    if (state.group_size(member) > before) {
                        ++merges;
                        if (!state.invitation(id).all_accepted()) {
                            return {false, fmt("merge without quorum at step %d", step)};
                        }
                    }
                }
            } else if (action < 9) {
                state.leave_group(participants[rng.below(24)]);
            } else {
                state.advance_round();
            }
        } catch (const Error& e) {
            if (e.category() != ErrorCategory::Protocol) return {false, fmt("unexpected error: %s", e.what())};
        }
        if (auto v = state.invariant_violation()) return {false, fmt("step %d: %s", step, v->c_str())};
    }
    Rng fill(89);
    const auto partition = state.finalize(fill);
    if (auto v = state.invariant_violation()) return {false, "after finalize: " + *v};
    for (const auto& t : partition.teams) {
        if (t.size() > kMaxTeamSize) return {false, "team larger than 4 after finalize"};
    }
    const auto replayed = AssemblyState::replay(participants, state.event_log());
    const bool same = replayed == state;
    return {same && merges > 0,
            fmt("10000 steps, %zu merges, %zu events, replay %s", merges, state.event_log().size(),
                same ? "identical" : "differs")};
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        files.emplace_back(fs::relative(entry.path(), dir).string(), bytes.str());
    }
    std::sort(files.begin(), files.end());
    return files;
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "teamform-acceptance";
    fs::remove_all(base);
    write_experiment(default_experiment, base / "threads1");
    write_experiment(run_experiment(ExperimentConfig{}, 4), base / "threads4");
    const auto a = snapshot(base / "threads1");
    const auto b = snapshot(base / "threads4");
    std::size_t differing = 0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) differing += a[i] != b[i];
    const bool ok = a.size() == b.size() && differing == 0 && !a.empty();
    fs::remove_all(base);
    return {ok, fmt("%zu files at 1 thread, %zu at 4 threads, %zu differ", a.size(), b.size(), differing)};
}

}  // namespace

int main() {
    report(1, "metric exactness", metric_exactness);
    report(2, "GA vs brute-force oracle", ga_vs_oracle);
    report(3, "GA vs random assignment", ga_vs_random);
    report(4, "choice-model recovery", choice_recovery);
    report(5, "composition ordering", composition_ordering);
    report(6, "fairness re-ranking raises diversity", reranking_property);
    report(7, "rank effect on selection", rank_effect);
    report(8, "protocol safety and replay", protocol_safety);
    report(9, "determinism across thread counts", determinism);
    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
