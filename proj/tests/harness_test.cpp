#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "fixtures.hpp"
#include "teamform/config.hpp"
#include "teamform/error.hpp"
#include "teamform/event_io.hpp"
#include "teamform/harness.hpp"
#include "teamform/population_io.hpp"

using namespace teamform;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(std::vector<Condition> conditions, std::size_t sessions = 3) {
    ExperimentConfig c;
    c.conditions = std::move(conditions);
    c.sessions = sessions;
    c.permutations = 500;
    c.pilot_size = 100;
    c.ga.generations = 5;
    c.ga.population_size = 10;
    return c;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("teamform-harness-" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Synth, FemaleShareMatchesSpec) {
    Rng rng(1);
    const auto pop = synth_population(10000, DemographicSpec{}, rng);
    double female = 0;
    for (const auto& p : pop.members()) {
        female += p.gender == Gender::Female;
        EXPECT_GE(p.age, 18);
        EXPECT_LE(p.age, 65);
        EXPECT_NO_THROW(validate(p));
    }
    EXPECT_NEAR(female / 10000, 252.0 / 386, 0.01);
}

TEST(Synth, SingleCategorySpecIsHomogeneous) {
    DemographicSpec spec;
    spec.gender = {0, 0, 1};
    spec.race = {0, 0, 0, 0, 1, 0};
    spec.hispanic = 1;
    spec.international = 0;
    spec.min_age = spec.max_age = 30;
    spec.min_skill = spec.max_skill = 2;
    Rng rng(2);
    const auto pop = synth_population(50, spec, rng);
    for (const auto& p : pop.members()) {
        EXPECT_EQ(p, (teamform::testing::person(teamform::raw(p.id), Gender::NonBinary, Race::MultipleRaces, true,
                                                false, 30, {2, 2, 2, 2, 2, 2})));
    }
}

TEST(Synth, SameSeedSameBytes) {
    Rng a(3), b(3);
    EXPECT_EQ(to_jsonl(synth_population(40, DemographicSpec{}, a)), to_jsonl(synth_population(40, DemographicSpec{}, b)));
}

TEST(Synth, InvalidSpecRejected) {
    DemographicSpec spec;
    spec.gender = {0.5, 0.4, 0.0};
    Rng rng(1);
    EXPECT_THROW(synth_population(10, spec, rng), Error);
    EXPECT_THROW(synth_population(0, DemographicSpec{}, rng), Error);
}

TEST(Config, DefaultsRoundTrip) {
    const ExperimentConfig c;
    const auto back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
    EXPECT_EQ(back.agents, 32u);
    EXPECT_EQ(back.sessions, 40u);
    EXPECT_DOUBLE_EQ(back.choice.interaction, 0.95);
}

TEST(Config, PartialOverridesWithComments) {
    const auto c = parse_config(R"({
        // only a few keys
        "sessions": 2,
        "conditions": ["random", "fairness_aware"],
        "policy": {"accept_probability": 0.5},
        "demographics": {"gender": {"Male": 0.5, "Female": 0.5}}
    })");
    EXPECT_EQ(c.sessions, 2u);
    EXPECT_EQ(c.conditions, (std::vector<Condition>{Condition::Random, Condition::FairnessAware}));
    EXPECT_DOUBLE_EQ(c.policy.accept_probability, 0.5);
    EXPECT_DOUBLE_EQ(c.demographics.gender[2], 0.0);
    EXPECT_EQ(c.ga.generations, 20u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    auto category = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            return e.category();
        }
        return ErrorCategory::Numerical;
    };
    EXPECT_EQ(category(R"({"sesions": 3})"), ErrorCategory::Config);
    EXPECT_EQ(category(R"({"ga": {"generation": 3}})"), ErrorCategory::Config);
    EXPECT_EQ(category(R"({"agents": 4})"), ErrorCategory::Config);
    EXPECT_EQ(category(R"({"agents": "many"})"), ErrorCategory::Config);
    EXPECT_EQ(category(R"({"conditions": ["solo"]})"), ErrorCategory::Config);
    EXPECT_EQ(category(R"({"demographics": {"gender": {"Robot": 1}}})"), ErrorCategory::Config);
    EXPECT_EQ(category("{not json"), ErrorCategory::Config);
}

TEST(Config, EnvironmentOverridesOutputDir) {
    ::unsetenv(kOutputDirEnv);
    EXPECT_EQ(resolve_output_dir("configured"), fs::path("configured"));
    ::setenv(kOutputDirEnv, "/tmp/elsewhere", 1);
    EXPECT_EQ(resolve_output_dir("configured"), fs::path("/tmp/elsewhere"));
    ::unsetenv(kOutputDirEnv);
}

TEST(RunSession, EveryConditionYieldsValidPartition) {
    const auto cfg = small_config({kAllConditions.begin(), kAllConditions.end()});
    for (auto c : kAllConditions) {
        const auto s = run_session(c, cfg, 0);
        EXPECT_FALSE(partition_violation(s.partition, s.population).has_value());
        EXPECT_EQ(s.profiles.size(), s.partition.teams.size());
        EXPECT_EQ(s.partition.teams.size(), 8u);
        EXPECT_EQ(s.events.back().kind(), EventKind::DeadlineFill);
        EXPECT_EQ(s.moments.has_value(), is_agency(c));
        EXPECT_EQ(!s.exposures.empty(), is_agency(c));
    }
}

TEST(RunSession, ClonePopulationUnderGa) {
    const auto cfg = small_config({Condition::AlgorithmicDiverse});
    const auto pop = teamform::testing::clones(16);
    const auto s = run_session(Condition::AlgorithmicDiverse, cfg, 0, &pop);
    for (const auto& p : s.profiles) EXPECT_EQ(p.total_score, 0.0);
}

TEST(RunSession, DegenerateAgencyFillsTeams) {
    auto cfg = small_config({Condition::SelfAssembled});
    cfg.policy.accept_probability = 1.0;
    cfg.policy.random_intercepts = false;
    cfg.choice.intercept = 40;
    const auto s = run_session(Condition::SelfAssembled, cfg, 0);
    EXPECT_DOUBLE_EQ(s.grouped_fraction, 1.0);
}

TEST(RunSession, TooSmallPopulationRejected) {
    const auto cfg = small_config({Condition::Random});
    const auto pop = teamform::testing::clones(7);
    EXPECT_THROW(run_session(Condition::Random, cfg, 0, &pop), Error);
}

TEST(Experiment, RandomOnlyHasNoPairwiseSection) {
    const auto r = run_experiment(small_config({Condition::Random}));
    ASSERT_EQ(r.report.conditions.size(), 1u);
    for (const auto& m : r.report.metrics) {
        EXPECT_FALSE(m.anova.has_value());
        EXPECT_TRUE(m.pairwise.empty());
        EXPECT_EQ(m.descriptives.size(), 1u);
    }
    EXPECT_TRUE(r.report.balance.empty());
    EXPECT_EQ(report_text(r.report).find("pair"), std::string::npos);
}

TEST(Experiment, TeamCountsAndIndependenceFromThreads) {
    auto cfg = small_config({kAllConditions.begin(), kAllConditions.end()}, 2);
    cfg.agents = 30;
    const auto a = run_experiment(cfg, 1);
    const auto b = run_experiment(cfg, 3);
    EXPECT_EQ(report_json(a.report), report_json(b.report));
    for (auto n : a.report.team_counts) EXPECT_EQ(n, 2u * (30 / 4));
    ASSERT_EQ(a.sessions.size(), b.sessions.size());
    for (std::size_t i = 0; i < a.sessions.size(); ++i) EXPECT_EQ(a.sessions[i].events, b.sessions[i].events);
}

TEST(Experiment, WritesAndReplays) {
    const auto cfg = small_config({kAllConditions.begin(), kAllConditions.end()}, 2);
    const auto dir = scratch("replay");
    write_experiment(run_experiment(cfg), dir);
    for (const char* f : {"team_metrics.csv", "report.json", "report.txt", "manifest.jsonl", "exposures.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto check = replay_directory(dir);
    EXPECT_TRUE(check.report_matches);
    EXPECT_TRUE(check.problems.empty());
    EXPECT_EQ(check.sessions, 8u);

    // A doctored log no longer reproduces the stored report.
    const auto events_file = dir / "events" / "random-000.jsonl";
    auto log = read_event_log(events_file);
    auto& fill = std::get<DeadlineFill>(log.back().payload).partition;
    std::swap(fill.teams[0].members[0], fill.teams[1].members[0]);
    fill = canonical(fill);
    write_text_file(events_file, to_jsonl(log));
    EXPECT_FALSE(replay_directory(dir).report_matches);
    fs::remove_all(dir);
}

TEST(TeamMetrics, CsvRoundTripIsExact) {
    const auto s = run_session(Condition::Random, small_config({Condition::Random}), 1);
    const auto rows = team_metric_rows(s);
    const auto back = read_team_metrics_csv(team_metrics_csv(rows));
    EXPECT_EQ(team_metrics_csv(back), team_metrics_csv(rows));
    EXPECT_THROW(read_team_metrics_csv("condition,session\nrandom,0\n"), Error);
}

TEST(Balance, SimulatedConditionsUsuallyBalanced) {
    int balanced = 0;
    constexpr int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        std::vector<Population> pops;
        for (std::size_t c = 0; c < 4; ++c) {
            Rng rng(derive_seed(s, c));
            pops.push_back(synth_population(320, DemographicSpec{}, rng));
        }
        std::vector<std::pair<Condition, const Population*>> in;
        for (std::size_t c = 0; c < 4; ++c) in.emplace_back(kAllConditions[c], &pops[c]);
        const auto checks = balance_checks(in);
        ASSERT_EQ(checks.size(), 4u);
        balanced += checks[0].result.p > 0.05;
    }
    EXPECT_GE(balanced, 0.9 * seeds);
}

TEST(Exposures, CsvRoundTrip) {
    Rng rng(4);
    const auto ex = simulate_choice_exposures(ChoiceModelParams{}, 300, true, rng);
    EXPECT_EQ(read_exposures_csv(exposures_csv(ex)), ex);
}

TEST(ChoiceAudit, RecoversInteraction) {
    Rng rng(5);
    const auto ex = simulate_choice_exposures(ChoiceModelParams{}, 10000, false, rng);
    const auto audit = choice_audit(ex, ChoiceModelParams{});
    ASSERT_EQ(audit.coefficients.size(), 6u);
    EXPECT_TRUE(audit.converged);
    EXPECT_NEAR(audit.coefficients[5].recovered, 0.95, 0.15);
}

TEST(ChoiceAudit, DropsInteractionWithoutTreatment) {
    Rng rng(6);
    auto ex = simulate_choice_exposures(ChoiceModelParams{}, 5000, false, rng);
    for (auto& e : ex) e.treatment = false;
    const auto audit = choice_audit(ex, ChoiceModelParams{});
    EXPECT_EQ(audit.coefficients.size(), 4u);
    ASSERT_FALSE(audit.warnings.empty());
    EXPECT_NE(audit.warnings[0].find("interaction dropped"), std::string::npos);
}

TEST(ChoiceAudit, ShuffledOutcomesGiveFlatSlopes) {
    Rng rng(7);
    auto ex = simulate_choice_exposures(ChoiceModelParams{}, 20000, false, rng);
    std::vector<bool> chosen;
    for (const auto& e : ex) chosen.push_back(e.chosen);
    rng.shuffle(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < ex.size(); ++i) ex[i].chosen = chosen[i];
    const auto audit = choice_audit(ex, ChoiceModelParams{});
    for (std::size_t k = 1; k < audit.coefficients.size(); ++k) {
        EXPECT_NEAR(audit.coefficients[k].recovered, 0.0, 4 * audit.coefficients[k].standard_error)
            << audit.coefficients[k].name;
    }
}

TEST(ChoiceAudit, RefusesTooFewExposures) {
    Rng rng(8);
    const auto ex = simulate_choice_exposures(ChoiceModelParams{}, 200, false, rng);
    try {
        choice_audit(ex, ChoiceModelParams{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::InvalidInput);
        EXPECT_NE(std::string(e.what()).find("at least 300"), std::string::npos);
    }
}
