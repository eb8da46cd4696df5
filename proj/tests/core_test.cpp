#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "teamform/diversity.hpp"
#include "teamform/error.hpp"
#include "teamform/population_io.hpp"
#include "teamform/types.hpp"

using namespace teamform;
using teamform::testing::person;

namespace {

// Reference implementations written from the definitions, independent of the library.
double blau_oracle(const std::vector<int>& labels) {
    std::map<int, int> counts;
    for (int l : labels) ++counts[l];
    double sum = 0.0;
    for (auto [label, c] : counts) sum += std::pow(static_cast<double>(c) / labels.size(), 2);
    return 1.0 - sum;
}

double cv_oracle(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / xs.size()) / m;
}

constexpr char F = 'F', M = 'M', N = 'N';

}  // namespace

TEST(Blau, HomogeneousGroupIsZero) {
    EXPECT_DOUBLE_EQ(blau(std::vector<char>{F, F, F, F}), 0.0);
}

TEST(Blau, TwoEvenCategories) {
    EXPECT_NEAR(blau(std::vector<char>{F, F, M, M}), 0.5, 1e-12);
}

TEST(Blau, ThreeCategories) {
    EXPECT_NEAR(blau(std::vector<char>{F, M, N, F}), 1.0 - (0.25 + 0.0625 + 0.0625), 1e-12);
}

TEST(Blau, EmptyGroupThrows) {
    try {
        blau(std::vector<char>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "empty group");
        EXPECT_EQ(e.category(), ErrorCategory::Domain);
    }
}

TEST(Blau, MatchesOracleOnRandomGroups) {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> labels(1 + rng.below(12));
        for (auto& l : labels) l = static_cast<int>(rng.below(5));
        const double b = blau(labels);
        EXPECT_NEAR(b, blau_oracle(labels), 1e-12);
        EXPECT_GE(b, 0.0);
        EXPECT_LT(b, 1.0);
        const bool single = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; });
        EXPECT_EQ(b == 0.0, single);
    }
}

TEST(NormalizedBlau, Examples) {
    EXPECT_DOUBLE_EQ(normalized_blau(std::vector<char>{F, M}, 2), 1.0);
    EXPECT_DOUBLE_EQ(normalized_blau(std::vector<char>{F, F, F, F}, 3), 0.0);
    EXPECT_NEAR(normalized_blau(std::vector<char>{'W', 'W', 'A', 'B'}, 6), 0.75, 1e-12);
}

TEST(NormalizedBlau, EvenSpreadOverKIsOne) {
    for (int k = 2; k <= 6; ++k) {
        std::vector<int> labels;
        for (int rep = 0; rep < 3; ++rep) {
            for (int c = 0; c < k; ++c) labels.push_back(c);
        }
        EXPECT_NEAR(normalized_blau(labels, k), 1.0, 1e-12) << "k=" << k;
    }
}

TEST(NormalizedBlau, RejectsKBelowTwo) {
    EXPECT_THROW(normalized_blau(std::vector<char>{F, M}, 1), Error);
}

TEST(CoefficientOfVariation, Examples) {
    EXPECT_DOUBLE_EQ(coefficient_of_variation(std::vector<double>{3, 3, 3, 3}), 0.0);
    EXPECT_NEAR(coefficient_of_variation(std::vector<double>{2, 4}), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(coefficient_of_variation(std::vector<double>{20, 30, 40, 50}), 0.3194, 1e-4);
}

TEST(CoefficientOfVariation, UsesPopulationDivisor) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs(1 + rng.below(8));
        for (auto& x : xs) x = rng.uniform_int(1, 80);
        EXPECT_NEAR(coefficient_of_variation(xs), cv_oracle(xs), 1e-12);
    }
}

TEST(CoefficientOfVariation, ZeroMeanThrows) {
    try {
        coefficient_of_variation(std::vector<double>{-1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "undefined CV");
    }
}

TEST(DiversityProfile, IdenticalMembersScoreZero) {
    auto pop = teamform::testing::clones(4);
    const auto p = team_diversity_profile(Team{pop.ids()}, pop, AttributeSchema{});
    for (double c : p.components()) EXPECT_EQ(c, 0.0);
    EXPECT_EQ(p.total_score, 0.0);
}

TEST(DiversityProfile, TwoMemberExample) {
    Population pop({person(1, Gender::Female, Race::White, false, false, 20),
                    person(2, Gender::Male, Race::Asian, false, true, 40)});
    const auto p = team_diversity_profile(Team{pop.ids()}, pop, AttributeSchema{});
    // Gender: two of three categories, 0.5 / (2/3).
    EXPECT_NEAR(p.gender_blau, 0.75, 1e-12);
    EXPECT_NEAR(p.race_blau, 0.5 / (5.0 / 6.0), 1e-12);
    EXPECT_NEAR(p.international_blau, 1.0, 1e-12);
    EXPECT_EQ(p.ethnicity_blau, 0.0);
    EXPECT_NEAR(p.age_cv, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.age_score, 0.25, 1e-12);
    EXPECT_EQ(p.deep_score, 0.0);
}

TEST(DiversityProfile, GenderPairOverTwoCategoriesIsOne) {
    AttributeSchema schema;
    schema.gender_categories = 2;
    Population pop({person(1, Gender::Female, Race::White, false, false, 20),
                    person(2, Gender::Male, Race::Asian, false, true, 40)});
    EXPECT_DOUBLE_EQ(team_diversity_profile(Team{pop.ids()}, pop, schema).gender_blau, 1.0);
}

TEST(DiversityProfile, AggregatesFollowComponentsOnRandomTeams) {
    Rng rng(3);
    const AttributeSchema schema;
    for (int trial = 0; trial < 300; ++trial) {
        auto pop = teamform::testing::mixed_population(1 + rng.below(4), rng);
        const auto p = team_diversity_profile(Team{pop.ids()}, pop, schema);
        for (double c : p.components()) {
            EXPECT_GE(c, 0.0);
            EXPECT_LE(c, 1.0);
        }
        EXPECT_NEAR(p.surface_score,
                    p.gender_blau + p.race_blau + p.ethnicity_blau + p.international_blau + p.age_score, 1e-12);
        double deep = 0.0;
        for (double s : p.skill_scores) deep += s;
        EXPECT_NEAR(p.deep_score, deep / kSkillCount, 1e-12);
        EXPECT_NEAR(p.total_score, p.surface_score + p.deep_score, 1e-12);
        EXPECT_NEAR(p.age_score, p.age_cv / (p.age_cv + 1.0), 1e-12);

        std::vector<double> ages;
        for (const auto& m : pop.members()) ages.push_back(m.age);
        EXPECT_NEAR(p.age_cv, cv_oracle(ages), 1e-12);
    }
}

TEST(DiversityProfile, CappedNormalization) {
    AttributeSchema schema;
    schema.cv_normalization = CvNormalization::Capped;
    schema.cv_cap = 0.5;
    EXPECT_DOUBLE_EQ(normalize_cv(0.25, schema), 0.5);
    EXPECT_DOUBLE_EQ(normalize_cv(2.0, schema), 1.0);
}

TEST(DiversityProfile, UnknownMemberThrows) {
    auto pop = teamform::testing::clones(4);
    EXPECT_THROW(team_diversity_profile(Team{{participant_id(99)}}, pop, AttributeSchema{}), Error);
}

TEST(AttributeSchema, RejectsSingleCategory) {
    AttributeSchema s;
    s.race_categories = 1;
    EXPECT_THROW(s.validate(), Error);
}

TEST(Participant, Validation) {
    auto p = person(1, Gender::Female, Race::White, false, false, 17);
    EXPECT_THROW(validate(p), Error);
    p.age = 18;
    EXPECT_NO_THROW(validate(p));
    p.skills[2] = 6;
    EXPECT_THROW(validate(p), Error);
    p.skills[2] = 0;
    EXPECT_THROW(validate(p), Error);
}

TEST(Population, RejectsDuplicateIds) {
    EXPECT_THROW(Population({person(1, Gender::Female, Race::White, false, false, 20),
                             person(1, Gender::Male, Race::White, false, false, 20)}),
                 Error);
}

TEST(Partition, CheckerAcceptsExactCover) {
    auto pop = teamform::testing::clones(6);
    Partition p{{Team{{participant_id(1), participant_id(2), participant_id(3), participant_id(4)}}},
                {participant_id(5), participant_id(6)}};
    EXPECT_FALSE(partition_violation(p, pop).has_value());
}

TEST(Partition, CheckerFindsViolations) {
    auto pop = teamform::testing::clones(6);
    Partition missing{{Team{{participant_id(1), participant_id(2)}}}, {participant_id(3)}};
    EXPECT_TRUE(partition_violation(missing, pop).has_value());
    Partition twice{{Team{{participant_id(1), participant_id(2)}}},
                    {participant_id(2), participant_id(3), participant_id(4), participant_id(5), participant_id(6)}};
    EXPECT_TRUE(partition_violation(twice, pop).has_value());
    Partition big{{Team{{participant_id(1), participant_id(2), participant_id(3), participant_id(4),
                         participant_id(5)}}},
                  {participant_id(6)}};
    EXPECT_TRUE(partition_violation(big, pop).has_value());
    Partition stranger{{}, {participant_id(1), participant_id(2), participant_id(3), participant_id(4),
                            participant_id(5), participant_id(6), participant_id(7)}};
    EXPECT_TRUE(partition_violation(stranger, pop).has_value());
    EXPECT_THROW(validate_partition(big, pop), Error);
}

TEST(Partition, HashIgnoresOrdering) {
    Partition a{{Team{{participant_id(3), participant_id(1)}}, Team{{participant_id(2), participant_id(4)}}}, {}};
    Partition b{{Team{{participant_id(2), participant_id(4)}}, Team{{participant_id(1), participant_id(3)}}}, {}};
    EXPECT_EQ(partition_hash(a), partition_hash(b));
    EXPECT_EQ(canonical(a), canonical(b));
    Partition c{{Team{{participant_id(1), participant_id(2)}}, Team{{participant_id(3), participant_id(4)}}}, {}};
    EXPECT_NE(partition_hash(a), partition_hash(c));
}

TEST(PopulationIo, JsonlAndCsvRoundTrip) {
    Rng rng(8);
    const auto pop = teamform::testing::mixed_population(25, rng);
    {
        std::istringstream in(to_jsonl(pop));
        EXPECT_EQ(population_from_jsonl(in), pop);
    }
    {
        std::istringstream in(to_csv(pop));
        EXPECT_EQ(population_from_csv(in), pop);
    }
}

TEST(PopulationIo, RejectsMalformedInput) {
    std::istringstream bad_json("{\"id\":1,\"gender\":\"Female\"}\n");
    EXPECT_THROW(population_from_jsonl(bad_json), Error);
    std::istringstream bad_gender(
        "{\"id\":1,\"gender\":\"Robot\",\"race\":\"White\",\"hispanic\":false,\"international\":false,"
        "\"age\":20,\"skills\":[1,1,1,1,1,1]}\n");
    EXPECT_THROW(population_from_jsonl(bad_gender), Error);
    std::istringstream short_csv(
        "id,gender,race,hispanic,international,age,campaigns,coordination,design,recruiting,writing,presenting\n"
        "1,Female,White,0,0,20,1,1\n");
    EXPECT_THROW(population_from_csv(short_csv), Error);
}

TEST(PopulationIo, MissingFileIsIoError) {
    try {
        read_population("/nonexistent/people.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Io);
    }
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, BelowIsUniform) {
    Rng rng(1);
    std::array<int, 6> counts{};
    for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(ErrorCategory, DistinctExitCodes) {
    std::set<int> codes;
    for (auto c : {ErrorCategory::InvalidInput, ErrorCategory::Domain, ErrorCategory::Protocol, ErrorCategory::Io,
                   ErrorCategory::Config, ErrorCategory::Numerical}) {
        EXPECT_NE(exit_code(c), 0);
        codes.insert(exit_code(c));
    }
    EXPECT_EQ(codes.size(), 6u);
}
