#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teamform/agents.hpp"
#include "teamform/diversity.hpp"
#include "teamform/optimizer.hpp"
#include "teamform/protocol.hpp"
#include "teamform/recommender.hpp"
#include "teamform/stats.hpp"
#include "teamform/types.hpp"

namespace teamform {

enum class Condition : std::uint8_t { Random, AlgorithmicDiverse, SelfAssembled, FairnessAware };
inline constexpr std::array<Condition, 4> kAllConditions{Condition::Random, Condition::AlgorithmicDiverse,
                                                         Condition::SelfAssembled, Condition::FairnessAware};

std::string_view to_string(Condition c) noexcept;
Condition parse_condition(std::string_view text);
constexpr bool is_agency(Condition c) noexcept {
    return c == Condition::SelfAssembled || c == Condition::FairnessAware;
}

/// Category probabilities and numeric ranges for synthetic participants.
/// Defaults follow the recruited sample: 124 M / 252 F / 10 NB out of 386, and so on.
struct DemographicSpec {
    std::array<double, kGenderCount> gender{124.0 / 386, 252.0 / 386, 10.0 / 386};
    std::array<double, kRaceCount> race{194.0 / 386, 123.0 / 386, 41.0 / 386, 1.0 / 386, 20.0 / 386, 7.0 / 386};
    double hispanic = 35.0 / 386;
    double international = 72.0 / 386;
    int min_age = 18;
    int max_age = 65;
    int min_skill = 1;
    int max_skill = 5;

    void validate() const;
};

/// Ids 1..n, every attribute drawn independently.
Population synth_population(std::size_t n, const DemographicSpec& spec, Rng& rng);

struct ExperimentConfig {
    std::vector<Condition> conditions{kAllConditions.begin(), kAllConditions.end()};
    std::size_t sessions = 40;
    std::size_t agents = 32;
    std::size_t rounds = 10;
    std::uint64_t seed = 20240501;
    GaConfig ga;
    AgentPolicy policy;
    ChoiceModelParams choice;
    RecommenderConfig recommender;
    DemographicSpec demographics;
    std::size_t pilot_size = 500;
    std::size_t permutations = 10000;
    std::filesystem::path output_dir = "teamform-out";

    void validate() const;
};

/// Seed of one (condition, session) unit; independent of scheduling order.
std::uint64_t session_seed(std::uint64_t master, Condition condition, std::size_t session);

struct SessionResult {
    Condition condition = Condition::Random;
    std::size_t session = 0;
    std::uint64_t seed = 0;
    Population population;
    Partition partition;
    std::vector<DiversityProfile> profiles;  // one per team, in partition order
    std::vector<Event> events;
    std::optional<StandardizationMoments> moments;  // agency conditions only
    std::vector<Exposure> exposures;
    double grouped_fraction = 1.0;  // share in a group of >= 2 before the deadline fill
    double elapsed_ms = 0.0;        // wall time; never written to deterministic outputs
};

/// Population is drawn from the session seed unless supplied.
SessionResult run_session(Condition condition, const ExperimentConfig& config, std::size_t session,
                          const Population* population = nullptr);

/// One team's metrics as stored in team_metrics.csv.
struct TeamMetricRow {
    Condition condition = Condition::Random;
    std::size_t session = 0;
    std::size_t team = 0;
    std::size_t size = 0;
    DiversityProfile profile;
};

std::vector<TeamMetricRow> team_metric_rows(const SessionResult& session);
std::string team_metrics_csv(const std::vector<TeamMetricRow>& rows);
std::vector<TeamMetricRow> read_team_metrics_csv(std::string_view text);

/// The metrics the report compares across conditions.
inline constexpr std::array<std::string_view, 8> kReportMetrics{
    "surface_score", "deep_score", "total_score", "gender_blau",
    "race_blau",     "ethnicity_blau", "international_blau", "age_score"};
double metric_value(const DiversityProfile& profile, std::string_view metric);

struct MetricAnalysis {
    std::string metric;
    std::vector<Condition> conditions;
    std::vector<stats::Descriptives> descriptives;  // parallel to conditions
    std::optional<stats::AnovaResult> anova;         // only with >= 2 conditions
    std::vector<stats::PairwiseComparison> pairwise;
};

struct BalanceCheck {
    std::string attribute;
    stats::Chi2Result result;
};

struct ExperimentReport {
    std::vector<Condition> conditions;
    std::vector<std::size_t> team_counts;  // parallel to conditions
    std::vector<MetricAnalysis> metrics;
    std::vector<BalanceCheck> balance;
};

/// Descriptives, permutation ANOVA and BH-adjusted pairwise comparisons per metric.
ExperimentReport analyze_team_metrics(const std::vector<TeamMetricRow>& rows, std::size_t permutations,
                                      std::uint64_t seed);
/// Chi-squared tests of condition x category on participant demographics.
std::vector<BalanceCheck> balance_checks(const std::vector<std::pair<Condition, const Population*>>& populations);

const MetricAnalysis* find_metric(const ExperimentReport& report, std::string_view metric);
const stats::PairwiseComparison* find_pair(const MetricAnalysis& metric, Condition first, Condition second);

std::string report_json(const ExperimentReport& report);
std::string report_text(const ExperimentReport& report);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SessionResult> sessions;  // condition-major, then by session index
    ExperimentReport report;
};

/// Runs every (condition, session) unit on `threads` workers and analyzes the
/// pooled team metrics. Output is identical for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// Writes team_metrics.csv, report.json, report.txt, manifest.jsonl,
/// exposures.csv, and per-session events/ and populations/ files.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

std::string exposures_csv(const std::vector<Exposure>& exposures);
std::vector<Exposure> read_exposures_csv(std::string_view text);

struct CoefficientAudit {
    std::string name;
    double generating = 0.0;
    double recovered = 0.0;
    double standard_error = 0.0;
};

struct ChoiceAudit {
    std::size_t exposures = 0;
    std::vector<CoefficientAudit> coefficients;
    std::vector<std::string> warnings;
    bool converged = false;
    bool separation = false;
};

/// Fixed-effects logistic fit of `chosen` on (rank_z, same_gender, diversity_z,
/// treatment, interaction). Columns that are constant because of the design are
/// dropped with a warning. Needs at least 50 exposures per fitted coefficient.
ChoiceAudit choice_audit(const std::vector<Exposure>& exposures, const ChoiceModelParams& generating);
std::string audit_text(const ChoiceAudit& audit);
std::string audit_json(const ChoiceAudit& audit);

/// Result of re-deriving a run from its persisted files.
struct ReplayCheck {
    std::size_t sessions = 0;
    std::size_t events = 0;
    bool report_matches = false;
    std::vector<std::string> problems;
};

/// Replays every event log under `dir`, recomputes the team metrics from the
/// replayed partitions, and compares the regenerated report with report.json.
ReplayCheck replay_directory(const std::filesystem::path& dir);

}  // namespace teamform
