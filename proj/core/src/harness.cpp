#include "teamform/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "teamform/config.hpp"
#include "teamform/error.hpp"
#include "teamform/event_io.hpp"
#include "teamform/population_io.hpp"

namespace teamform {

using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "0.1.0";
constexpr std::uint64_t kAnalysisStream = 0xA11A'5EEDULL;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

bool near_one(double sum) { return std::abs(sum - 1.0) <= 1e-9; }

std::string session_stem(Condition c, std::size_t session) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", session);
    return std::string(to_string(c)) + "-" + buf;
}

}  // namespace

std::string_view to_string(Condition c) noexcept {
    switch (c) {
    case Condition::Random: return "random";
    case Condition::AlgorithmicDiverse: return "algorithmic_diverse";
    case Condition::SelfAssembled: return "self_assembled";
    case Condition::FairnessAware: return "fairness_aware";
    }
    return "?";
}

Condition parse_condition(std::string_view text) {
    for (auto c : kAllConditions) {
        if (to_string(c) == text) return c;
    }
    fail(ErrorCategory::InvalidInput, "unknown condition '" + std::string(text) +
                                          "' (expected random, algorithmic_diverse, self_assembled, fairness_aware)");
}

void DemographicSpec::validate() const {
    auto check = [](std::span<const double> dist, const char* name) {
        double sum = 0.0;
        for (double p : dist) {
            require(p >= 0.0, ErrorCategory::Config, std::string("demographics: negative ") + name + " probability");
            sum += p;
        }
        require(near_one(sum), ErrorCategory::Config, std::string("demographics: ") + name + " probabilities sum to " +
                                                          fmt(sum) + ", not 1");
    };
    check(gender, "gender");
    check(race, "race");
    require(hispanic >= 0.0 && hispanic <= 1.0 && international >= 0.0 && international <= 1.0,
            ErrorCategory::Config, "demographics: hispanic and international must be probabilities");
    require(min_age >= kMinAge && max_age >= min_age, ErrorCategory::Config,
            "demographics: need 18 <= min_age <= max_age");
    require(min_skill >= kMinSkill && max_skill <= kMaxSkill && min_skill <= max_skill, ErrorCategory::Config,
            "demographics: skills must lie in [1,5]");
}

Population synth_population(std::size_t n, const DemographicSpec& spec, Rng& rng) {
    require(n >= 1, ErrorCategory::InvalidInput, "synth_population: n must be >= 1");
    spec.validate();
    std::vector<Participant> people;
    people.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Participant p;
        p.id = participant_id(static_cast<std::uint32_t>(i + 1));
        p.gender = static_cast<Gender>(rng.categorical(spec.gender));
        p.race = static_cast<Race>(rng.categorical(spec.race));
        p.hispanic = rng.bernoulli(spec.hispanic);
        p.international = rng.bernoulli(spec.international);
        p.age = rng.uniform_int(spec.min_age, spec.max_age);
        for (auto& s : p.skills) s = rng.uniform_int(spec.min_skill, spec.max_skill);
        people.push_back(p);
    }
    return Population(std::move(people));
}

void ExperimentConfig::validate() const {
    require(!conditions.empty(), ErrorCategory::Config, "config: at least one condition is required");
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        for (std::size_t j = i + 1; j < conditions.size(); ++j) {
            require(conditions[i] != conditions[j], ErrorCategory::Config,
                    "config: condition '" + std::string(to_string(conditions[i])) + "' listed twice");
        }
    }
    require(sessions >= 1, ErrorCategory::Config, "config: sessions must be >= 1");
    require(agents >= 8, ErrorCategory::Config, "config: agents must be >= 8");
    require(pilot_size >= 1, ErrorCategory::Config, "config: pilot_size must be >= 1");
    require(permutations >= 1, ErrorCategory::Config, "config: permutations must be >= 1");
    ga.validate();
    policy.validate();
    choice.validate();
    recommender.validate();
    demographics.validate();
}

std::uint64_t session_seed(std::uint64_t master, Condition condition, std::size_t session) {
    return derive_seed(master, static_cast<std::uint64_t>(condition) * 1000003ULL + session);
}

SessionResult run_session(Condition condition, const ExperimentConfig& config, std::size_t session,
                          const Population* population) {
    const auto start = std::chrono::steady_clock::now();
    SessionResult r;
    r.condition = condition;
    r.session = session;
    r.seed = session_seed(config.seed, condition, session);
    if (population) {
        r.population = *population;
    } else {
        Rng pop_rng(derive_seed(r.seed, 1));
        r.population = synth_population(config.agents, config.demographics, pop_rng);
    }
    require(r.population.size() >= 8, ErrorCategory::InvalidInput,
            "session needs at least 8 participants, got " + std::to_string(r.population.size()));

    const auto ids = r.population.ids();
    switch (condition) {
    case Condition::Random: {
        Rng rng(derive_seed(r.seed, 4));
        AssemblyState state(ids);
        state.assign(random_partition(r.population, kMaxTeamSize, rng));
        r.events.assign(state.event_log().begin(), state.event_log().end());
        break;
    }
    case Condition::AlgorithmicDiverse: {
        GaConfig ga = config.ga;
        ga.rng_seed = derive_seed(r.seed, 2);
        const auto result = ga_partition(r.population, ga, config.recommender.schema);
        AssemblyState state(ids);
        state.assign(result.selected);
        r.events.assign(state.event_log().begin(), state.event_log().end());
        break;
    }
    case Condition::SelfAssembled:
    case Condition::FairnessAware: {
        Rng rng(derive_seed(r.seed, 3));
        const auto mode = condition == Condition::FairnessAware ? RankingMode::Fairness : RankingMode::FitOnly;
        auto run = simulate_assembly(r.population, config.recommender, config.choice, config.policy, mode,
                                     {config.rounds, config.pilot_size}, rng);
        r.events.assign(run.state.event_log().begin(), run.state.event_log().end());
        r.moments = run.moments;
        r.exposures = std::move(run.exposures);
        r.grouped_fraction = run.grouped_fraction;
        break;
    }
    }

    const auto& fill = std::get<DeadlineFill>(r.events.back().payload);
    r.partition = fill.partition;
    validate_partition(r.partition, r.population);
    for (const auto& team : r.partition.teams) {
        r.profiles.push_back(team_diversity_profile(team, r.population, config.recommender.schema));
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<TeamMetricRow> team_metric_rows(const SessionResult& session) {
    std::vector<TeamMetricRow> rows;
    for (std::size_t t = 0; t < session.partition.teams.size(); ++t) {
        rows.push_back({session.condition, session.session, t, session.partition.teams[t].size(), session.profiles[t]});
    }
    return rows;
}

namespace {

std::vector<std::string> team_metric_header() {
    std::vector<std::string> h{"condition", "session", "team", "size", "gender_blau", "race_blau",
                               "ethnicity_blau", "international_blau", "age_cv", "age_score"};
    for (std::size_t k = 0; k < kSkillCount; ++k) h.push_back("cv_" + std::string(to_string(static_cast<Skill>(k))));
    for (std::size_t k = 0; k < kSkillCount; ++k) {
        h.push_back("score_" + std::string(to_string(static_cast<Skill>(k))));
    }
    for (const char* s : {"surface_score", "deep_score", "total_score"}) h.push_back(s);
    return h;
}

std::string join(const std::vector<std::string>& fields, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += sep;
        out += fields[i];
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCategory::InvalidInput, "bad number '" + s + "' in " + what);
}

std::uint64_t parse_unsigned(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == s.size() && !s.empty() && s[0] != '-') return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCategory::InvalidInput, "bad integer '" + s + "' in " + what);
}

// Lines of a CSV with a header, returned as name -> column maps.
std::vector<std::map<std::string, std::string>> csv_records(std::string_view text, const std::string& what,
                                                            const std::vector<std::string>& required) {
    std::istringstream in{std::string(text)};
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCategory::InvalidInput, what + ": missing header");
    const auto header = split_csv_line(line);
    for (const auto& col : required) {
        require(std::find(header.begin(), header.end(), col) != header.end(), ErrorCategory::InvalidInput,
                what + ": missing column '" + col + "'");
    }
    std::vector<std::map<std::string, std::string>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == header.size(), ErrorCategory::InvalidInput,
                what + " line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                    " fields, got " + std::to_string(fields.size()));
        std::map<std::string, std::string> rec;
        for (std::size_t i = 0; i < header.size(); ++i) rec[header[i]] = fields[i];
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

std::string team_metrics_csv(const std::vector<TeamMetricRow>& rows) {
    std::string out = join(team_metric_header()) + "\n";
    for (const auto& r : rows) {
        const auto& p = r.profile;
        std::vector<std::string> f{std::string(to_string(r.condition)), std::to_string(r.session),
                                   std::to_string(r.team), std::to_string(r.size), fmt(p.gender_blau),
                                   fmt(p.race_blau), fmt(p.ethnicity_blau), fmt(p.international_blau),
                                   fmt(p.age_cv), fmt(p.age_score)};
        for (double v : p.skill_cvs) f.push_back(fmt(v));
        for (double v : p.skill_scores) f.push_back(fmt(v));
        f.push_back(fmt(p.surface_score));
        f.push_back(fmt(p.deep_score));
        f.push_back(fmt(p.total_score));
        out += join(f) + "\n";
    }
    return out;
}

std::vector<TeamMetricRow> read_team_metrics_csv(std::string_view text) {
    const auto header = team_metric_header();
    std::vector<TeamMetricRow> rows;
    for (const auto& rec : csv_records(text, "team metrics", header)) {
        auto num = [&](const std::string& col) { return parse_double(rec.at(col), "team metrics column " + col); };
        TeamMetricRow r;
        r.condition = parse_condition(rec.at("condition"));
        r.session = parse_unsigned(rec.at("session"), "team metrics column session");
        r.team = parse_unsigned(rec.at("team"), "team metrics column team");
        r.size = parse_unsigned(rec.at("size"), "team metrics column size");
        auto& p = r.profile;
        p.gender_blau = num("gender_blau");
        p.race_blau = num("race_blau");
        p.ethnicity_blau = num("ethnicity_blau");
        p.international_blau = num("international_blau");
        p.age_cv = num("age_cv");
        p.age_score = num("age_score");
        for (std::size_t k = 0; k < kSkillCount; ++k) {
            const std::string name(to_string(static_cast<Skill>(k)));
            p.skill_cvs[k] = num("cv_" + name);
            p.skill_scores[k] = num("score_" + name);
        }
        p.surface_score = num("surface_score");
        p.deep_score = num("deep_score");
        p.total_score = num("total_score");
        rows.push_back(r);
    }
    return rows;
}

double metric_value(const DiversityProfile& p, std::string_view metric) {
    if (metric == "surface_score") return p.surface_score;
    if (metric == "deep_score") return p.deep_score;
    if (metric == "total_score") return p.total_score;
    if (metric == "gender_blau") return p.gender_blau;
    if (metric == "race_blau") return p.race_blau;
    if (metric == "ethnicity_blau") return p.ethnicity_blau;
    if (metric == "international_blau") return p.international_blau;
    if (metric == "age_score") return p.age_score;
    fail(ErrorCategory::InvalidInput, "unknown metric '" + std::string(metric) + "'");
}

ExperimentReport analyze_team_metrics(const std::vector<TeamMetricRow>& rows, std::size_t permutations,
                                      std::uint64_t seed) {
    require(!rows.empty(), ErrorCategory::InvalidInput, "no team metrics to analyze");
    ExperimentReport report;
    for (auto c : kAllConditions) {
        const auto n = static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [&](const TeamMetricRow& r) { return r.condition == c; }));
        if (n == 0) continue;
        report.conditions.push_back(c);
        report.team_counts.push_back(n);
    }
    for (std::size_t m = 0; m < kReportMetrics.size(); ++m) {
        MetricAnalysis a;
        a.metric = std::string(kReportMetrics[m]);
        a.conditions = report.conditions;
        stats::GroupSamples groups;
        for (auto c : report.conditions) {
            std::vector<double> values;
            for (const auto& r : rows) {
                if (r.condition == c) values.push_back(metric_value(r.profile, a.metric));
            }
            a.descriptives.push_back(stats::describe(values));
            groups.add(std::string(to_string(c)), std::move(values));
        }
        if (report.conditions.size() >= 2) {
            a.anova = stats::anova_f(groups, permutations, derive_seed(seed, 2 * m));
            a.pairwise = stats::pairwise_diffs(groups, permutations, derive_seed(seed, 2 * m + 1));
        }
        report.metrics.push_back(std::move(a));
    }
    return report;
}

std::vector<BalanceCheck> balance_checks(const std::vector<std::pair<Condition, const Population*>>& populations) {
    std::vector<Condition> conds;
    for (const auto& [c, p] : populations) {
        if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
    }
    std::sort(conds.begin(), conds.end());
    std::vector<BalanceCheck> out;
    if (conds.size() < 2) return out;

    auto tabulate = [&](const char* name, std::size_t categories, auto category_of) {
        std::vector<std::vector<double>> table(conds.size(), std::vector<double>(categories, 0.0));
        for (const auto& [c, pop] : populations) {
            const auto row = static_cast<std::size_t>(std::find(conds.begin(), conds.end(), c) - conds.begin());
            for (const auto& person : pop->members()) table[row][category_of(person)] += 1.0;
        }
        // Categories nobody drew carry no information and would zero a marginal.
        std::vector<std::vector<double>> kept(conds.size());
        for (std::size_t k = 0; k < categories; ++k) {
            double col = 0.0;
            for (const auto& row : table) col += row[k];
            if (col == 0.0) continue;
            for (std::size_t r = 0; r < table.size(); ++r) kept[r].push_back(table[r][k]);
        }
        if (kept.front().size() < 2) return;
        out.push_back({name, stats::chi2_independence(kept)});
    };
    tabulate("gender", kGenderCount, [](const Participant& p) { return static_cast<std::size_t>(p.gender); });
    tabulate("race", kRaceCount, [](const Participant& p) { return static_cast<std::size_t>(p.race); });
    tabulate("hispanic", 2, [](const Participant& p) { return std::size_t{p.hispanic}; });
    tabulate("international", 2, [](const Participant& p) { return std::size_t{p.international}; });
    return out;
}

const MetricAnalysis* find_metric(const ExperimentReport& report, std::string_view metric) {
    for (const auto& m : report.metrics) {
        if (m.metric == metric) return &m;
    }
    return nullptr;
}

const stats::PairwiseComparison* find_pair(const MetricAnalysis& metric, Condition first, Condition second) {
    for (const auto& p : metric.pairwise) {
        if (p.first == to_string(first) && p.second == to_string(second)) return &p;
    }
    return nullptr;
}

namespace {

json number(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
    json j;
    j["conditions"] = json::array();
    for (std::size_t i = 0; i < report.conditions.size(); ++i) {
        j["conditions"].push_back({{"condition", to_string(report.conditions[i])}, {"teams", report.team_counts[i]}});
    }
    j["metrics"] = json::array();
    for (const auto& m : report.metrics) {
        json jm;
        jm["metric"] = m.metric;
        jm["descriptives"] = json::array();
        for (std::size_t i = 0; i < m.conditions.size(); ++i) {
            const auto& d = m.descriptives[i];
            jm["descriptives"].push_back(
                {{"condition", to_string(m.conditions[i])}, {"n", d.n}, {"mean", d.mean}, {"sd", d.sd}});
        }
        if (m.anova) {
            jm["anova"] = {{"f", number(m.anova->f)},
                           {"p", m.anova->p},
                           {"df_between", m.anova->df_between},
                           {"df_within", m.anova->df_within}};
            jm["pairwise"] = json::array();
            for (const auto& p : m.pairwise) {
                jm["pairwise"].push_back({{"first", p.first},
                                          {"second", p.second},
                                          {"delta", p.delta},
                                          {"p", p.p},
                                          {"p_adjusted", p.p_adjusted}});
            }
        }
        j["metrics"].push_back(std::move(jm));
    }
    if (!report.balance.empty()) {
        j["balance"] = json::array();
        for (const auto& b : report.balance) {
            j["balance"].push_back({{"attribute", b.attribute},
                                    {"chi2", b.result.statistic},
                                    {"df", b.result.df},
                                    {"p", b.result.p}});
        }
    }
    return j.dump(2) + "\n";
}

std::string report_text(const ExperimentReport& report) {
    std::ostringstream out;
    out << "teams per condition\n";
    for (std::size_t i = 0; i < report.conditions.size(); ++i) {
        out << "  " << pad_right(std::string(to_string(report.conditions[i])), 22) << report.team_counts[i] << "\n";
    }
    for (const auto& m : report.metrics) {
        out << "\n" << m.metric << "\n";
        out << "  " << pad_right("condition", 22) << pad_left("n", 6) << pad_left("mean", 10) << pad_left("sd", 10)
            << "\n";
        for (std::size_t i = 0; i < m.conditions.size(); ++i) {
            const auto& d = m.descriptives[i];
            out << "  " << pad_right(std::string(to_string(m.conditions[i])), 22) << pad_left(std::to_string(d.n), 6)
                << pad_left(fixed(d.mean, 4), 10) << pad_left(fixed(d.sd, 4), 10) << "\n";
        }
        if (!m.anova) continue;
        const std::string f = std::isfinite(m.anova->f) ? fixed(m.anova->f, 3) : "inf";
        out << "  F(" << m.anova->df_between << ", " << m.anova->df_within << ") = " << f
            << "  permutation p = " << fixed(m.anova->p, 4) << "\n";
        out << "  " << pad_right("pair", 44) << pad_left("delta", 10) << pad_left("p", 9) << pad_left("p_adj", 9)
            << "\n";
        for (const auto& p : m.pairwise) {
            out << "  " << pad_right(p.second + " - " + p.first, 44) << pad_left(fixed(p.delta, 4), 10)
                << pad_left(fixed(p.p, 4), 9) << pad_left(fixed(p.p_adjusted, 4), 9) << "\n";
        }
    }
    if (!report.balance.empty()) {
        out << "\ndemographic balance across conditions (chi-squared)\n";
        for (const auto& b : report.balance) {
            out << "  " << pad_right(b.attribute, 16) << "chi2 = " << pad_left(fixed(b.result.statistic, 3), 9)
                << "  df = " << pad_left(std::to_string(b.result.df), 2) << "  p = " << fixed(b.result.p, 4) << "\n";
        }
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads) {
    config.validate();
    ExperimentResult result;
    result.config = config;

    struct Task {
        Condition condition;
        std::size_t session;
    };
    std::vector<Task> tasks;
    std::vector<Condition> ordered;
    for (auto c : kAllConditions) {
        if (std::find(config.conditions.begin(), config.conditions.end(), c) != config.conditions.end()) {
            ordered.push_back(c);
        }
    }
    for (auto c : ordered) {
        for (std::size_t s = 0; s < config.sessions; ++s) tasks.push_back({c, s});
    }

    result.sessions.resize(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                result.sessions[i] = run_session(tasks[i].condition, config, tasks[i].session);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, tasks.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<TeamMetricRow> rows;
    std::vector<std::pair<Condition, const Population*>> pops;
    for (const auto& s : result.sessions) {
        auto r = team_metric_rows(s);
        rows.insert(rows.end(), r.begin(), r.end());
        pops.emplace_back(s.condition, &s.population);
    }
    result.report = analyze_team_metrics(rows, config.permutations, derive_seed(config.seed, kAnalysisStream));
    result.report.balance = balance_checks(pops);
    return result;
}

namespace {

std::string exposure_header() {
    return "searcher,candidate,round,rank,raw_diversity,rank_z,same_gender,diversity_z,treatment,chosen,invited";
}

std::string exposure_fields(const Exposure& e) {
    return std::to_string(raw(e.searcher)) + "," + std::to_string(raw(e.candidate)) + "," + std::to_string(e.round) +
           "," + std::to_string(e.rank) + "," + fmt(e.raw_diversity) + "," + fmt(e.rank_z) + "," +
           (e.same_gender ? "1" : "0") + "," + fmt(e.diversity_z) + "," + (e.treatment ? "1" : "0") + "," +
           (e.chosen ? "1" : "0") + "," + (e.invited ? "1" : "0");
}

}  // namespace

std::string exposures_csv(const std::vector<Exposure>& exposures) {
    std::string out = exposure_header() + "\n";
    for (const auto& e : exposures) out += exposure_fields(e) + "\n";
    return out;
}

std::vector<Exposure> read_exposures_csv(std::string_view text) {
    const std::vector<std::string> required{"searcher", "candidate", "round", "rank", "raw_diversity", "rank_z",
                                            "same_gender", "diversity_z", "treatment", "chosen", "invited"};
    std::vector<Exposure> out;
    for (const auto& rec : csv_records(text, "exposures", required)) {
        auto flag = [&](const char* col) {
            const auto& v = rec.at(col);
            require(v == "0" || v == "1", ErrorCategory::InvalidInput,
                    std::string("exposures column ") + col + " must be 0 or 1");
            return v == "1";
        };
        auto uint = [&](const char* col) {
            return static_cast<std::uint32_t>(parse_unsigned(rec.at(col), std::string("exposures column ") + col));
        };
        Exposure e;
        e.searcher = participant_id(uint("searcher"));
        e.candidate = participant_id(uint("candidate"));
        e.round = uint("round");
        e.rank = uint("rank");
        e.raw_diversity = parse_double(rec.at("raw_diversity"), "exposures column raw_diversity");
        e.rank_z = parse_double(rec.at("rank_z"), "exposures column rank_z");
        e.same_gender = flag("same_gender");
        e.diversity_z = parse_double(rec.at("diversity_z"), "exposures column diversity_z");
        e.treatment = flag("treatment");
        e.chosen = flag("chosen");
        e.invited = flag("invited");
        out.push_back(e);
    }
    return out;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::vector<TeamMetricRow> rows;
    std::string exposures = "condition,session," + exposure_header() + "\n";
    std::string manifest;
    json cfg = config_to_json(result.config, false);
    manifest += json{{"kind", "config"}, {"config", cfg}}.dump() + "\n";

    for (const auto& s : result.sessions) {
        auto r = team_metric_rows(s);
        rows.insert(rows.end(), r.begin(), r.end());
        const std::string stem = session_stem(s.condition, s.session);
        for (const auto& e : s.exposures) {
            exposures += std::string(to_string(s.condition)) + "," + std::to_string(s.session) + "," +
                         exposure_fields(e) + "\n";
        }
        json line{{"kind", "session"},
                  {"condition", to_string(s.condition)},
                  {"session", s.session},
                  {"seed", s.seed},
                  {"teams", s.partition.teams.size()},
                  {"solos", s.partition.solos.size()},
                  {"events", "events/" + stem + ".jsonl"},
                  {"population", "populations/" + stem + ".jsonl"}};
        if (s.moments) {
            line["moments"] = {{"rank_mean", s.moments->rank_mean},
                               {"rank_sd", s.moments->rank_sd},
                               {"diversity_mean", s.moments->diversity_mean},
                               {"diversity_sd", s.moments->diversity_sd}};
            line["grouped_fraction"] = s.grouped_fraction;
        }
        manifest += line.dump() + "\n";
        write_text_file(dir / "events" / (stem + ".jsonl"), to_jsonl(s.events));
        write_text_file(dir / "populations" / (stem + ".jsonl"), to_jsonl(s.population));
    }
    manifest += json{{"kind", "build"}, {"version", kVersion}}.dump() + "\n";

    write_text_file(dir / "team_metrics.csv", team_metrics_csv(rows));
    write_text_file(dir / "report.json", report_json(result.report));
    write_text_file(dir / "report.txt", report_text(result.report));
    write_text_file(dir / "manifest.jsonl", manifest);
    write_text_file(dir / "exposures.csv", exposures);
}

ChoiceAudit choice_audit(const std::vector<Exposure>& exposures, const ChoiceModelParams& generating) {
    ChoiceAudit audit;
    audit.exposures = exposures.size();
    const auto truth = generating.coefficients();
    const std::array<const char*, 6> names{"intercept", "rank", "same_gender", "diversity", "treatment", "interaction"};

    std::array<bool, 6> use{true, true, true, true, true, true};
    auto constant = [&](auto field) {
        if (exposures.empty()) return true;
        const double first = field(exposures.front());
        return std::all_of(exposures.begin(), exposures.end(), [&](const Exposure& e) { return field(e) == first; });
    };
    if (constant([](const Exposure& e) { return e.treatment ? 1.0 : 0.0; }) && !exposures.empty()) {
        use[4] = use[5] = false;
        audit.warnings.push_back(exposures.front().treatment
                                     ? "treatment is 1 for every exposure: treatment and interaction dropped; the "
                                       "diversity slope absorbs the interaction"
                                     : "treatment is 0 for every exposure: treatment and interaction dropped");
    }
    if (constant([](const Exposure& e) { return e.same_gender ? 1.0 : 0.0; }) && !exposures.empty()) {
        use[2] = false;
        audit.warnings.push_back("same_gender is constant: coefficient dropped");
    }
    if (constant([](const Exposure& e) { return e.rank_z; }) && !exposures.empty()) {
        use[1] = false;
        audit.warnings.push_back("rank is constant: coefficient dropped");
    }
    if (constant([](const Exposure& e) { return e.diversity_z; }) && !exposures.empty()) {
        use[3] = use[5] = false;
        audit.warnings.push_back("diversity is constant: diversity and interaction dropped");
    }
    const auto p = static_cast<std::size_t>(std::count(use.begin(), use.end(), true));
    require(exposures.size() >= 50 * p, ErrorCategory::InvalidInput,
            "too few exposures for the choice audit: " + std::to_string(exposures.size()) + " for " +
                std::to_string(p) + " coefficients (need at least " + std::to_string(50 * p) +
                "); run more agency sessions or more rounds");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(exposures.size()), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(exposures.size()));
    for (std::size_t i = 0; i < exposures.size(); ++i) {
        const auto& e = exposures[i];
        const double tr = e.treatment ? 1.0 : 0.0;
        const std::array<double, 6> row{1.0, e.rank_z, e.same_gender ? 1.0 : 0.0, e.diversity_z, tr,
                                        e.diversity_z * tr};
        Eigen::Index col = 0;
        for (std::size_t k = 0; k < 6; ++k) {
            if (use[k]) X(static_cast<Eigen::Index>(i), col++) = row[k];
        }
        y[static_cast<Eigen::Index>(i)] = e.chosen ? 1.0 : 0.0;
    }
    const auto fit = stats::logistic_fit(X, y);
    audit.converged = fit.converged;
    audit.separation = fit.separation;
    if (fit.separation) audit.warnings.push_back("coefficients diverged (separation); estimates are not finite-sample MLEs");
    if (!fit.converged && !fit.separation) audit.warnings.push_back("logistic fit did not converge");
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < 6; ++k) {
        if (!use[k]) continue;
        audit.coefficients.push_back({names[k], truth[k], fit.coefficients[col], fit.standard_errors[col]});
        ++col;
    }
    return audit;
}

std::string audit_text(const ChoiceAudit& audit) {
    std::ostringstream out;
    out << "choice audit over " << audit.exposures << " exposures"
        << (audit.converged ? "" : " (NOT converged)") << "\n";
    out << "  " << pad_right("coefficient", 14) << pad_left("generating", 12) << pad_left("recovered", 12)
        << pad_left("se", 9) << pad_left("error", 10) << "\n";
    for (const auto& c : audit.coefficients) {
        out << "  " << pad_right(c.name, 14) << pad_left(fixed(c.generating, 3), 12)
            << pad_left(fixed(c.recovered, 3), 12) << pad_left(fixed(c.standard_error, 3), 9)
            << pad_left(fixed(c.recovered - c.generating, 3), 10) << "\n";
    }
    for (const auto& w : audit.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string audit_json(const ChoiceAudit& audit) {
    json j{{"exposures", audit.exposures}, {"converged", audit.converged}, {"separation", audit.separation}};
    j["coefficients"] = json::array();
    for (const auto& c : audit.coefficients) {
        j["coefficients"].push_back({{"name", c.name},
                                     {"generating", c.generating},
                                     {"recovered", c.recovered},
                                     {"standard_error", c.standard_error}});
    }
    j["warnings"] = audit.warnings;
    return j.dump(2) + "\n";
}

ReplayCheck replay_directory(const std::filesystem::path& dir) {
    ReplayCheck check;
    std::ifstream manifest(dir / "manifest.jsonl");
    require(static_cast<bool>(manifest), ErrorCategory::Io, "cannot open " + (dir / "manifest.jsonl").string());

    std::optional<ExperimentConfig> config;
    std::vector<TeamMetricRow> rows;
    std::vector<Population> populations;
    std::vector<Condition> population_conditions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorCategory::InvalidInput, "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string kind = j.value("kind", "");
        if (kind == "config") {
            config = config_from_json(j.at("config"));
        } else if (kind == "session") {
            require(config.has_value(), ErrorCategory::InvalidInput, "manifest: session line before config line");
            const auto condition = parse_condition(j.at("condition").get<std::string>());
            const auto session = j.at("session").get<std::size_t>();
            const auto population = read_population(dir / j.at("population").get<std::string>());
            const auto events = read_event_log(dir / j.at("events").get<std::string>());
            const auto ids = population.ids();
            const auto state = AssemblyState::replay(ids, events);
            check.events += events.size();
            ++check.sessions;
            if (!state.finalized()) {
                check.problems.push_back(session_stem(condition, session) + ": log does not end in a deadline fill");
                continue;
            }
            const auto& partition = std::get<DeadlineFill>(events.back().payload).partition;
            if (auto v = partition_violation(partition, population)) {
                check.problems.push_back(session_stem(condition, session) + ": " + *v);
                continue;
            }
            if (j.at("seed").get<std::uint64_t>() != session_seed(config->seed, condition, session)) {
                check.problems.push_back(session_stem(condition, session) + ": seed does not match the config");
            }
            SessionResult s;
            s.condition = condition;
            s.session = session;
            s.partition = partition;
            for (const auto& team : partition.teams) {
                s.profiles.push_back(team_diversity_profile(team, population, config->recommender.schema));
            }
            auto r = team_metric_rows(s);
            rows.insert(rows.end(), r.begin(), r.end());
            populations.push_back(population);
            population_conditions.push_back(condition);
        }
    }
    require(config.has_value(), ErrorCategory::InvalidInput, "manifest has no config line");
    require(!rows.empty(), ErrorCategory::InvalidInput, "manifest lists no sessions");

    std::vector<std::pair<Condition, const Population*>> pops;
    for (std::size_t i = 0; i < populations.size(); ++i) pops.emplace_back(population_conditions[i], &populations[i]);
    auto report = analyze_team_metrics(rows, config->permutations, derive_seed(config->seed, kAnalysisStream));
    report.balance = balance_checks(pops);

    check.report_matches = report_json(report) == read_text_file(dir / "report.json");
    if (!check.report_matches) check.problems.push_back("regenerated report.json differs from the stored one");
    if (team_metrics_csv(rows) != read_text_file(dir / "team_metrics.csv")) {
        check.problems.push_back("regenerated team_metrics.csv differs from the stored one");
    }
    return check;
}

}  // namespace teamform
