// teamform: command-line front end for population synthesis, assignment,
// recommendation, experiment runs, analysis, choice audits and log replay.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teamform/agents.hpp"
#include "teamform/config.hpp"
#include "teamform/error.hpp"
#include "teamform/event_io.hpp"
#include "teamform/harness.hpp"
#include "teamform/optimizer.hpp"
#include "teamform/population_io.hpp"
#include "teamform/recommender.hpp"

namespace fs = std::filesystem;
using namespace teamform;
using nlohmann::json;

namespace {

ExperimentConfig config_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

std::vector<ParticipantId> parse_id_list(const std::string& text) {
    std::vector<ParticipantId> ids;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        try {
            ids.push_back(participant_id(static_cast<std::uint32_t>(std::stoul(item))));
        } catch (const std::exception&) {
            fail(ErrorCategory::InvalidInput, "bad participant id '" + item + "'");
        }
    }
    return ids;
}

void print_error(std::string_view category, const std::string& message) {
    std::cerr << json{{"error", category}, {"message", message}}.dump() << "\n";
}

struct SynthArgs {
    std::size_t n = 32;
    std::uint64_t seed = 1;
    std::string config;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    const auto cfg = config_or_default(a.config);
    Rng rng(a.seed);
    const auto pop = synth_population(a.n, cfg.demographics, rng);
    const fs::path out = a.out.empty() ? resolve_output_dir(cfg.output_dir) / "population.jsonl" : fs::path(a.out);
    write_population(out, pop);
    std::cout << "wrote " << pop.size() << " participants to " << out.string() << "\n";
    return 0;
}

struct AssignArgs {
    std::string population;
    std::string mode = "ga";
    std::uint64_t seed = 1;
    std::string config;
    std::string out;
};

int cmd_assign(const AssignArgs& a) {
    const auto cfg = config_or_default(a.config);
    const auto pop = read_population(a.population);
    Partition partition;
    if (a.mode == "random") {
        Rng rng(a.seed);
        partition = random_partition(pop, kMaxTeamSize, rng);
    } else if (a.mode == "ga") {
        GaConfig ga = cfg.ga;
        ga.rng_seed = a.seed;
        partition = ga_partition(pop, ga, cfg.recommender.schema).selected;
    } else if (a.mode == "oracle") {
        const auto bf = brute_force_partition(pop, cfg.recommender.schema, kMaxTeamSize);
        require(!bf.best_total_partitions.empty(), ErrorCategory::Domain, "oracle found no partition");
        partition = bf.best_total_partitions.front();
    } else {
        fail(ErrorCategory::InvalidInput, "unknown assign mode '" + a.mode + "' (random, ga, oracle)");
    }
    partition = canonical(std::move(partition));
    validate_partition(partition, pop);
    const auto obj = objectives(partition, pop, cfg.recommender.schema);
    json j{{"mode", a.mode},
           {"partition", partition_to_json(partition)},
           {"surface", obj.surface},
           {"deep", obj.deep},
           {"total", obj.total()}};
    if (a.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_text_file(a.out, j.dump(2) + "\n");
        std::cout << "surface " << obj.surface << "  deep " << obj.deep << "  total " << obj.total() << "\n";
    }
    return 0;
}

struct RecommendArgs {
    std::string population;
    std::uint32_t searcher = 0;
    std::string query;
    std::string mode = "fit_only";
    std::string team;
    std::size_t page = 1;
    std::string config;
    bool json_output = false;
};

int cmd_recommend(const RecommendArgs& a) {
    const auto cfg = config_or_default(a.config);
    const auto pop = read_population(a.population);
    Query q;
    q.searcher = participant_id(a.searcher);
    q.criteria = parse_query_spec(a.query);
    require(pop.contains(q.searcher), ErrorCategory::InvalidInput, "searcher " + std::to_string(a.searcher) +
                                                                       " is not in the population");
    auto team = parse_id_list(a.team);
    if (std::find(team.begin(), team.end(), q.searcher) == team.end()) team.push_back(q.searcher);
    std::vector<Candidate> pool;
    for (auto id : pop.ids()) {
        if (std::find(team.begin(), team.end(), id) == team.end()) pool.push_back({id, 1});
    }
    const auto page = rank_candidates(pop, team, pool, q, parse_ranking_mode(a.mode), cfg.recommender, a.page);
    if (a.json_output) {
        json j{{"page", page.page}, {"total", page.total}, {"items", json::array()}};
        for (const auto& r : page.items) {
            j["items"].push_back({{"rank", r.rank},
                                  {"candidate", raw(r.candidate)},
                                  {"fit", r.fit_score},
                                  {"diversity", r.diversity_score},
                                  {"combined", r.combined_score},
                                  {"match_percent", r.match_percent}});
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::printf("%4s %9s %8s %9s %9s %7s\n", "rank", "candidate", "fit", "diversity", "combined", "match%");
    for (const auto& r : page.items) {
        std::printf("%4zu %9u %8.4f %9.4f %9.4f %7.1f\n", static_cast<std::size_t>(r.rank), raw(r.candidate),
                    r.fit_score, r.diversity_score, r.combined_score, r.match_percent);
    }
    std::printf("page %zu, %zu candidates\n", page.page, page.total);
    return 0;
}

struct RunArgs {
    std::string config;
    std::size_t threads = 1;
    std::string out;
};

int cmd_run(const RunArgs& a) {
    const auto cfg = config_or_default(a.config);
    const fs::path out = a.out.empty() ? resolve_output_dir(cfg.output_dir) : fs::path(a.out);
    const auto result = run_experiment(cfg, a.threads);
    write_experiment(result, out);
    std::cout << report_text(result.report);
    std::cout << "\nwrote " << result.sessions.size() << " sessions to " << out.string() << "\n";
    return 0;
}

struct AnalyzeArgs {
    std::string metrics;
    std::size_t permutations = 10000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const auto rows = read_team_metrics_csv(read_text_file(a.metrics));
    const auto report = analyze_team_metrics(rows, a.permutations, a.seed);
    if (!a.out.empty()) {
        write_text_file(fs::path(a.out) / "report.json", report_json(report));
        write_text_file(fs::path(a.out) / "report.txt", report_text(report));
    }
    std::cout << report_text(report);
    return 0;
}

struct AuditArgs {
    std::string exposures;
    std::size_t synthetic = 0;
    bool random_intercepts = false;
    std::uint64_t seed = 1;
    std::string config;
    bool json_output = false;
};

int cmd_audit(const AuditArgs& a) {
    const auto cfg = config_or_default(a.config);
    std::vector<Exposure> exposures;
    if (a.synthetic > 0) {
        Rng rng(a.seed);
        exposures = simulate_choice_exposures(cfg.choice, a.synthetic, a.random_intercepts, rng);
    } else {
        require(!a.exposures.empty(), ErrorCategory::InvalidInput, "audit needs --exposures FILE or --synthetic N");
        exposures = read_exposures_csv(read_text_file(a.exposures));
    }
    const auto audit = choice_audit(exposures, cfg.choice);
    std::cout << (a.json_output ? audit_json(audit) : audit_text(audit));
    return 0;
}

struct ReplayArgs {
    std::string dir;
    std::string events;
    std::string population;
};

int cmd_replay(const ReplayArgs& a) {
    if (!a.dir.empty()) {
        const auto check = replay_directory(a.dir);
        std::cout << "replayed " << check.sessions << " sessions, " << check.events << " events\n";
        for (const auto& p : check.problems) std::cout << "problem: " << p << "\n";
        if (!check.problems.empty()) fail(ErrorCategory::Protocol, "replay found " + std::to_string(check.problems.size()) +
                                                                      " problem(s)");
        std::cout << "report matches\n";
        return 0;
    }
    require(!a.events.empty() && !a.population.empty(), ErrorCategory::InvalidInput,
            "replay needs --dir DIR, or --events FILE with --population FILE");
    const auto pop = read_population(a.population);
    const auto log = read_event_log(a.events);
    const auto ids = pop.ids();
    const auto state = AssemblyState::replay(ids, log);
    std::cout << "replayed " << log.size() << " events; " << (state.finalized() ? "finalized" : "open") << "\n";
    for (const auto& g : state.groups()) {
        std::cout << " ";
        for (auto id : g) std::cout << " " << raw(id);
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Team formation engine and team-assembly experiment simulator"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Draw a synthetic population");
    s->add_option("-n,--count", synth.n, "Number of participants")->check(CLI::PositiveNumber);
    s->add_option("--seed", synth.seed, "RNG seed");
    s->add_option("-c,--config", synth.config, "Experiment config (for the demographic spec)");
    s->add_option("-o,--out", synth.out, "Output file (.jsonl or .csv)");

    AssignArgs assign;
    auto* as = app.add_subcommand("assign", "Partition a population into teams of four");
    as->add_option("-p,--population", assign.population, "Population file")->required();
    as->add_option("-m,--mode", assign.mode, "random, ga or oracle (exhaustive, n <= 12)");
    as->add_option("--seed", assign.seed, "RNG seed");
    as->add_option("-c,--config", assign.config, "Experiment config (GA settings, schema)");
    as->add_option("-o,--out", assign.out, "Write the partition JSON here instead of stdout");

    RecommendArgs rec;
    auto* r = app.add_subcommand("recommend", "Rank teammates for a searcher");
    r->add_option("-p,--population", rec.population, "Population file")->required();
    r->add_option("-s,--searcher", rec.searcher, "Searcher id")->required();
    r->add_option("-q,--query", rec.query, "Criteria, e.g. skill:design=3,same_gender=-1")->required();
    r->add_option("-m,--mode", rec.mode, "fit_only or fairness");
    r->add_option("-t,--team", rec.team, "Comma-separated ids already in the searcher's team");
    r->add_option("--page", rec.page, "Page number")->check(CLI::PositiveNumber);
    r->add_option("-c,--config", rec.config, "Experiment config (recommender settings)");
    r->add_flag("--json", rec.json_output, "Emit JSON");

    RunArgs run;
    auto* ru = app.add_subcommand("run", "Run the multi-condition experiment");
    ru->add_option("-c,--config", run.config, "Experiment config");
    ru->add_option("-j,--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);
    ru->add_option("-o,--out", run.out, std::string("Output directory (else $") + kOutputDirEnv + ", else config)");

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Compare team metrics across conditions");
    a->add_option("-m,--metrics", an.metrics, "team_metrics.csv")->required();
    a->add_option("--permutations", an.permutations, "Permutations per test")->check(CLI::PositiveNumber);
    a->add_option("--seed", an.seed, "RNG seed for the permutations");
    a->add_option("-o,--out", an.out, "Directory for report.json and report.txt");

    AuditArgs au;
    auto* u = app.add_subcommand("audit", "Recover choice-model coefficients from exposures");
    u->add_option("-e,--exposures", au.exposures, "exposures.csv from a run");
    u->add_option("--synthetic", au.synthetic, "Simulate this many exposures from the configured choice model");
    u->add_flag("--random-intercepts", au.random_intercepts, "Give synthetic searchers random intercepts");
    u->add_option("--seed", au.seed, "RNG seed for --synthetic");
    u->add_option("-c,--config", au.config, "Experiment config (generating coefficients)");
    u->add_flag("--json", au.json_output, "Emit JSON");

    ReplayArgs rp;
    auto* p = app.add_subcommand("replay", "Replay event logs and check them against the stored report");
    p->add_option("-d,--dir", rp.dir, "Run output directory");
    p->add_option("-e,--events", rp.events, "Single event log");
    p->add_option("-p,--population", rp.population, "Population for --events");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        if (*s) return cmd_synth(synth);
        if (*as) return cmd_assign(assign);
        if (*r) return cmd_recommend(rec);
        if (*ru) return cmd_run(run);
        if (*a) return cmd_analyze(an);
        if (*u) return cmd_audit(au);
        if (*p) return cmd_replay(rp);
    } catch (const Error& e) {
        print_error(to_string(e.category()), e.what());
        return exit_code(e.category());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}
