#include "teamform/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "teamform/error.hpp"

namespace teamform {

void GaConfig::validate() const {
    require(generations >= 1, ErrorCategory::Config, "ga: generations must be >= 1");
    require(population_size >= 1, ErrorCategory::Config, "ga: population_size must be >= 1");
    require(restarts >= 1, ErrorCategory::Config, "ga: restarts must be >= 1");
    require(!swap_attempts_per_generation || *swap_attempts_per_generation >= 1, ErrorCategory::Config,
            "ga: swap_attempts_per_generation must be >= 1");
}

bool ParetoArchive::accepts(const Objectives& candidate) const {
    return std::none_of(entries_.begin(), entries_.end(), [&](const ArchiveEntry& e) {
        return e.objectives == candidate || dominates(e.objectives, candidate);
    });
}

bool ParetoArchive::insert(Partition partition, const Objectives& objectives) {
    if (!accepts(objectives)) return false;
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(objectives, e.objectives); });
    entries_.push_back({canonical(std::move(partition)), objectives});
    return true;
}

bool ParetoArchive::is_consistent() const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        for (std::size_t j = 0; j < entries_.size(); ++j) {
            if (i != j && dominates(entries_[i].objectives, entries_[j].objectives)) return false;
        }
    }
    return true;
}

Partition random_partition(const Population& population, std::size_t team_size, Rng& rng) {
    require(team_size >= 1, ErrorCategory::InvalidInput, "team size must be >= 1");
    auto ids = population.ids();
    rng.shuffle(ids.begin(), ids.end());
    Partition out;
    const std::size_t full = ids.size() / team_size;
    for (std::size_t t = 0; t < full; ++t) {
        Team team;
        team.members.assign(ids.begin() + static_cast<std::ptrdiff_t>(t * team_size),
                            ids.begin() + static_cast<std::ptrdiff_t>((t + 1) * team_size));
        std::sort(team.members.begin(), team.members.end());
        out.teams.push_back(std::move(team));
    }
    out.solos.assign(ids.begin() + static_cast<std::ptrdiff_t>(full * team_size), ids.end());
    std::sort(out.solos.begin(), out.solos.end());
    return out;
}

Objectives objectives(const Partition& partition, const Population& population, const AttributeSchema& schema) {
    require(!partition.teams.empty(), ErrorCategory::InvalidInput, "objectives: partition has no teams");
    Objectives sum;
    for (const auto& team : partition.teams) {
        const auto profile = team_diversity_profile(team, population, schema);
        sum.surface += profile.surface_score;
        sum.deep += profile.deep_score;
    }
    const double n = static_cast<double>(partition.teams.size());
    return {sum.surface / n, sum.deep / n};
}

namespace {

constexpr std::uint32_t kSolo = std::numeric_limits<std::uint32_t>::max();

// One GA candidate: team membership by population index with cached per-team scores.
class SearchState {
public:
    SearchState(const Population& population, const AttributeSchema& schema, const Partition& start)
        : population_(&population), schema_(&schema), team_of_(population.size(), kSolo),
          pos_of_(population.size(), 0) {
        for (const auto& team : start.teams) {
            std::vector<std::uint32_t> members;
            for (auto id : team.members) members.push_back(static_cast<std::uint32_t>(population.index_of(id)));
            teams_.push_back(std::move(members));
        }
        for (auto id : start.solos) solos_.push_back(static_cast<std::uint32_t>(population.index_of(id)));
        for (std::uint32_t t = 0; t < teams_.size(); ++t) {
            for (std::uint32_t k = 0; k < teams_[t].size(); ++k) {
                team_of_[teams_[t][k]] = t;
                pos_of_[teams_[t][k]] = k;
            }
        }
        for (std::uint32_t k = 0; k < solos_.size(); ++k) pos_of_[solos_[k]] = k;
        team_scores_.resize(teams_.size());
        for (std::size_t t = 0; t < teams_.size(); ++t) team_scores_[t] = score_team(t);
        refresh_total();
    }

    struct Move {
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        Objectives previous_a;
        Objectives previous_b;
        Objectives previous_total;
    };

    const Objectives& objectives() const noexcept { return total_; }

    // Exchanges a random team member with a random participant outside that team.
    Move propose(Rng& rng) {
        const auto n = static_cast<std::uint64_t>(team_of_.size());
        const auto ta = static_cast<std::uint32_t>(rng.below(teams_.size()));
        const std::uint32_t a = teams_[ta][rng.below(teams_[ta].size())];
        std::uint32_t b = 0;
        do {
            b = static_cast<std::uint32_t>(rng.below(n));
        } while (team_of_[b] == ta);

        Move move{a, b, team_scores_[ta], {}, total_};
        const std::uint32_t tb = team_of_[b];
        if (tb != kSolo) move.previous_b = team_scores_[tb];
        exchange(a, b);
        team_scores_[ta] = score_team(ta);
        if (tb != kSolo) team_scores_[tb] = score_team(tb);
        refresh_total();
        return move;
    }

    void undo(const Move& move) {
        // After the exchange, b sits in a's original team.
        const std::uint32_t ta = team_of_[move.b];
        const std::uint32_t tb = team_of_[move.a];
        exchange(move.a, move.b);
        team_scores_[ta] = move.previous_a;
        if (tb != kSolo) team_scores_[tb] = move.previous_b;
        total_ = move.previous_total;
    }

    Partition to_partition() const {
        Partition out;
        const auto members = population_->members();
        for (const auto& team : teams_) {
            Team t;
            for (auto idx : team) t.members.push_back(members[idx].id);
            out.teams.push_back(std::move(t));
        }
        for (auto idx : solos_) out.solos.push_back(members[idx].id);
        return canonical(std::move(out));
    }

private:
    void exchange(std::uint32_t a, std::uint32_t b) {
        auto slot = [this](std::uint32_t idx) -> std::uint32_t& {
            return team_of_[idx] == kSolo ? solos_[pos_of_[idx]] : teams_[team_of_[idx]][pos_of_[idx]];
        };
        std::swap(slot(a), slot(b));
        std::swap(team_of_[a], team_of_[b]);
        std::swap(pos_of_[a], pos_of_[b]);
    }

    Objectives score_team(std::size_t t) const {
        std::array<const Participant*, 16> buffer{};
        std::vector<const Participant*> heap;
        std::span<const Participant*> members;
        const auto all = population_->members();
        if (teams_[t].size() <= buffer.size()) {
            for (std::size_t k = 0; k < teams_[t].size(); ++k) buffer[k] = &all[teams_[t][k]];
            members = std::span<const Participant*>(buffer.data(), teams_[t].size());
        } else {
            for (auto idx : teams_[t]) heap.push_back(&all[idx]);
            members = heap;
        }
        const auto profile = diversity_profile(members, *schema_);
        return {profile.surface_score, profile.deep_score};
    }

    void refresh_total() {
        Objectives sum;
        for (const auto& s : team_scores_) {
            sum.surface += s.surface;
            sum.deep += s.deep;
        }
        const double n = static_cast<double>(team_scores_.size());
        total_ = {sum.surface / n, sum.deep / n};
    }

    const Population* population_;
    const AttributeSchema* schema_;
    std::vector<std::vector<std::uint32_t>> teams_;
    std::vector<std::uint32_t> solos_;
    std::vector<std::uint32_t> team_of_;
    std::vector<std::uint32_t> pos_of_;
    std::vector<Objectives> team_scores_;
    Objectives total_;
};

// Higher surface, then lower hash.
bool prefer(const ArchiveEntry& a, std::uint64_t hash_a, const ArchiveEntry& b, std::uint64_t hash_b) {
    if (a.objectives.surface != b.objectives.surface) return a.objectives.surface > b.objectives.surface;
    return hash_a < hash_b;
}

constexpr double kTieTolerance = 1e-12;

std::size_t best_by(std::span<const ArchiveEntry> entries, const std::vector<double>& score,
                    const std::vector<std::uint64_t>& hashes) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const double diff = score[i] - score[best];
        if (diff > kTieTolerance ||
            (std::abs(diff) <= kTieTolerance && prefer(entries[i], hashes[i], entries[best], hashes[best]))) {
            best = i;
        }
    }
    return best;
}

}  // namespace

std::size_t elbow_index(std::span<const ArchiveEntry> entries) {
    require(!entries.empty(), ErrorCategory::InvalidInput, "elbow_select: empty archive");
    std::vector<std::uint64_t> hashes;
    hashes.reserve(entries.size());
    for (const auto& e : entries) hashes.push_back(partition_hash(e.partition));

    std::vector<double> sums;
    for (const auto& e : entries) sums.push_back(e.objectives.total());
    if (entries.size() <= 2) return best_by(entries, sums, hashes);

    auto low = std::min_element(entries.begin(), entries.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        if (a.objectives.surface != b.objectives.surface) return a.objectives.surface < b.objectives.surface;
        return a.objectives.deep > b.objectives.deep;
    });
    auto high = std::max_element(entries.begin(), entries.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        if (a.objectives.surface != b.objectives.surface) return a.objectives.surface < b.objectives.surface;
        return a.objectives.deep > b.objectives.deep;
    });
    const double x0 = low->objectives.surface;
    const double y0 = low->objectives.deep;
    const double dx = high->objectives.surface - x0;
    const double dy = high->objectives.deep - y0;
    const double length = std::hypot(dx, dy);
    if (length <= kTieTolerance) return best_by(entries, sums, hashes);

    std::vector<double> distance;
    distance.reserve(entries.size());
    for (const auto& e : entries) {
        distance.push_back(std::abs(dy * (e.objectives.surface - x0) - dx * (e.objectives.deep - y0)) / length);
    }
    if (*std::max_element(distance.begin(), distance.end()) <= kTieTolerance) {
        return best_by(entries, sums, hashes);
    }
    return best_by(entries, distance, hashes);
}

const Partition& elbow_select(std::span<const ArchiveEntry> entries) {
    return entries[elbow_index(entries)].partition;
}

GaResult ga_partition(const Population& population, const GaConfig& config, const AttributeSchema& schema,
                      std::size_t team_size) {
    config.validate();
    require(population.size() >= 2 * team_size && population.size() >= 8, ErrorCategory::InvalidInput,
            "need at least two teams");

    GaResult result;
    const std::size_t attempts = config.swap_attempts(population.size());
    for (std::size_t restart = 0; restart < config.restarts; ++restart) {
        Rng rng(derive_seed(config.rng_seed, restart));
        std::vector<SearchState> candidates;
        candidates.reserve(config.population_size);
        for (std::size_t i = 0; i < config.population_size; ++i) {
            const Partition start = random_partition(population, team_size, rng);
            candidates.emplace_back(population, schema, start);
            if (restart == 0 && i == 0) {
                result.initial = canonical(start);
                result.initial_objectives = candidates.back().objectives();
            }
            result.archive.insert(candidates.back().to_partition(), candidates.back().objectives());
            ++result.evaluations;
        }

        for (std::size_t generation = 0; generation < config.generations; ++generation) {
            for (auto& candidate : candidates) {
                for (std::size_t k = 0; k < attempts; ++k) {
                    const Objectives parent = candidate.objectives();
                    const auto move = candidate.propose(rng);
                    ++result.evaluations;
                    const Objectives& child = candidate.objectives();
                    if (dominates(parent, child)) {
                        candidate.undo(move);
                        continue;
                    }
                    if (result.archive.accepts(child)) result.archive.insert(candidate.to_partition(), child);
                }
            }
        }
    }

    // Knee among the entries that improve on the starting point.
    std::vector<ArchiveEntry> improving;
    for (const auto& e : result.archive.entries()) {
        if (weakly_dominates(e.objectives, result.initial_objectives)) improving.push_back(e);
    }
    const auto pick = elbow_index(improving);
    result.selected = improving[pick].partition;
    result.selected_objectives = improving[pick].objectives;
    return result;
}

namespace {

struct Enumerator {
    const Population& population;
    const AttributeSchema& schema;
    std::size_t team_size;
    BruteForceResult& result;
    std::vector<std::size_t> solos;
    std::vector<std::vector<std::size_t>> teams;

    void record() {
        Partition p;
        const auto members = population.members();
        for (const auto& team : teams) {
            Team t;
            for (auto idx : team) t.members.push_back(members[idx].id);
            p.teams.push_back(std::move(t));
        }
        for (auto idx : solos) p.solos.push_back(members[idx].id);
        p = canonical(std::move(p));
        const Objectives o = objectives(p, population, schema);
        ++result.enumerated;
        result.all_objectives.push_back(o);

        auto update = [&p](double value, double best, std::vector<Partition>& set) {
            if (set.empty() || value > best + kTieTolerance) {
                set.assign(1, p);
                return true;
            }
            if (std::abs(value - best) <= kTieTolerance) set.push_back(p);
            return false;
        };
        if (update(o.surface, result.best_surface_value.surface, result.best_surface)) result.best_surface_value = o;
        if (update(o.deep, result.best_deep_value.deep, result.best_deep)) result.best_deep_value = o;
        if (update(o.total(), result.best_total, result.best_total_partitions)) result.best_total = o.total();
    }

    void split_teams(std::vector<std::size_t>& remaining) {
        if (remaining.empty()) {
            record();
            return;
        }
        // The lowest remaining index anchors the next team, so each partition appears once.
        const std::size_t anchor = remaining.front();
        std::vector<std::size_t> rest(remaining.begin() + 1, remaining.end());
        std::vector<bool> pick(rest.size(), false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(team_size - 1), true);
        do {
            std::vector<std::size_t> team{anchor};
            std::vector<std::size_t> left;
            for (std::size_t i = 0; i < rest.size(); ++i) (pick[i] ? team : left).push_back(rest[i]);
            teams.push_back(std::move(team));
            split_teams(left);
            teams.pop_back();
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }

    void run() {
        const std::size_t n = population.size();
        const std::size_t r = n % team_size;
        std::vector<bool> solo(n, false);
        std::fill(solo.begin(), solo.begin() + static_cast<std::ptrdiff_t>(r), true);
        do {
            solos.clear();
            std::vector<std::size_t> remaining;
            for (std::size_t i = 0; i < n; ++i) (solo[i] ? solos : remaining).push_back(i);
            split_teams(remaining);
        } while (std::prev_permutation(solo.begin(), solo.end()));
    }
};

}  // namespace

BruteForceResult brute_force_partition(const Population& population, const AttributeSchema& schema,
                                       std::size_t team_size) {
    require(population.size() <= kBruteForceLimit, ErrorCategory::InvalidInput,
            "brute force limited to 12 participants");
    require(team_size >= 1 && population.size() >= team_size, ErrorCategory::InvalidInput,
            "brute force needs at least one full team");
    BruteForceResult result;
    Enumerator{population, schema, team_size, result, {}, {}}.run();
    return result;
}

}  // namespace teamform
