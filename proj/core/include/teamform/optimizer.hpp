#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "teamform/diversity.hpp"
#include "teamform/random.hpp"
#include "teamform/types.hpp"

namespace teamform {

struct GaConfig {
    std::size_t generations = 20;
    std::size_t population_size = 50;
    // Swap proposals per candidate per generation; unset means one per participant.
    std::optional<std::size_t> swap_attempts_per_generation;
    std::size_t restarts = 1;
    std::uint64_t rng_seed = 0;

    std::size_t swap_attempts(std::size_t participants) const {
        return swap_attempts_per_generation.value_or(participants);
    }
    void validate() const;
};

struct Objectives {
    double surface = 0.0;
    double deep = 0.0;

    double total() const noexcept { return surface + deep; }
    friend bool operator==(const Objectives&, const Objectives&) = default;
};

/// a dominates b: at least as good on both objectives and strictly better on one.
constexpr bool dominates(const Objectives& a, const Objectives& b) noexcept {
    return a.surface >= b.surface && a.deep >= b.deep && (a.surface > b.surface || a.deep > b.deep);
}

constexpr bool weakly_dominates(const Objectives& a, const Objectives& b) noexcept {
    return a.surface >= b.surface && a.deep >= b.deep;
}

struct ArchiveEntry {
    Partition partition;
    Objectives objectives;
};

/// Set of mutually non-dominated partitions. Objective vectors are unique:
/// a candidate equal to an existing entry on both objectives is not added.
class ParetoArchive {
public:
    /// True if `candidate` is neither dominated by nor equal to an entry.
    bool accepts(const Objectives& candidate) const;

    /// Inserts when accepted, evicting every entry the candidate dominates.
    bool insert(Partition partition, const Objectives& objectives);

    std::span<const ArchiveEntry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Pairwise check of the non-domination invariant.
    bool is_consistent() const;

private:
    std::vector<ArchiveEntry> entries_;
};

/// Uniformly random teams of exactly team_size; the remainder become solos.
Partition random_partition(const Population& population, std::size_t team_size, Rng& rng);

/// Mean surface and deep score over the partition's teams (solos excluded).
Objectives objectives(const Partition& partition, const Population& population, const AttributeSchema& schema);

struct GaResult {
    ParetoArchive archive;
    Partition selected;
    Objectives selected_objectives;
    Partition initial;  // first random partition drawn; the improvement baseline
    Objectives initial_objectives;
    std::size_t evaluations = 0;
};

/// Two-objective member-swap search. Requires at least 8 participants.
GaResult ga_partition(const Population& population, const GaConfig& config, const AttributeSchema& schema,
                      std::size_t team_size = kMaxTeamSize);

/// Knee of the front: the entry farthest from the chord between the lowest- and
/// highest-surface entries. Fronts of one or two entries, and collinear fronts, fall
/// back to the highest surface + deep. Ties prefer higher surface, then lower
/// partition hash. Returns an index into `entries`.
std::size_t elbow_index(std::span<const ArchiveEntry> entries);
const Partition& elbow_select(std::span<const ArchiveEntry> entries);

struct BruteForceResult {
    std::size_t enumerated = 0;
    Objectives best_surface_value;
    Objectives best_deep_value;
    double best_total = 0.0;
    std::vector<Partition> best_surface;  // every partition attaining the max surface
    std::vector<Partition> best_deep;
    std::vector<Partition> best_total_partitions;
    std::vector<Objectives> all_objectives;  // one per enumerated partition
};

inline constexpr std::size_t kBruteForceLimit = 12;

/// Exhaustive search over all partitions into teams of team_size (remainder as
/// solos). Limited to 12 participants.
BruteForceResult brute_force_partition(const Population& population, const AttributeSchema& schema,
                                       std::size_t team_size = kMaxTeamSize);

}  // namespace teamform
