#include "teamform/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "teamform/error.hpp"

namespace teamform {

namespace {

constexpr std::array<std::string_view, kGenderCount> kGenderNames{"Male", "Female", "NonBinary"};
constexpr std::array<std::string_view, kRaceCount> kRaceNames{
    "White", "Asian", "AfricanAmerican", "AmericanIndian", "MultipleRaces", "Other"};
constexpr std::array<std::string_view, kSkillCount> kSkillNames{
    "campaigns", "coordination", "design", "recruiting", "writing", "presenting"};

template <typename Enum, std::size_t N>
Enum parse_named(std::string_view text, const std::array<std::string_view, N>& names, std::string_view what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    fail(ErrorCategory::InvalidInput, "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Gender g) noexcept { return kGenderNames[static_cast<std::size_t>(g)]; }
std::string_view to_string(Race r) noexcept { return kRaceNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(Skill s) noexcept { return kSkillNames[static_cast<std::size_t>(s)]; }

Gender parse_gender(std::string_view text) { return parse_named<Gender>(text, kGenderNames, "gender"); }
Race parse_race(std::string_view text) { return parse_named<Race>(text, kRaceNames, "race"); }
Skill parse_skill(std::string_view text) { return parse_named<Skill>(text, kSkillNames, "skill"); }

void validate(const Participant& p) {
    if (p.age < kMinAge) {
        fail(ErrorCategory::InvalidInput,
             "participant " + std::to_string(raw(p.id)) + ": age " + std::to_string(p.age) + " below 18");
    }
    for (int level : p.skills) {
        if (level < kMinSkill || level > kMaxSkill) {
            fail(ErrorCategory::InvalidInput, "participant " + std::to_string(raw(p.id)) + ": skill level " +
                                                  std::to_string(level) + " outside [1,5]");
        }
    }
    if (static_cast<std::size_t>(p.gender) >= kGenderCount || static_cast<std::size_t>(p.race) >= kRaceCount) {
        fail(ErrorCategory::InvalidInput, "participant " + std::to_string(raw(p.id)) + ": bad category");
    }
}

Population::Population(std::vector<Participant> members) : members_(std::move(members)) {
    index_.reserve(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        validate(members_[i]);
        auto [it, inserted] = index_.emplace(raw(members_[i].id), i);
        if (!inserted) {
            fail(ErrorCategory::InvalidInput, "duplicate participant id " + std::to_string(raw(members_[i].id)));
        }
    }
}

const Participant* Population::find(ParticipantId id) const noexcept {
    auto it = index_.find(raw(id));
    return it == index_.end() ? nullptr : &members_[it->second];
}

const Participant& Population::at(ParticipantId id) const {
    const auto* p = find(id);
    if (p == nullptr) fail(ErrorCategory::InvalidInput, "unknown participant id " + std::to_string(raw(id)));
    return *p;
}

std::size_t Population::index_of(ParticipantId id) const {
    auto it = index_.find(raw(id));
    if (it == index_.end()) fail(ErrorCategory::InvalidInput, "unknown participant id " + std::to_string(raw(id)));
    return it->second;
}

std::vector<ParticipantId> Population::ids() const {
    std::vector<ParticipantId> out;
    out.reserve(members_.size());
    for (const auto& p : members_) out.push_back(p.id);
    return out;
}

Partition canonical(Partition p) {
    for (auto& team : p.teams) std::sort(team.members.begin(), team.members.end());
    std::sort(p.teams.begin(), p.teams.end());
    std::sort(p.solos.begin(), p.solos.end());
    return p;
}

std::uint64_t partition_hash(const Partition& partition) {
    const Partition p = canonical(partition);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint32_t v) {
        for (int byte = 0; byte < 4; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& team : p.teams) {
        for (auto id : team.members) mix(raw(id));
        mix(0xffffffffU);  // team separator
    }
    mix(0xfffffffeU);
    for (auto id : p.solos) mix(raw(id));
    return h;
}

std::optional<std::string> partition_violation(const Partition& p, const Population& population,
                                               std::size_t max_team_size) {
    std::unordered_set<ParticipantId> seen;
    auto visit = [&](ParticipantId id) -> std::optional<std::string> {
        if (!population.contains(id)) return "unknown participant " + std::to_string(raw(id));
        if (!seen.insert(id).second) return "participant " + std::to_string(raw(id)) + " placed twice";
        return std::nullopt;
    };
    for (std::size_t t = 0; t < p.teams.size(); ++t) {
        const auto& team = p.teams[t];
        if (team.members.empty() || team.members.size() > max_team_size) {
            return "team " + std::to_string(t) + " has size " + std::to_string(team.members.size());
        }
        for (auto id : team.members) {
            if (auto v = visit(id)) return v;
        }
    }
    for (auto id : p.solos) {
        if (auto v = visit(id)) return v;
    }
    if (seen.size() != population.size()) {
        return "partition covers " + std::to_string(seen.size()) + " of " + std::to_string(population.size()) +
               " participants";
    }
    return std::nullopt;
}

void validate_partition(const Partition& p, const Population& population, std::size_t max_team_size) {
    if (auto v = partition_violation(p, population, max_team_size)) {
        fail(ErrorCategory::InvalidInput, "invalid partition: " + *v);
    }
}

}  // namespace teamform
