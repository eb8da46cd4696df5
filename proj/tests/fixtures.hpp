#pragma once

#include <vector>

#include "teamform/random.hpp"
#include "teamform/types.hpp"

namespace teamform::testing {

inline Participant person(std::uint32_t id, Gender g, Race r, bool hispanic, bool intl, int age,
                          std::array<int, kSkillCount> skills = {3, 3, 3, 3, 3, 3}) {
    Participant p;
    p.id = participant_id(id);
    p.gender = g;
    p.race = r;
    p.hispanic = hispanic;
    p.international = intl;
    p.age = age;
    p.skills = skills;
    return p;
}

// Uniform over every category, so small populations are usually mixed.
inline Population mixed_population(std::size_t n, Rng& rng) {
    std::vector<Participant> people;
    for (std::size_t i = 0; i < n; ++i) {
        Participant p;
        p.id = participant_id(static_cast<std::uint32_t>(i + 1));
        p.gender = static_cast<Gender>(rng.below(kGenderCount));
        p.race = static_cast<Race>(rng.below(kRaceCount));
        p.hispanic = rng.bernoulli(0.3);
        p.international = rng.bernoulli(0.3);
        p.age = rng.uniform_int(18, 65);
        for (auto& s : p.skills) s = rng.uniform_int(1, 5);
        people.push_back(p);
    }
    return Population(std::move(people));
}

inline Population clones(std::size_t n) {
    std::vector<Participant> people;
    for (std::size_t i = 0; i < n; ++i) {
        people.push_back(person(static_cast<std::uint32_t>(i + 1), Gender::Female, Race::White, false, false, 30));
    }
    return Population(std::move(people));
}

}  // namespace teamform::testing
