#include "teamform/diversity.hpp"

#include <cmath>
#include <numeric>

namespace teamform {

void AttributeSchema::validate() const {
    auto check_k = [](int k, const char* name) {
        require(k >= 2, ErrorCategory::Config, std::string("attribute schema: ") + name + " needs k >= 2");
    };
    check_k(gender_categories, "gender");
    check_k(race_categories, "race");
    check_k(ethnicity_categories, "ethnicity");
    check_k(international_categories, "internationality");
    require(max_age > min_age, ErrorCategory::Config, "attribute schema: empty age range");
    require(cv_cap > 0.0, ErrorCategory::Config, "attribute schema: cv_cap must be positive");
}

double coefficient_of_variation(std::span<const double> values) {
    require(!values.empty(), ErrorCategory::Domain, "empty group");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    require(mean != 0.0, ErrorCategory::Domain, "undefined CV");
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n) / std::abs(mean);
}

double normalize_cv(double cv, const AttributeSchema& schema) {
    switch (schema.cv_normalization) {
    case CvNormalization::Bounded: return cv / (cv + 1.0);
    case CvNormalization::Capped: return std::min(cv / schema.cv_cap, 1.0);
    }
    return cv / (cv + 1.0);
}

std::array<double, kDiversityComponents> DiversityProfile::components() const {
    std::array<double, kDiversityComponents> out{gender_blau, race_blau, ethnicity_blau, international_blau,
                                                 age_score};
    std::copy(skill_scores.begin(), skill_scores.end(), out.begin() + 5);
    return out;
}

double DiversityProfile::mean_component() const {
    const auto c = components();
    return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

namespace {

template <std::size_t K>
double normalized_blau_from_counts(const std::array<int, K>& counts, double n, int k) {
    double concentration = 0.0;
    for (int c : counts) {
        const double share = c / n;
        concentration += share * share;
    }
    const double max = 1.0 - 1.0 / static_cast<double>(k);
    return std::min(1.0, (1.0 - concentration) / max);
}

// Same formula as coefficient_of_variation, over a strided member attribute.
template <typename Get>
double cv_of(std::span<const Participant* const> members, Get get) {
    const double n = static_cast<double>(members.size());
    double sum = 0.0;
    for (const auto* m : members) sum += get(*m);
    const double mean = sum / n;
    require(mean != 0.0, ErrorCategory::Domain, "undefined CV");
    double ss = 0.0;
    for (const auto* m : members) {
        const double d = get(*m) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / n) / std::abs(mean);
}

}  // namespace

DiversityProfile diversity_profile(std::span<const Participant* const> members, const AttributeSchema& schema) {
    require(!members.empty(), ErrorCategory::Domain, "empty group");
    const double n = static_cast<double>(members.size());

    std::array<int, kGenderCount> genders{};
    std::array<int, kRaceCount> races{};
    std::array<int, 2> hispanic{};
    std::array<int, 2> international{};
    for (const auto* m : members) {
        ++genders[static_cast<std::size_t>(m->gender)];
        ++races[static_cast<std::size_t>(m->race)];
        ++hispanic[m->hispanic ? 1 : 0];
        ++international[m->international ? 1 : 0];
    }

    DiversityProfile out;
    out.gender_blau = normalized_blau_from_counts(genders, n, schema.gender_categories);
    out.race_blau = normalized_blau_from_counts(races, n, schema.race_categories);
    out.ethnicity_blau = normalized_blau_from_counts(hispanic, n, schema.ethnicity_categories);
    out.international_blau = normalized_blau_from_counts(international, n, schema.international_categories);
    out.age_cv = cv_of(members, [](const Participant& p) { return static_cast<double>(p.age); });
    out.age_score = normalize_cv(out.age_cv, schema);

    double deep_sum = 0.0;
    for (std::size_t s = 0; s < kSkillCount; ++s) {
        out.skill_cvs[s] = cv_of(members, [s](const Participant& p) { return static_cast<double>(p.skills[s]); });
        out.skill_scores[s] = normalize_cv(out.skill_cvs[s], schema);
        deep_sum += out.skill_scores[s];
    }

    out.surface_score =
        out.gender_blau + out.race_blau + out.ethnicity_blau + out.international_blau + out.age_score;
    out.deep_score = deep_sum / static_cast<double>(kSkillCount);
    out.total_score = out.surface_score + out.deep_score;
    return out;
}

DiversityProfile team_diversity_profile(const Team& team, const Population& population,
                                        const AttributeSchema& schema) {
    std::vector<const Participant*> members;
    members.reserve(team.members.size());
    for (auto id : team.members) members.push_back(&population.at(id));
    return diversity_profile(members, schema);
}

}  // namespace teamform
