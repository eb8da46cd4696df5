#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <vector>

#include "teamform/error.hpp"
#include "teamform/types.hpp"

namespace teamform {

/// How a raw coefficient of variation is mapped into [0,1].
enum class CvNormalization {
    Bounded,  // cv / (cv + 1)
    Capped,   // min(cv / cap, 1)
};

/// Category counts and ranges used to normalize the diversity metrics.
struct AttributeSchema {
    int gender_categories = static_cast<int>(kGenderCount);
    int race_categories = static_cast<int>(kRaceCount);
    int ethnicity_categories = 2;
    int international_categories = 2;
    int min_age = 18;
    int max_age = 80;
    CvNormalization cv_normalization = CvNormalization::Bounded;
    double cv_cap = 1.0;

    double age_range() const noexcept { return static_cast<double>(max_age - min_age); }
    void validate() const;
};

/// 1 - sum of squared category shares. Throws Domain on an empty list.
template <typename Label>
double blau(std::span<const Label> labels) {
    require(!labels.empty(), ErrorCategory::Domain, "empty group");
    std::vector<Label> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double concentration = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double share = static_cast<double>(j - i) / n;
        concentration += share * share;
        i = j;
    }
    return 1.0 - concentration;
}

template <typename Label>
double blau(const std::vector<Label>& labels) {
    return blau(std::span<const Label>(labels));
}

/// Blau divided by its theoretical maximum 1 - 1/k.
template <typename Label>
double normalized_blau(std::span<const Label> labels, int k) {
    require(k >= 2, ErrorCategory::Domain, "normalized_blau: category count must be at least 2");
    const double max = 1.0 - 1.0 / static_cast<double>(k);
    return std::min(1.0, blau(labels) / max);
}

template <typename Label>
double normalized_blau(const std::vector<Label>& labels, int k) {
    return normalized_blau(std::span<const Label>(labels), k);
}

/// Population standard deviation (divisor n) over the mean.
double coefficient_of_variation(std::span<const double> values);

/// Maps a CV into [0,1] according to the schema.
double normalize_cv(double cv, const AttributeSchema& schema);

inline constexpr std::size_t kDiversityComponents = 5 + kSkillCount;

struct DiversityProfile {
    // Normalized Blau scores.
    double gender_blau = 0.0;
    double race_blau = 0.0;
    double ethnicity_blau = 0.0;
    double international_blau = 0.0;
    // Raw coefficients of variation.
    double age_cv = 0.0;
    std::array<double, kSkillCount> skill_cvs{};
    // Normalized coefficients of variation.
    double age_score = 0.0;
    std::array<double, kSkillCount> skill_scores{};

    double surface_score = 0.0;  // four Blau scores + age_score, in [0,5]
    double deep_score = 0.0;     // mean of skill_scores, in [0,1)
    double total_score = 0.0;    // surface + deep

    /// The eleven normalized components: gender, race, ethnicity,
    /// internationality, age, then the six skills.
    std::array<double, kDiversityComponents> components() const;
    double mean_component() const;
};

DiversityProfile diversity_profile(std::span<const Participant* const> members, const AttributeSchema& schema);
DiversityProfile team_diversity_profile(const Team& team, const Population& population,
                                        const AttributeSchema& schema);

}  // namespace teamform
