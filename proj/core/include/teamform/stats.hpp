#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace teamform::stats {

double mean(std::span<const double> xs);
/// Sample variance (divisor n - 1); 0 for a single value.
double variance(std::span<const double> xs);
double sd(std::span<const double> xs);

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

Descriptives describe(std::span<const double> xs);

/// Labelled samples, one per condition.
struct GroupSamples {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;

    void add(std::string label, std::vector<double> samples);
    /// At least two groups, each non-empty.
    void validate() const;
};

struct AnovaResult {
    double f = 0.0;  // +inf when the within-group variance is zero but group means differ
    double p = 1.0;  // (1 + #{permuted F >= observed}) / (1 + permutations)
    std::size_t df_between = 0;
    std::size_t df_within = 0;
};

/// Classical one-way F statistic (no permutation).
AnovaResult f_statistic(const GroupSamples& groups);

/// One-way ANOVA with a label-permutation p-value.
AnovaResult anova_f(const GroupSamples& groups, std::size_t permutations, std::uint64_t seed);

/// Two-sided permutation p for mean(b) - mean(a).
double permutation_mean_difference_p(std::span<const double> a, std::span<const double> b,
                                     std::size_t permutations, std::uint64_t seed);

/// Two-sided sign-flip permutation p for mean(a - b) on paired samples.
double paired_permutation_p(std::span<const double> a, std::span<const double> b, std::size_t permutations,
                            std::uint64_t seed);

/// Step-up Benjamini-Hochberg adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

struct PairwiseComparison {
    std::string first;
    std::string second;
    double delta = 0.0;  // mean(second) - mean(first)
    double p = 1.0;
    double p_adjusted = 1.0;
};

/// Every unordered pair (i < j in label order); BH across the family.
std::vector<PairwiseComparison> pairwise_diffs(const GroupSamples& groups, std::size_t permutations,
                                               std::uint64_t seed);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);
double chi2_survival(double statistic, double df);

struct Chi2Result {
    double statistic = 0.0;
    std::size_t df = 0;
    double p = 1.0;
};

/// Pearson test of independence on an r x c table of counts.
Chi2Result chi2_independence(const std::vector<std::vector<double>>& table);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

struct LogisticOptions {
    double tolerance = 1e-8;  // on max |coefficient change|
    std::size_t max_iterations = 100;
    double divergence_threshold = 30.0;  // |coefficient| beyond this is treated as separation
};

struct LogisticFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    bool converged = false;
    bool separation = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;  // max |score| at the returned coefficients
    double log_likelihood = 0.0;
};

/// Maximum-likelihood logistic regression by iteratively reweighted least squares.
/// `design` must already contain any intercept column. Separation is reported
/// through `separation` with `converged == false`.
LogisticFit logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcomes,
                         const LogisticOptions& options = {});

}  // namespace teamform::stats
