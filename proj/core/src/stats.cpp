#include "teamform/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "teamform/error.hpp"
#include "teamform/random.hpp"

namespace teamform::stats {

double mean(std::span<const double> xs) {
    require(!xs.empty(), ErrorCategory::Domain, "mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double sd(std::span<const double> xs) { return std::sqrt(variance(xs)); }

Descriptives describe(std::span<const double> xs) { return {xs.size(), mean(xs), sd(xs)}; }

void GroupSamples::add(std::string label, std::vector<double> samples) {
    labels.push_back(std::move(label));
    values.push_back(std::move(samples));
}

void GroupSamples::validate() const {
    require(labels.size() == values.size(), ErrorCategory::InvalidInput, "group labels and samples differ");
    require(values.size() >= 2, ErrorCategory::InvalidInput, "need at least two groups");
    for (std::size_t g = 0; g < values.size(); ++g) {
        require(!values[g].empty(), ErrorCategory::InvalidInput, "group '" + labels[g] + "' is empty");
    }
}

namespace {

// Between-group sum of squares for values laid out group after group.
double between_ss(std::span<const double> pooled, std::span<const std::size_t> sizes, double grand_sum) {
    double acc = 0.0;
    std::size_t offset = 0;
    for (auto n : sizes) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += pooled[offset + i];
        acc += s * s / static_cast<double>(n);
        offset += n;
    }
    return acc - grand_sum * grand_sum / static_cast<double>(pooled.size());
}

// Relative slack so permutations that reproduce the observed statistic count as "at least as extreme".
bool at_least(double permuted, double observed, double scale) {
    return permuted >= observed - 1e-12 * std::max(1.0, scale);
}

}  // namespace

AnovaResult f_statistic(const GroupSamples& groups) {
    groups.validate();
    AnovaResult r;
    std::size_t n = 0;
    for (const auto& g : groups.values) n += g.size();
    r.df_between = groups.values.size() - 1;
    require(n > groups.values.size(), ErrorCategory::Domain, "ANOVA needs more observations than groups");
    r.df_within = n - groups.values.size();

    double grand = 0.0;
    for (const auto& g : groups.values) grand += std::accumulate(g.begin(), g.end(), 0.0);
    const double grand_mean = grand / static_cast<double>(n);
    double ssb = 0.0;
    double ssw = 0.0;
    for (const auto& g : groups.values) {
        const double m = mean(g);
        ssb += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
        for (double x : g) ssw += (x - m) * (x - m);
    }
    const double scale = std::max(ssb + ssw, std::numeric_limits<double>::min());
    if (ssb <= 1e-15 * scale) {
        r.f = 0.0;
    } else if (ssw <= 1e-15 * scale) {
        r.f = std::numeric_limits<double>::infinity();
    } else {
        r.f = (ssb / static_cast<double>(r.df_between)) / (ssw / static_cast<double>(r.df_within));
    }
    return r;
}

AnovaResult anova_f(const GroupSamples& groups, std::size_t permutations, std::uint64_t seed) {
    AnovaResult r = f_statistic(groups);
    require(permutations >= 1, ErrorCategory::InvalidInput, "need at least one permutation");

    std::vector<double> pooled;
    std::vector<std::size_t> sizes;
    for (const auto& g : groups.values) {
        pooled.insert(pooled.end(), g.begin(), g.end());
        sizes.push_back(g.size());
    }
    // Centering first keeps the sums of squares free of cancellation for data far from zero.
    const double grand_mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
    double total_ss = 0.0;
    for (double& x : pooled) {
        x -= grand_mean;
        total_ss += x * x;
    }
    const double grand = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    // F is increasing in the between-group sum of squares once the total is fixed,
    // so permutations are compared on that.
    const double observed = between_ss(pooled, sizes, grand);

    Rng rng(seed);
    std::size_t extreme = 0;
    for (std::size_t b = 0; b < permutations; ++b) {
        rng.shuffle(pooled.begin(), pooled.end());
        if (at_least(between_ss(pooled, sizes, grand), observed, total_ss)) ++extreme;
    }
    r.p = static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
    return r;
}

double permutation_mean_difference_p(std::span<const double> a, std::span<const double> b,
                                     std::size_t permutations, std::uint64_t seed) {
    require(!a.empty() && !b.empty(), ErrorCategory::InvalidInput, "permutation test needs two non-empty samples");
    require(permutations >= 1, ErrorCategory::InvalidInput, "need at least one permutation");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    auto delta_for = [&](std::span<const double> values) {
        const double sa = std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
        return (total - sa) / nb - sa / na;
    };
    const double observed = std::abs(delta_for(pooled));
    double scale = 0.0;
    for (double x : pooled) scale = std::max(scale, std::abs(x));

    Rng rng(seed);
    std::size_t extreme = 0;
    for (std::size_t k = 0; k < permutations; ++k) {
        rng.shuffle(pooled.begin(), pooled.end());
        if (at_least(std::abs(delta_for(pooled)), observed, scale)) ++extreme;
    }
    return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

double paired_permutation_p(std::span<const double> a, std::span<const double> b, std::size_t permutations,
                            std::uint64_t seed) {
    require(a.size() == b.size() && !a.empty(), ErrorCategory::InvalidInput, "paired test needs equal-length samples");
    require(permutations >= 1, ErrorCategory::InvalidInput, "need at least one permutation");
    std::vector<double> diff(a.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
        scale = std::max(scale, std::abs(diff[i]));
    }
    const double observed = std::abs(std::accumulate(diff.begin(), diff.end(), 0.0));
    Rng rng(seed);
    std::size_t extreme = 0;
    for (std::size_t k = 0; k < permutations; ++k) {
        double s = 0.0;
        for (double d : diff) s += (rng.next() & 1U) ? d : -d;
        if (at_least(std::abs(s), observed, scale)) ++extreme;
    }
    return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double candidate = p_values[order[k]] * (static_cast<double>(m) / static_cast<double>(k + 1));
        running = std::min(running, candidate);
        adjusted[order[k]] = std::min(1.0, running);
    }
    return adjusted;
}

std::vector<PairwiseComparison> pairwise_diffs(const GroupSamples& groups, std::size_t permutations,
                                               std::uint64_t seed) {
    groups.validate();
    std::vector<PairwiseComparison> out;
    std::vector<double> raw_p;
    std::uint64_t stream = 0;
    for (std::size_t i = 0; i < groups.values.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.values.size(); ++j) {
            PairwiseComparison c;
            c.first = groups.labels[i];
            c.second = groups.labels[j];
            c.delta = mean(groups.values[j]) - mean(groups.values[i]);
            c.p = permutation_mean_difference_p(groups.values[i], groups.values[j], permutations,
                                                derive_seed(seed, stream++));
            raw_p.push_back(c.p);
            out.push_back(std::move(c));
        }
    }
    const auto adjusted = benjamini_hochberg(raw_p);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].p_adjusted = adjusted[k];
    return out;
}

double regularized_gamma_q(double a, double x) {
    require(a > 0.0 && x >= 0.0, ErrorCategory::Domain, "regularized_gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    constexpr double eps = 1e-15;
    constexpr int max_iter = 1000;
    if (x < a + 1.0) {
        // Series for P(a, x).
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < max_iter; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
    }
    // Continued fraction for Q(a, x), modified Lentz.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi2_survival(double statistic, double df) {
    require(df > 0.0, ErrorCategory::Domain, "chi-squared needs df > 0");
    if (statistic <= 0.0) return 1.0;
    return regularized_gamma_q(df / 2.0, statistic / 2.0);
}

Chi2Result chi2_independence(const std::vector<std::vector<double>>& table) {
    require(table.size() >= 2, ErrorCategory::InvalidInput, "chi-squared needs at least two rows");
    const std::size_t cols = table.front().size();
    require(cols >= 2, ErrorCategory::InvalidInput, "chi-squared needs at least two columns");
    std::vector<double> row_sum(table.size(), 0.0);
    std::vector<double> col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        require(table[r].size() == cols, ErrorCategory::InvalidInput, "ragged contingency table");
        for (std::size_t c = 0; c < cols; ++c) {
            require(table[r][c] >= 0.0, ErrorCategory::InvalidInput, "negative count");
            row_sum[r] += table[r][c];
            col_sum[c] += table[r][c];
            total += table[r][c];
        }
    }
    for (double s : row_sum) require(s > 0.0, ErrorCategory::Domain, "zero row marginal");
    for (double s : col_sum) require(s > 0.0, ErrorCategory::Domain, "zero column marginal");

    Chi2Result out;
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / total;
            const double d = table[r][c] - expected;
            out.statistic += d * d / expected;
        }
    }
    out.df = (table.size() - 1) * (cols - 1);
    out.p = chi2_survival(out.statistic, static_cast<double>(out.df));
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCategory::InvalidInput, "spearman needs paired samples");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    require(sxx > 0.0 && syy > 0.0, ErrorCategory::Domain, "spearman undefined for a constant sample");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

Eigen::VectorXd fitted_probabilities(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = X * beta;
    return eta.unaryExpr([](double e) {
        return e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
    });
}

}  // namespace

LogisticFit logistic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcomes,
                         const LogisticOptions& options) {
    const auto n = design.rows();
    const auto p = design.cols();
    require(outcomes.size() == n, ErrorCategory::InvalidInput, "design and outcome lengths differ");
    require(p >= 1 && n > p, ErrorCategory::InvalidInput, "logistic fit needs more observations than coefficients");
    for (Eigen::Index j = 0; j < p; ++j) {
        require(design.col(j).cwiseAbs().maxCoeff() > 0.0, ErrorCategory::InvalidInput,
                "design column " + std::to_string(j) + " is constant zero");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        require(outcomes[i] == 0.0 || outcomes[i] == 1.0, ErrorCategory::InvalidInput, "outcomes must be 0 or 1");
    }

    LogisticFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd information(p, p);
    for (fit.iterations = 1; fit.iterations <= options.max_iterations; ++fit.iterations) {
        const Eigen::VectorXd mu = fitted_probabilities(design, beta);
        const Eigen::VectorXd weights = mu.array() * (1.0 - mu.array());
        information.noalias() = design.transpose() * weights.asDiagonal() * design;
        const Eigen::VectorXd score = design.transpose() * (outcomes - mu);
        Eigen::LDLT<Eigen::MatrixXd> solver(information);
        require(solver.info() == Eigen::Success, ErrorCategory::Numerical, "singular information matrix");
        // Newton step on the log-likelihood: the weighted least-squares solve of IRLS.
        const Eigen::VectorXd step = solver.solve(score);
        beta += step;
        if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > options.divergence_threshold) {
            fit.separation = true;
            break;
        }
        if (step.cwiseAbs().maxCoeff() < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    fit.iterations = std::min(fit.iterations, options.max_iterations);

    const Eigen::VectorXd mu = fitted_probabilities(design, beta);
    const Eigen::VectorXd weights = mu.array() * (1.0 - mu.array());
    information.noalias() = design.transpose() * weights.asDiagonal() * design;
    fit.gradient_norm = (design.transpose() * (outcomes - mu)).cwiseAbs().maxCoeff();
    if (fit.converged && fit.gradient_norm > 1e-6 * std::max<double>(1.0, static_cast<double>(n))) {
        fit.converged = false;
    }
    fit.coefficients = beta;
    const Eigen::MatrixXd covariance = information.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.standard_errors = covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = std::clamp(mu[i], 1e-300, 1.0 - 1e-16);
        ll += outcomes[i] == 1.0 ? std::log(m) : std::log1p(-m);
    }
    fit.log_likelihood = ll;
    return fit;
}

}  // namespace teamform::stats
