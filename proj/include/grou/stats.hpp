#pragma once

#include "grou/error.hpp"
#include "grou/linalg.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace grou::stats {

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>(), x); }

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

/// Two-sided standard normal critical value for a central interval of
/// probability `level`.
inline double two_sided_z(double level) {
    if (!(level >= 0.0 && level < 1.0)) {
        throw ContractViolation("confidence level must lie in [0, 1)");
    }
    return level == 0.0 ? 0.0 : normal_quantile(0.5 + 0.5 * level);
}

inline double chi2_cdf(double x, double dof) {
    if (x <= 0.0) {
        return 0.0;
    }
    return boost::math::cdf(boost::math::chi_squared_distribution<>(dof), x);
}

inline double chi2_sf(double x, double dof) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(dof), x));
}

inline double chi2_quantile(double p, double dof) {
    if (p <= 0.0) {
        return 0.0;
    }
    return boost::math::quantile(boost::math::chi_squared_distribution<>(dof), p);
}

/// Asymptotic Kolmogorov tail P(K > lambda).
inline double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) {
        return 1.0;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test, p-value from the asymptotic law with
/// the small-sample correction of Stephens (1970).
inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.empty()) {
        return {};
    }
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

/// Critical value of the two-sample KS statistic at level alpha
/// (asymptotic, c(alpha) * sqrt((n + m) / (n m))).
inline double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

/// Pearson goodness-of-fit of `x` to chi-square(dof) using `bins`
/// equiprobable cells; returns the p-value.
inline double chi2_goodness_of_fit(const std::vector<double>& x, double dof, int bins = 10) {
    if (x.empty()) {
        return 1.0;
    }
    std::vector<double> edges(static_cast<std::size_t>(bins - 1));
    for (int b = 1; b < bins; ++b) {
        edges[static_cast<std::size_t>(b - 1)] = chi2_quantile(static_cast<double>(b) / bins, dof);
    }
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : x) {
        const auto pos = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin();
        counts[static_cast<std::size_t>(pos)] += 1.0;
    }
    const double expected = static_cast<double>(x.size()) / bins;
    double stat = 0.0;
    for (double c : counts) {
        stat += (c - expected) * (c - expected) / expected;
    }
    return chi2_sf(stat, bins - 1);
}

inline double mean(std::span<const double> x) {
    if (x.empty()) {
        return 0.0;
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    if (x.size() < 2) {
        return 0.0;
    }
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

inline double median(std::vector<double> x) {
    if (x.empty()) {
        return 0.0;
    }
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

/// Sample covariance of the rows of `x` (replicates x coordinates),
/// optionally about a known centre.
inline Mat covariance_rows(const Mat& x, const Vec* centre = nullptr) {
    const Eigen::Index n = x.rows();
    if (n < 2) {
        return Mat::Zero(x.cols(), x.cols());
    }
    const Vec c = centre ? *centre : Vec(x.colwise().mean().transpose());
    const Mat centred = x.rowwise() - c.transpose();
    const double denom = centre ? static_cast<double>(n) : static_cast<double>(n - 1);
    return centred.transpose() * centred / denom;
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ContractViolation("least_squares: need at least two paired points");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw ContractViolation("least_squares: degenerate abscissae");
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

}  // namespace grou::stats
