#pragma once

// Monte Carlo and brute-force checks of sub-Gaussian tails and moment
// bounds for weighted sums X = sum_n c_n l_n of i.i.d. centred variables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwave/errors.hpp"
#include "rwave/parallel.hpp"
#include "rwave/randomization.hpp"

namespace rwave {

class CoefficientVector {
public:
    CoefficientVector() = default;
    CoefficientVector(std::vector<double> c) : c_(std::move(c)) {  // NOLINT: implicit from vector is handy
        for (double x : c_)
            if (!std::isfinite(x)) throw DomainError("non-finite coefficient");
        norm_sq_ = std::inner_product(c_.begin(), c_.end(), c_.begin(), 0.0);
    }
    std::span<const double> values() const { return c_; }
    std::size_t size() const { return c_.size(); }
    double operator[](std::size_t i) const { return c_[i]; }
    double norm_sq() const { return norm_sq_; }
    double norm() const { return std::sqrt(norm_sq_); }

private:
    std::vector<double> c_;
    double norm_sq_ = 0.0;
};

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for k successes out of n at z standard deviations.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.96) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn;
    const double z2 = z * z, denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    // The endpoints are exact at k = 0 and k = n; pin them against rounding.
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

// One draw of X per trial; trial t uses the stream keyed by (seed, t).
inline std::vector<double> sample_sums(const CoefficientVector& c, const RandomFamily& fam, std::size_t trials,
                                       std::uint64_t seed, int threads = 1) {
    std::vector<double> x(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        auto rng = trial_stream(seed, t);
        double acc = 0.0;
        for (std::size_t n = 0; n < c.size(); ++n) acc += c[n] * fam.sample(rng);
        x[t] = acc;
    });
    return x;
}

struct TailEstimate {
    double lambda = 0.0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    Interval ci;
};

inline TailEstimate tail_from_samples(std::span<const double> x, double lambda, double z = 1.96) {
    TailEstimate e{lambda, x.size(), 0, 0.0, {}};
    for (double v : x)
        if (std::abs(v) > lambda) ++e.hits;
    e.p_hat = x.empty() ? 0.0 : static_cast<double>(e.hits) / static_cast<double>(x.size());
    e.ci = wilson_interval(e.hits, x.size(), z);
    return e;
}

// p(|sum c_n l_n| > lambda) by Monte Carlo.
inline TailEstimate tail_probability_mc(const CoefficientVector& c, const RandomFamily& fam, double lambda,
                                        std::size_t trials, std::uint64_t seed, int threads = 1,
                                        double z = 1.96) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    if (trials < 1) throw DomainError("trials must be >= 1");
    return tail_from_samples(sample_sums(c, fam, trials, seed, threads), lambda, z);
}

namespace detail {

inline constexpr std::size_t enumeration_limit = std::size_t{1} << 20;

// Calls fn(value, probability) for every outcome of sum c_n l_n.
template <class Fn>
void enumerate_outcomes(const CoefficientVector& c, const RandomFamily& fam, Fn&& fn) {
    const auto atoms = fam.atoms();
    const std::size_t a = atoms.size();
    double count = std::pow(static_cast<double>(a), static_cast<double>(c.size()));
    if (count > static_cast<double>(enumeration_limit))
        throw Unsupported("exact enumeration needs " + std::to_string(static_cast<long long>(count)) +
                          " outcomes, limit is 2^20");
    std::vector<std::size_t> digit(c.size(), 0);
    while (true) {
        double v = 0.0, p = 1.0;
        for (std::size_t n = 0; n < c.size(); ++n) {
            v += c[n] * atoms[digit[n]].first;
            p *= atoms[digit[n]].second;
        }
        fn(v, p);
        std::size_t n = 0;
        for (; n < c.size(); ++n) {
            if (++digit[n] < a) break;
            digit[n] = 0;
        }
        if (n == c.size()) break;
    }
}

} // namespace detail

// Exact p(|X| > lambda) for finite-support families.
inline double tail_probability_exact(const CoefficientVector& c, const RandomFamily& fam, double lambda) {
    double p = 0.0;
    detail::enumerate_outcomes(c, fam, [&](double v, double w) {
        if (std::abs(v) > lambda) p += w;
    });
    return p;
}

// Default grid: 8 geometric points between 0.5 ||c|| and 4 ||c||.
inline std::vector<double> default_lambda_grid(const CoefficientVector& c, int points = 8) {
    std::vector<double> g(static_cast<std::size_t>(points));
    const double lo = 0.5 * c.norm(), hi = 4.0 * c.norm();
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, points == 1 ? 0.0 : double(i) / (points - 1));
    return g;
}

struct TailRow {
    TailEstimate est;
    double bound_value = 0.0;  // 2 exp(-alpha lambda^2 / ||c||^2)
};

inline std::vector<TailRow> tail_table(const CoefficientVector& c, const RandomFamily& fam,
                                       std::span<const double> lambda_grid, std::size_t trials, std::uint64_t seed,
                                       double alpha, int threads = 1) {
    const auto x = sample_sums(c, fam, trials, seed, threads);
    std::vector<TailRow> rows;
    for (double l : lambda_grid)
        rows.push_back({tail_from_samples(x, l), 2.0 * std::exp(-alpha * l * l / c.norm_sq())});
    return rows;
}

struct AlphaFit {
    // Largest alpha with p_hat(lambda) <= 2 exp(-alpha lambda^2/||c||^2) at every
    // grid point with p_hat > 0, and the lambda where it binds.
    double alpha_grid = std::numeric_limits<double>::infinity();
    double binding_lambda = 0.0;
    bool lower_bound_only = false;  // every p_hat was zero
    // 1/(4 c_hat), c_hat = max over gamma of log(mean e^{gamma X/||c||}) / gamma^2.
    double alpha_chernoff = 0.0;
    double c_hat = 0.0;
    // -slope of log p_hat against lambda^2/||c||^2, fitted with a log(lambda) term.
    double alpha_regression = std::numeric_limits<double>::quiet_NaN();
    std::vector<TailEstimate> table;
};

namespace detail {

inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(rows.size()), k = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd Y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index j = 0; j < k; ++j) X(r, j) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        Y(r) = y[static_cast<std::size_t>(r)];
    }
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
    return {b.data(), b.data() + b.size()};
}

} // namespace detail

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return {std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    f.intercept = my - f.slope * mx;
    f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

inline AlphaFit khinchin_alpha_fit(const CoefficientVector& c, const RandomFamily& fam,
                                   std::span<const double> lambda_grid, std::size_t trials, std::uint64_t seed,
                                   int threads = 1) {
    if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
    for (double l : lambda_grid)
        if (!(l > 0.0)) throw DomainError("lambda grid must be positive");
    const auto x = sample_sums(c, fam, trials, seed, threads);
    AlphaFit fit;
    std::vector<std::vector<double>> design;
    std::vector<double> logs;
    for (double l : lambda_grid) {
        const auto e = tail_from_samples(x, l);
        fit.table.push_back(e);
        if (e.hits == 0) continue;
        const double r = l * l / c.norm_sq();
        const double a = std::log(2.0 / e.p_hat) / r;
        if (a < fit.alpha_grid) fit.alpha_grid = a, fit.binding_lambda = l;
        design.push_back({1.0, r, std::log(l / c.norm())});
        logs.push_back(std::log(e.p_hat));
    }
    if (design.empty()) {
        fit.lower_bound_only = true;
        double lmax = *std::max_element(lambda_grid.begin(), lambda_grid.end());
        fit.alpha_grid = std::log(2.0 * static_cast<double>(trials)) * c.norm_sq() / (lmax * lmax);
        fit.binding_lambda = lmax;
    }
    if (design.size() >= 4) fit.alpha_regression = -detail::least_squares(design, logs)[1];

    // Chernoff side: empirical exponential-moment constant of X / ||c||.
    double c_hat = 0.0;
    const double nrm = c.norm();
    for (int i = 1; i <= 8; ++i) {
        const double g = 0.25 * i;
        long double m = 0.0;
        for (double v : x) m += std::exp(static_cast<long double>(g * v / nrm));
        const double lg = static_cast<double>(std::log(m / static_cast<long double>(x.size())));
        c_hat = std::max(c_hat, lg / (g * g));
    }
    fit.c_hat = c_hat;
    fit.alpha_chernoff = c_hat > 0.0 ? 1.0 / (4.0 * c_hat) : std::numeric_limits<double>::infinity();
    return fit;
}

enum class MomentMode { exact, monte_carlo };

struct LpMomentResult {
    double p = 0.0;
    double moment = 0.0;         // E|X|^p
    double moment_se = 0.0;      // zero in exact mode
    double lp_norm = 0.0;        // moment^{1/p}
    double ratio = 0.0;          // lp_norm / (sqrt(p) ||c||)
    bool exact = false;
};

namespace detail {

// E|N(0, v)|^p.
inline double gaussian_abs_moment(double variance, double p) {
    return std::pow(variance, 0.5 * p) * std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1)) /
           std::sqrt(std::numbers::pi);
}

} // namespace detail

// ||sum c_n l_n||_{L^p(Omega)}. Exact mode enumerates finite-support families
// (up to 2^20 outcomes) and uses the closed form for Gaussians.
inline LpMomentResult lp_moment_check(const CoefficientVector& c, const RandomFamily& fam, double p,
                                      MomentMode mode, std::size_t trials = 0, std::uint64_t seed = 0,
                                      int threads = 1) {
    if (!(p >= 2.0)) throw DomainError("lp_moment_check: p must be >= 2");
    LpMomentResult r;
    r.p = p;
    if (mode == MomentMode::exact) {
        r.exact = true;
        if (fam.kind == FamilyKind::gaussian) {
            r.moment = detail::gaussian_abs_moment(fam.variance * c.norm_sq(), p);
        } else if (fam.finite_support()) {
            double m = 0.0;
            detail::enumerate_outcomes(c, fam, [&](double v, double w) { m += w * std::pow(std::abs(v), p); });
            r.moment = m;
        } else {
            throw Unsupported("exact moments need a finite-support or gaussian family");
        }
    } else {
        if (trials < 2) throw DomainError("monte carlo mode needs trials >= 2");
        const auto x = sample_sums(c, fam, trials, seed, threads);
        double m = 0.0, m2 = 0.0;
        for (double v : x) {
            const double a = std::pow(std::abs(v), p);
            m += a;
            m2 += a * a;
        }
        const double n = static_cast<double>(trials);
        m /= n;
        r.moment = m;
        r.moment_se = std::sqrt(std::max(0.0, m2 / n - m * m) / (n - 1));
    }
    r.lp_norm = std::pow(r.moment, 1.0 / p);
    r.ratio = c.norm() > 0.0 ? r.lp_norm / (std::sqrt(p) * c.norm()) : 0.0;
    return r;
}

// Sum over set partitions of {1..2k} with no singleton block of
// prod_B E|h|^{|B|}; bounds E|sum c_n h_n|^{2k} / (sum c_n^2)^k.
inline double pairing_bound(const RandomFamily& fam, int k) {
    const int n = 2 * k;
    std::vector<double> m(static_cast<std::size_t>(n + 1));
    for (int j = 2; j <= n; ++j) m[static_cast<std::size_t>(j)] = fam.moment(j);
    std::vector<double> P(static_cast<std::size_t>(n + 1), 0.0);
    P[0] = 1.0;
    for (int t = 1; t <= n; ++t) {
        double acc = 0.0;
        double binom = 1.0;  // C(t-1, j-1)
        for (int j = 2; j <= t; ++j) {
            binom = binom * (t - j + 1) / (j - 1);
            acc += binom * m[static_cast<std::size_t>(j)] * P[static_cast<std::size_t>(t - j)];
        }
        P[static_cast<std::size_t>(t)] = acc;
    }
    return P[static_cast<std::size_t>(n)];
}

struct Moment2kResult {
    int k = 0;
    double moment = 0.0;
    double moment_se = 0.0;
    double ratio = 0.0;            // E X^{2k} / (sum c^2)^k
    double ratio_se = 0.0;
    double combinatorial_bound = 0.0;
    bool within_bound = false;
};

inline Moment2kResult moment_2k_bound_check(const RandomFamily& fam, const CoefficientVector& c, int k,
                                            MomentMode mode, std::size_t trials = 0, std::uint64_t seed = 0,
                                            int threads = 1) {
    if (k < 1) throw DomainError("k must be >= 1");
    const auto r = lp_moment_check(c, fam, 2.0 * k, mode, trials, seed, threads);
    Moment2kResult out;
    out.k = k;
    out.moment = r.moment;
    out.moment_se = r.moment_se;
    const double scale = std::pow(c.norm_sq(), k);
    out.ratio = r.moment / scale;
    out.ratio_se = r.moment_se / scale;
    out.combinatorial_bound = pairing_bound(fam, k);
    out.within_bound = out.ratio <= out.combinatorial_bound * (1.0 + 1e-12) + 3.0 * out.ratio_se;
    return out;
}

} // namespace rwave
