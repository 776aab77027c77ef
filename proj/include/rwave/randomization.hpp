#pragma once

// Random coefficient families, the randomization f -> f^omega, moment
// certification, and the finite-truncation no-regularization experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwave/errors.hpp"
#include "rwave/parallel.hpp"
#include "rwave/rng.hpp"
#include "rwave/spectral_basis.hpp"
#include "rwave/state.hpp"

namespace rwave {

enum class FamilyKind { gaussian, bernoulli, uniform_pm, custom_table };

inline std::string_view to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::bernoulli: return "bernoulli";
    case FamilyKind::uniform_pm: return "uniform_pm";
    case FamilyKind::custom_table: return "custom_table";
    }
    return "?";
}

inline FamilyKind parse_family_kind(std::string_view s) {
    if (s == "gaussian") return FamilyKind::gaussian;
    if (s == "bernoulli") return FamilyKind::bernoulli;
    if (s == "uniform_pm" || s == "uniform") return FamilyKind::uniform_pm;
    if (s == "custom_table" || s == "custom") return FamilyKind::custom_table;
    throw DomainError("unknown family kind '" + std::string(s) + "'");
}

struct CertifiedFlags {
    bool has_4th_moment = false;
    bool has_6th_moment = false;
    bool has_exp_moment = false;
};

// Law of the i.i.d. coefficients h_n, l_n.
//   gaussian      N(0, variance)
//   bernoulli     +-1 with probability 1/2
//   uniform_pm    uniform on [-half_width, half_width]
//   custom_table  finite support with given probabilities
struct RandomFamily {
    FamilyKind kind = FamilyKind::gaussian;
    double variance = 1.0;
    double half_width = std::sqrt(3.0);
    std::vector<double> support;
    std::vector<double> probabilities;
    CertifiedFlags certified;

    static RandomFamily gaussian(double variance = 1.0) {
        RandomFamily f;
        f.kind = FamilyKind::gaussian;
        f.variance = variance;
        f.validate();
        return f;
    }
    static RandomFamily bernoulli() {
        RandomFamily f;
        f.kind = FamilyKind::bernoulli;
        return f;
    }
    static RandomFamily uniform_pm(double half_width = std::sqrt(3.0)) {
        RandomFamily f;
        f.kind = FamilyKind::uniform_pm;
        f.half_width = half_width;
        f.validate();
        return f;
    }
    static RandomFamily custom(std::vector<double> support, std::vector<double> probabilities) {
        RandomFamily f;
        f.kind = FamilyKind::custom_table;
        f.support = std::move(support);
        f.probabilities = std::move(probabilities);
        f.validate();
        return f;
    }

    void validate() const {
        switch (kind) {
        case FamilyKind::gaussian:
            if (!(variance > 0.0)) throw DomainError("gaussian variance must be positive");
            break;
        case FamilyKind::uniform_pm:
            if (!(half_width > 0.0)) throw DomainError("uniform half width must be positive");
            break;
        case FamilyKind::bernoulli: break;
        case FamilyKind::custom_table: {
            if (support.empty() || support.size() != probabilities.size())
                throw DomainError("custom table needs matching support and probabilities");
            double mass = 0.0, mean = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                if (!(probabilities[i] >= 0.0)) throw DomainError("negative probability in custom table");
                mass += probabilities[i];
                if (std::isfinite(support[i])) mean += probabilities[i] * support[i];
            }
            if (std::abs(mass - 1.0) > 1e-12) throw DomainError("custom table probabilities must sum to 1");
            if (std::abs(mean) > 1e-12) throw DomainError("custom table must have mean zero");
            break;
        }
        }
    }

    bool finite_support() const {
        if (kind == FamilyKind::bernoulli) return true;
        if (kind != FamilyKind::custom_table) return false;
        return std::all_of(support.begin(), support.end(), [](double x) { return std::isfinite(x); });
    }

    // Atoms with probabilities; only for finite-support families.
    std::vector<std::pair<double, double>> atoms() const {
        if (kind == FamilyKind::bernoulli) return {{-1.0, 0.5}, {1.0, 0.5}};
        if (!finite_support()) throw Unsupported(std::string(to_string(kind)) + " has no finite support");
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < support.size(); ++i)
            if (probabilities[i] > 0.0) out.emplace_back(support[i], probabilities[i]);
        return out;
    }

    double second_moment() const { return moment(2); }

    // E|X|^k, in closed form for every kind.
    double moment(int k) const {
        switch (kind) {
        case FamilyKind::gaussian: {
            // E|g|^k = sigma^k 2^{k/2} Gamma((k+1)/2) / sqrt(pi)
            const double sigma = std::sqrt(variance);
            return std::pow(sigma, k) * std::pow(2.0, 0.5 * k) * std::tgamma(0.5 * (k + 1)) /
                   std::sqrt(std::numbers::pi);
        }
        case FamilyKind::bernoulli: return 1.0;
        case FamilyKind::uniform_pm: return std::pow(half_width, k) / (k + 1);
        case FamilyKind::custom_table: {
            double m = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i)
                m += probabilities[i] * std::pow(std::abs(support[i]), k);
            return m;
        }
        }
        return 0.0;
    }

    // E exp(gamma X).
    double mgf(double gamma) const {
        switch (kind) {
        case FamilyKind::gaussian: return std::exp(0.5 * variance * gamma * gamma);
        case FamilyKind::bernoulli: return std::cosh(gamma);
        case FamilyKind::uniform_pm: {
            const double z = gamma * half_width;
            return std::abs(z) < 1e-8 ? 1.0 + z * z / 6.0 : std::sinh(z) / z;
        }
        case FamilyKind::custom_table: {
            if (!finite_support()) throw Unsupported("custom table with unbounded support has no MGF");
            double m = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) m += probabilities[i] * std::exp(gamma * support[i]);
            return m;
        }
        }
        return 0.0;
    }

    double sample(CounterStream& rng) const {
        switch (kind) {
        case FamilyKind::gaussian: return std::sqrt(variance) * rng.normal();
        case FamilyKind::bernoulli: return (rng() >> 63) != 0 ? 1.0 : -1.0;
        case FamilyKind::uniform_pm: return half_width * (2.0 * rng.uniform() - 1.0);
        case FamilyKind::custom_table: {
            const double u = rng.uniform();
            double acc = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                acc += probabilities[i];
                if (u < acc) return support[i];
            }
            return support.back();
        }
        }
        return 0.0;
    }
};

struct MomentReport {
    int order = 0;
    double value = 0.0;
    double bound = 0.0;
    bool passed = false;
};

// E|X|^k against `bound` (default: finiteness only).
inline MomentReport moment_check(const RandomFamily& fam, int k,
                                 double bound = std::numeric_limits<double>::infinity()) {
    if (k < 2 || k % 2 != 0) throw DomainError("moment order must be an even integer >= 2");
    if (fam.kind == FamilyKind::custom_table && !fam.finite_support())
        return {k, std::numeric_limits<double>::infinity(), bound, false};
    const double v = fam.moment(k);
    return {k, v, bound, std::isfinite(v) && v <= bound};
}

struct ExpMomentReport {
    double worst_ratio = 0.0;  // max over the grid of E e^{gamma X} / e^{c gamma^2}
    double worst_gamma = 0.0;
    bool passed = false;
};

inline ExpMomentReport exp_moment_check(const RandomFamily& fam, std::span<const double> gamma_grid, double c) {
    if (fam.kind == FamilyKind::custom_table && !fam.finite_support())
        throw Unsupported("exp_moment_check: custom table with unbounded support");
    ExpMomentReport r;
    r.worst_ratio = -std::numeric_limits<double>::infinity();
    for (double g : gamma_grid) {
        const double ratio = fam.mgf(g) / std::exp(c * g * g);
        if (ratio > r.worst_ratio) r.worst_ratio = ratio, r.worst_gamma = g;
    }
    r.passed = r.worst_ratio <= 1.0 + 1e-12;
    return r;
}

// Smallest c with E e^{gamma X} <= e^{c gamma^2} for all gamma, for the built-ins:
// gaussian variance/2, bernoulli 1/2, uniform a^2/6, finite table max|x|^2/2.
inline double exp_moment_constant(const RandomFamily& fam) {
    switch (fam.kind) {
    case FamilyKind::gaussian: return 0.5 * fam.variance;
    case FamilyKind::bernoulli: return 0.5;
    case FamilyKind::uniform_pm: return fam.half_width * fam.half_width / 6.0;
    case FamilyKind::custom_table: {
        if (!fam.finite_support()) return std::numeric_limits<double>::infinity();
        double m = 0.0;
        for (double x : fam.support) m = std::max(m, std::abs(x));
        return 0.5 * m * m;
    }
    }
    return std::numeric_limits<double>::infinity();
}

// Runs the checks and sets the corresponding certified flags.
inline RandomFamily certify(RandomFamily fam) {
    fam.validate();
    fam.certified.has_4th_moment = moment_check(fam, 4).passed;
    fam.certified.has_6th_moment = moment_check(fam, 6).passed;
    const double c = exp_moment_constant(fam);
    if (std::isfinite(c)) {
        std::vector<double> grid;
        for (int i = -40; i <= 40; ++i) grid.push_back(0.1 * i);
        fam.certified.has_exp_moment = exp_moment_check(fam, grid, c * (1.0 + 1e-9)).passed;
    }
    return fam;
}

struct Realization {
    std::uint64_t seed = 0;
    std::uint64_t trial_id = 0;
    std::vector<double> h;
    std::vector<double> l;
};

// 2N draws from the stream keyed by hash64(seed, trial_id): h first, then l.
inline Realization sample_realization(const RandomFamily& fam, std::uint64_t seed, std::uint64_t trial_id,
                                      std::size_t n) {
    Realization r{seed, trial_id, std::vector<double>(n), std::vector<double>(n)};
    auto rng = trial_stream(seed, trial_id);
    for (auto& x : r.h) x = fam.sample(rng);
    for (auto& x : r.l) x = fam.sample(rng);
    return r;
}

inline StatePair randomize(const StatePair& f, const Realization& r) {
    if (r.h.size() != f.u.size() || r.l.size() != f.ut.size())
        throw LengthMismatch("realization length " + std::to_string(r.h.size()) + " vs field length " +
                             std::to_string(f.u.size()));
    StatePair out = f;
    for (std::size_t i = 0; i < r.h.size(); ++i) {
        out.u[i] *= r.h[i];
        out.ut[i] *= r.l[i];
    }
    return out;
}

// Coefficients (1 + lambda_n^2)^{-theta/2} with theta = s + eps + d/2: the
// H^s sum converges and the H^{s+eps} sum diverges logarithmically (Weyl count
// of modes with lambda_n ~ R grows like R^{d-1} dR).
inline SpectralField divergent_profile(const BasisPtr& b, double s, double eps) {
    SpectralField f(b);
    const double theta = s + eps + 0.5 * b->geometry().dimension();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(1.0 + b->eigenvalues_sq()[i], -0.5 * theta);
    return f;
}

// Same shape with one extra power of decay: lies in H^{s+eps+1/2}.
inline SpectralField convergent_profile(const BasisPtr& b, double s, double eps) {
    SpectralField f(b);
    const double theta = s + eps + 0.5 * b->geometry().dimension() + 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(1.0 + b->eigenvalues_sq()[i], -0.5 * theta);
    return f;
}

struct GrowthRow {
    std::uint64_t trial_id;
    std::size_t truncation;
    double partial_sum;
};

struct NoRegularizationResult {
    std::vector<std::size_t> truncations;
    std::vector<GrowthRow> rows;               // trial-major, truncations ascending
    std::vector<double> min_over_trials;       // per truncation
    std::vector<double> max_over_trials;       // per truncation
    std::vector<double> deterministic;         // partial sums of f itself
    bool all_monotone = true;
};

// Partial sums sum_{n <= M} (1 + lambda_n^2)^{s+eps} (h_n alpha_n)^2 for each
// truncation M and trial.
inline NoRegularizationResult no_regularization_experiment(const SpectralField& f, double s, double eps,
                                                           const RandomFamily& fam,
                                                           std::vector<std::size_t> truncations, int trials,
                                                           std::uint64_t seed, int threads = 1) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    std::sort(truncations.begin(), truncations.end());
    if (truncations.empty() || truncations.front() < 1 || truncations.back() > f.size())
        throw DomainError("truncations must lie in [1, N]");
    const auto ev = f.basis().eigenvalues_sq();
    std::vector<double> weighted(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) weighted[i] = std::pow(1.0 + ev[i], s + eps) * f[i] * f[i];

    auto sums_for = [&](std::span<const double> h) {
        std::vector<double> out;
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t m : truncations) {
            for (; n < m; ++n) acc += h.empty() ? weighted[n] : weighted[n] * h[n] * h[n];
            out.push_back(acc);
        }
        return out;
    };

    NoRegularizationResult res;
    res.truncations = truncations;
    res.deterministic = sums_for({});
    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
    parallel_for(per_trial.size(), threads, [&](std::size_t t) {
        const auto r = sample_realization(fam, seed, t, f.size());
        per_trial[t] = sums_for(r.h);
    });
    res.min_over_trials.assign(truncations.size(), std::numeric_limits<double>::infinity());
    res.max_over_trials.assign(truncations.size(), 0.0);
    for (std::size_t t = 0; t < per_trial.size(); ++t) {
        for (std::size_t j = 0; j < truncations.size(); ++j) {
            const double v = per_trial[t][j];
            res.rows.push_back({t, truncations[j], v});
            res.min_over_trials[j] = std::min(res.min_over_trials[j], v);
            res.max_over_trials[j] = std::max(res.max_over_trials[j], v);
            if (j > 0 && v < per_trial[t][j - 1]) res.all_monotone = false;
        }
    }
    return res;
}

} // namespace rwave
