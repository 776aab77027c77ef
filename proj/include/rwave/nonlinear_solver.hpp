#pragma once

// Picard iteration for v = K(v), K(v) = -int_0^t sin((t-tau)sqrt(-Delta))/sqrt(-Delta) (u_free + v)^3,
// a Strang-split reference integrator, and the local-existence experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rwave/errors.hpp"
#include "rwave/large_deviation.hpp"
#include "rwave/parallel.hpp"
#include "rwave/randomization.hpp"
#include "rwave/spectral_basis.hpp"
#include "rwave/state.hpp"
#include "rwave/wave_propagator.hpp"

namespace rwave {

// sigma = 1/2 at s = 1/4, otherwise min(9/10, 1/2 + 3(s - 1/4)).
inline double default_sigma(double s) {
    if (std::abs(s - 0.25) < 1e-12) return 0.5;
    return std::min(0.9, 0.5 + 3.0 * (s - 0.25));
}

struct PicardConfig {
    double T = 0.5;
    double dt = 0.0;              // 0: pick lambda_max * dt <= cfl
    double cfl = 0.5;
    int max_iter = 60;
    double tol = 1e-10;
    double sigma = 0.5;
    double dealias_factor = 2.0;
    double blowup_norm = 1e8;     // X-proxy above this counts as divergence

    // Time grid for a given basis; dt must divide T.
    TimeGrid time_grid(const SpectralBasis& b) const {
        if (!(T > 0.0)) throw DomainError("picard: T must be positive");
        if (!(tol > 0.0)) throw DomainError("picard: tol must be positive");
        if (max_iter < 1) throw DomainError("picard: max_iter must be >= 1");
        if (dt > 0.0) {
            const double m = T / dt;
            const long steps = std::lround(m);
            if (steps < 1 || std::abs(m - static_cast<double>(steps)) > 1e-9 * std::max(1.0, m))
                throw DomainError("picard: dt must divide T");
            return {T, static_cast<int>(steps)};
        }
        return TimeGrid::resolving(T, std::max(b.max_lambda(), 1.0), cfl, 4);
    }
};

struct PicardReport {
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    double final_residual = std::numeric_limits<double>::infinity();
    std::vector<double> contraction_ratios;
    double norm_X_proxy = 0.0;
    double lambda_used = 0.0;      // ||u_free||_{L^4((0,T) x M)}
};

// Pointwise cube on a dealiased grid, projected back on the retained modes.
class CubicNonlinearity {
public:
    CubicNonlinearity(const BasisPtr& b, double dealias_factor = 2.0) : tr_(b, dealiased_grid(*b, dealias_factor)) {}

    const Transform& transform() const { return tr_; }

    std::vector<double> physical(const SpectralField& f) const { return tr_.synthesize(f); }

    SpectralField cube(const std::vector<double>& values) const {
        std::vector<double> c(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) c[k] = values[k] * values[k] * values[k];
        return tr_.analyze(c);
    }
    SpectralField cube(const SpectralField& f) const { return cube(physical(f)); }

    // int u^4 over the domain, exact on this grid for the retained span.
    double quartic_integral(const SpectralField& f) const {
        const auto v = physical(f);
        double s = 0.0;
        for (double x : v) s += (x * x) * (x * x);
        return s * tr_.cell_volume();
    }

private:
    Transform tr_;
};

// Conserved energy  sum (ut^2 + lambda^2 u^2)/2 + int u^4 / 4.
inline double energy(const StatePair& f, const CubicNonlinearity& nl) {
    return 0.5 * linear_energy(f) + 0.25 * nl.quartic_integral(f.u);
}

inline double energy(const StatePair& f) {
    return energy(f, CubicNonlinearity(f.basis_ptr()));
}

// Everything picard_solve needs about the free evolution of one datum.
struct FreeEvolutionCache {
    Trajectory<StatePair> traj;
    std::vector<std::vector<double>> physical;  // u_free at each time on the dealiased grid

    FreeEvolutionCache(const StatePair& f, const TimeGrid& grid, const CubicNonlinearity& nl)
        : traj(free_trajectory(f, grid)) {
        physical.reserve(traj.size());
        for (const auto& s : traj.states) physical.push_back(nl.physical(s.u));
    }
};

namespace detail {

inline double l4_spacetime(const std::vector<std::vector<double>>& phys, const TimeGrid& grid, double cell) {
    const auto w = time_weights(grid.steps, grid.dt());
    double acc = 0.0;
    for (std::size_t j = 0; j < phys.size(); ++j) {
        double s = 0.0;
        for (double x : phys[j]) s += (x * x) * (x * x);
        acc += w[j] * s * cell;
    }
    return std::pow(acc, 0.25);
}

} // namespace detail

// max_t ||v(t)||_{H^sigma} + ||v||_{L^4((0,T) x M)}.
inline double x_proxy_norm(const Trajectory<StatePair>& v, double sigma, const CubicNonlinearity& nl) {
    double hmax = 0.0;
    std::vector<std::vector<double>> phys;
    phys.reserve(v.size());
    for (const auto& s : v.states) {
        hmax = std::max(hmax, sobolev_norm(s.u, sigma));
        phys.push_back(nl.physical(s.u));
    }
    return hmax + detail::l4_spacetime(phys, v.grid, nl.transform().cell_volume());
}

inline Trajectory<StatePair> apply_K(const FreeEvolutionCache& free, const Trajectory<StatePair>& v,
                                     const CubicNonlinearity& nl) {
    if (v.size() != free.traj.size()) throw LengthMismatch("apply_K: v and the free flow use different time grids");
    Trajectory<SpectralField> src{v.grid, {}};
    src.states.reserve(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        auto w = nl.physical(v.states[j].u);
        const auto& uf = free.physical[j];
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += uf[k];
        src.states.push_back(nl.cube(w));
    }
    auto out = duhamel_all(src);
    for (auto& s : out.states) s *= -1.0;
    return out;
}

inline Trajectory<StatePair> apply_K(const StatePair& f_omega, const Trajectory<StatePair>& v, const PicardConfig& cfg) {
    const CubicNonlinearity nl(f_omega.basis_ptr(), cfg.dealias_factor);
    return apply_K(FreeEvolutionCache(f_omega, v.grid, nl), v, nl);
}

struct PicardResult {
    Trajectory<StatePair> u;   // u_free + v
    Trajectory<StatePair> v;
    PicardReport report;
};

namespace detail {

inline Trajectory<StatePair> zero_trajectory(const BasisPtr& b, const TimeGrid& grid) {
    return {grid, std::vector<StatePair>(static_cast<std::size_t>(grid.steps) + 1, StatePair::zero(b))};
}

inline Trajectory<StatePair> difference(const Trajectory<StatePair>& a, const Trajectory<StatePair>& b) {
    Trajectory<StatePair> d = a;
    for (std::size_t j = 0; j < d.size(); ++j) d.states[j] -= b.states[j];
    return d;
}

} // namespace detail

// Iterates v <- K(v) from v = 0. Stops when the X-proxy change is at most tol
// times the X-proxy norm, or after 3 consecutive contraction ratios >= 1.
inline PicardResult picard_solve(const StatePair& f_omega, const PicardConfig& cfg, bool keep_trajectory = true) {
    const auto& b = f_omega.basis_ptr();
    const TimeGrid grid = cfg.time_grid(*b);
    const CubicNonlinearity nl(b, cfg.dealias_factor);
    const FreeEvolutionCache free(f_omega, grid, nl);

    PicardResult res;
    res.report.lambda_used = detail::l4_spacetime(free.physical, grid, nl.transform().cell_volume());
    auto v = detail::zero_trajectory(b, grid);
    double prev_diff = -1.0;
    int bad = 0;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        auto next = apply_K(free, v, nl);
        const double diff = x_proxy_norm(detail::difference(next, v), cfg.sigma, nl);
        const double nrm = x_proxy_norm(next, cfg.sigma, nl);
        res.report.iterations = it;
        v = std::move(next);
        res.report.norm_X_proxy = nrm;
        if (!std::isfinite(diff) || !std::isfinite(nrm) || nrm > cfg.blowup_norm) {
            res.report.diverged = true;
            res.report.final_residual = std::numeric_limits<double>::infinity();
            break;
        }
        res.report.final_residual = nrm > 0.0 ? diff / nrm : 0.0;
        if (prev_diff > 0.0) {
            const double ratio = diff / prev_diff;
            res.report.contraction_ratios.push_back(ratio);
            bad = ratio >= 1.0 ? bad + 1 : 0;
        }
        if (diff == 0.0 || res.report.final_residual <= cfg.tol) {
            res.report.converged = true;
            break;
        }
        if (bad >= 3) {
            res.report.diverged = true;
            break;
        }
        prev_diff = diff;
    }
    if (keep_trajectory) {
        res.u = free.traj;
        for (std::size_t j = 0; j < res.u.size(); ++j) res.u.states[j] += v.states[j];
        res.v = std::move(v);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Reference integrator: Strang splitting of the exact linear flow and the
// kick (u, ut) -> (u, ut - dt P(u^3)).

struct ReferenceOptions {
    int store_every = 1;
    double dealias_factor = 2.0;
};

inline Trajectory<StatePair> reference_solve(const StatePair& f, double T, double dt, const ReferenceOptions& opt = {}) {
    if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("reference_solve: T and dt must be positive");
    const double m = T / dt;
    const long steps = std::lround(m);
    if (steps < 1 || std::abs(m - static_cast<double>(steps)) > 1e-9 * std::max(1.0, m))
        throw DomainError("reference_solve: dt must divide T");
    if (opt.store_every < 1 || steps % opt.store_every != 0)
        throw DomainError("reference_solve: store_every must divide the step count");

    const auto& b = f.basis_ptr();
    const CubicNonlinearity nl(b, opt.dealias_factor);
    const auto ev = b->eigenvalues_sq();
    const std::size_t n = ev.size();
    std::vector<double> c(n), sn(n), lam2(ev.begin(), ev.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double l = std::sqrt(ev[i]);
        c[i] = std::cos(0.5 * dt * l);
        sn[i] = sinc_lambda(l, 0.5 * dt);
    }
    auto half = [&](StatePair& s) {
        for (std::size_t i = 0; i < n; ++i) {
            const double u0 = s.u[i], u1 = s.ut[i];
            s.u[i] = c[i] * u0 + sn[i] * u1;
            s.ut[i] = -lam2[i] * sn[i] * u0 + c[i] * u1;
        }
    };

    Trajectory<StatePair> out{{T, static_cast<int>(steps / opt.store_every)}, {}};
    out.states.reserve(static_cast<std::size_t>(out.grid.steps) + 1);
    StatePair s = f;
    out.states.push_back(s);
    for (long k = 1; k <= steps; ++k) {
        half(s);
        const auto g = nl.cube(s.u);
        for (std::size_t i = 0; i < n; ++i) s.ut[i] -= dt * g[i];
        half(s);
        if (k % opt.store_every == 0) out.states.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probabilistic local existence

enum class LambdaRule { picard_success, threshold };

inline std::string_view to_string(LambdaRule r) {
    return r == LambdaRule::picard_success ? "picard_success" : "threshold";
}

inline LambdaRule parse_lambda_rule(std::string_view s) {
    if (s == "picard_success") return LambdaRule::picard_success;
    if (s == "threshold") return LambdaRule::threshold;
    throw DomainError("unknown lambda rule '" + std::string(s) + "'");
}

struct LocalExistenceOptions {
    LambdaRule rule = LambdaRule::picard_success;
    double epsilon = 1.0;         // threshold rule: success iff weighted L^4 norm <= epsilon T^{-delta}
    double delta = 0.0;
    PicardConfig picard;          // T is overridden per row
    std::uint64_t seed = 0;
    int threads = 1;
};

struct LocalExistenceRow {
    double T = 0.0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double fraction = 0.0;
    double failure = 0.0;
    double mean_iterations = 0.0;
    double mean_lambda = 0.0;     // mean unweighted free L^4 norm
};

struct LocalExistenceResult {
    std::vector<LocalExistenceRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();  // log(1 - fraction) vs log T
    bool monotone = true;         // success nondecreasing as T decreases
};

// Every T uses the same trial ids, so the rows differ only through T.
inline LocalExistenceResult local_existence_experiment(const StatePair& f, const RandomFamily& fam, double s,
                                                       std::vector<double> T_grid, std::size_t trials,
                                                       const LocalExistenceOptions& opt = {}) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    if (T_grid.empty()) throw DomainError("T grid is empty");
    for (double T : T_grid)
        if (!(T > 0.0 && T <= 1.0)) throw DomainError("T grid must lie in (0, 1]");
    std::sort(T_grid.begin(), T_grid.end(), std::greater<>());

    LocalExistenceResult res;
    const double sigma_w = s - 0.25;
    for (double T : T_grid) {
        PicardConfig cfg = opt.picard;
        cfg.T = T;
        std::vector<char> ok(trials, 0);
        std::vector<double> iters(trials, 0.0), lam(trials, 0.0);
        if (opt.rule == LambdaRule::picard_success) {
            parallel_for(trials, opt.threads, [&](std::size_t t) {
                const auto fw = randomize(f, sample_realization(fam, opt.seed, t, f.u.size()));
                const auto r = picard_solve(fw, cfg, false);
                ok[t] = r.report.converged;
                iters[t] = r.report.iterations;
                lam[t] = r.report.lambda_used;
            });
        } else {
            AveragingOptions ao;
            ao.seed = opt.seed;
            ao.threads = opt.threads;
            ao.time_steps = cfg.time_grid(f.basis()).steps;
            const auto w = averaging_norms(f, fam, sigma_w, 4.0, T, trials, ao);
            const auto u = averaging_norms(f, fam, 0.0, 4.0, T, trials, ao);
            const double thr = opt.epsilon * std::pow(T, -opt.delta);
            for (std::size_t t = 0; t < trials; ++t) {
                ok[t] = w[t] <= thr;
                lam[t] = u[t];
            }
        }
        LocalExistenceRow row;
        row.T = T;
        row.trials = trials;
        for (std::size_t t = 0; t < trials; ++t) {
            row.successes += ok[t] ? 1 : 0;
            row.mean_iterations += iters[t];
            row.mean_lambda += lam[t];
        }
        row.fraction = static_cast<double>(row.successes) / static_cast<double>(trials);
        row.failure = 1.0 - row.fraction;
        row.mean_iterations /= static_cast<double>(trials);
        row.mean_lambda /= static_cast<double>(trials);
        if (!res.rows.empty() && row.fraction < res.rows.back().fraction) res.monotone = false;
        res.rows.push_back(row);
    }
    std::vector<double> x, y;
    for (const auto& r : res.rows)
        if (r.failure > 0.0) x.push_back(std::log(r.T)), y.push_back(std::log(r.failure));
    if (x.size() >= 2) res.slope = linear_fit(x, y).slope;
    return res;
}

// (alpha e_n-profile, its H^{s-1}-matched velocity) scaled by `amplitude`.
inline StatePair profile_pair(const BasisPtr& b, double s, double eps, double amplitude, bool with_velocity = true) {
    auto f1 = divergent_profile(b, s, eps);
    f1 *= amplitude;
    SpectralField f2 = with_velocity ? bessel_power(f1, 1.0) : SpectralField(b);
    return {std::move(f1), std::move(f2)};
}

} // namespace rwave
