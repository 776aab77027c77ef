#pragma once

// Free wave flow in coefficient space, the Duhamel integral, space-time
// norms and the randomized averaging / Strichartz probes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rwave/errors.hpp"
#include "rwave/large_deviation.hpp"
#include "rwave/parallel.hpp"
#include "rwave/randomization.hpp"
#include "rwave/spectral_basis.hpp"
#include "rwave/state.hpp"

namespace rwave {

// sin(t lambda) / lambda, continued by t at lambda = 0.
inline double sinc_lambda(double lambda, double t) {
    if (lambda < 1e-8) {
        const double z = lambda * t;
        return t * (1.0 - z * z / 6.0);
    }
    return std::sin(lambda * t) / lambda;
}

// Uniform time grid 0 = t_0 < ... < t_M = T.
struct TimeGrid {
    double horizon = 1.0;
    int steps = 1;

    double dt() const { return horizon / steps; }
    double time(int j) const { return j == steps ? horizon : horizon * j / steps; }
    std::vector<double> times() const {
        std::vector<double> t(static_cast<std::size_t>(steps) + 1);
        for (int j = 0; j <= steps; ++j) t[static_cast<std::size_t>(j)] = time(j);
        return t;
    }

    // Smallest step count with lambda_max * dt <= cfl.
    static TimeGrid resolving(double horizon, double lambda_max, double cfl = 0.5, int min_steps = 2) {
        if (!(horizon > 0.0)) throw DomainError("time horizon must be positive");
        int m = std::max(min_steps, static_cast<int>(std::ceil(horizon * lambda_max / cfl)));
        return {horizon, m};
    }
};

template <class State>
struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;  // one per grid time

    std::size_t size() const { return states.size(); }
    double time(std::size_t j) const { return grid.time(static_cast<int>(j)); }
    const State& at(std::size_t j) const { return states.at(j); }
    const State& back() const { return states.back(); }
};

// Composite weights on t_0..t_m: Simpson for even m, Simpson plus a closing
// 3/8 panel for odd m >= 3, trapezoid for m = 1.
inline std::vector<double> time_weights(int m, double dt) {
    if (m < 0) throw DomainError("negative interval count");
    std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
    if (m == 0) return w;
    if (m == 1) {
        w[0] = w[1] = 0.5 * dt;
        return w;
    }
    const int even = (m % 2 == 0) ? m : m - 3;
    for (int i = 0; i + 2 <= even; i += 2) {
        w[static_cast<std::size_t>(i)] += dt / 3.0;
        w[static_cast<std::size_t>(i + 1)] += 4.0 * dt / 3.0;
        w[static_cast<std::size_t>(i + 2)] += dt / 3.0;
    }
    if (even != m) {
        const auto b = static_cast<std::size_t>(even);
        w[b] += 3.0 * dt / 8.0;
        w[b + 1] += 9.0 * dt / 8.0;
        w[b + 2] += 9.0 * dt / 8.0;
        w[b + 3] += 3.0 * dt / 8.0;
    }
    return w;
}

inline StatePair free_evolution(const StatePair& f, double t) {
    StatePair out = f;
    const auto ev = f.basis().eigenvalues_sq();
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const double lam = std::sqrt(ev[i]);
        const double c = std::cos(lam * t), sn = sinc_lambda(lam, t);
        const double u0 = f.u[i], u1 = f.ut[i];
        out.u[i] = c * u0 + sn * u1;
        out.ut[i] = -ev[i] * sn * u0 + c * u1;
    }
    return out;
}

inline Trajectory<StatePair> free_trajectory(const StatePair& f, const TimeGrid& grid) {
    Trajectory<StatePair> tr{grid, {}};
    tr.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
    for (int j = 0; j <= grid.steps; ++j) tr.states.push_back(free_evolution(f, grid.time(j)));
    return tr;
}

namespace detail {

inline int grid_index(const TimeGrid& grid, double t) {
    const double x = t / grid.dt();
    const long j = std::lround(x);
    if (t < -1e-12 * grid.horizon || j > grid.steps || std::abs(x - static_cast<double>(j)) > 1e-9)
        throw DomainError("time " + std::to_string(t) + " is not a grid time in [0, " +
                          std::to_string(grid.horizon) + "]");
    return static_cast<int>(j);
}

} // namespace detail

// int_0^t sinc_lambda(t - tau) g(tau) dtau, coefficientwise, by composite
// quadrature on the source grid. The leading minus of the wave Duhamel term
// is left to the caller. t must be a grid time.
inline SpectralField duhamel(const Trajectory<SpectralField>& source, double t) {
    if (source.states.empty()) throw DomainError("empty source trajectory");
    const int m = detail::grid_index(source.grid, t);
    const auto w = time_weights(m, source.grid.dt());
    SpectralField out(source.states.front().basis_ptr());
    const auto ev = out.basis().eigenvalues_sq();
    const double tm = source.grid.time(m);
    for (int j = 0; j <= m; ++j) {
        const auto& g = source.states[static_cast<std::size_t>(j)];
        const double tau = source.grid.time(j);
        for (std::size_t i = 0; i < ev.size(); ++i)
            out[i] += w[static_cast<std::size_t>(j)] * sinc_lambda(std::sqrt(ev[i]), tm - tau) * g[i];
    }
    return out;
}

// Duhamel integral and its time derivative at every grid time, in O(M N).
// Uses sinc(t - tau) = sinc(t) cos(tau) - cos(t) sinc(tau) so each step only
// extends two running quadratures per mode; the composite rule per endpoint
// is the same one `duhamel` applies.
inline Trajectory<StatePair> duhamel_all(const Trajectory<SpectralField>& source) {
    if (source.states.empty()) throw DomainError("empty source trajectory");
    const auto& b = source.states.front().basis_ptr();
    const auto ev = b->eigenvalues_sq();
    const std::size_t n = ev.size();
    const int M = source.grid.steps;
    const double h = source.grid.dt();
    if (source.states.size() != static_cast<std::size_t>(M) + 1) throw LengthMismatch("trajectory vs time grid");

    Trajectory<StatePair> out{source.grid, {}};
    out.states.reserve(static_cast<std::size_t>(M) + 1);
    out.states.push_back(StatePair::zero(b));

    std::vector<double> lam(n);
    for (std::size_t i = 0; i < n; ++i) lam[i] = std::sqrt(ev[i]);
    // integrands F_A = cos(lambda tau) g, F_B = sinc(tau) g at every time
    std::vector<std::vector<double>> FA(static_cast<std::size_t>(M) + 1, std::vector<double>(n)),
        FB(static_cast<std::size_t>(M) + 1, std::vector<double>(n));
    for (int j = 0; j <= M; ++j) {
        const double tau = source.grid.time(j);
        const auto& g = source.states[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < n; ++i) {
            FA[static_cast<std::size_t>(j)][i] = std::cos(lam[i] * tau) * g[i];
            FB[static_cast<std::size_t>(j)][i] = sinc_lambda(lam[i], tau) * g[i];
        }
    }
    // running Simpson sums over [0, t_{2k}]
    std::vector<std::vector<double>> SA(static_cast<std::size_t>(M) / 2 + 1, std::vector<double>(n, 0.0)),
        SB = SA;
    for (int k = 1; 2 * k <= M; ++k) {
        const auto a = static_cast<std::size_t>(2 * k - 2);
        for (std::size_t i = 0; i < n; ++i) {
            SA[static_cast<std::size_t>(k)][i] =
                SA[static_cast<std::size_t>(k - 1)][i] + h / 3.0 * (FA[a][i] + 4 * FA[a + 1][i] + FA[a + 2][i]);
            SB[static_cast<std::size_t>(k)][i] =
                SB[static_cast<std::size_t>(k - 1)][i] + h / 3.0 * (FB[a][i] + 4 * FB[a + 1][i] + FB[a + 2][i]);
        }
    }
    for (int m = 1; m <= M; ++m) {
        StatePair s = StatePair::zero(b);
        const double t = source.grid.time(m);
        for (std::size_t i = 0; i < n; ++i) {
            double A, B;
            if (m == 1) {
                A = 0.5 * h * (FA[0][i] + FA[1][i]);
                B = 0.5 * h * (FB[0][i] + FB[1][i]);
            } else if (m % 2 == 0) {
                A = SA[static_cast<std::size_t>(m / 2)][i];
                B = SB[static_cast<std::size_t>(m / 2)][i];
            } else {
                const auto e = static_cast<std::size_t>(m - 3);
                A = SA[e / 2][i] + 3.0 * h / 8.0 * (FA[e][i] + 3 * FA[e + 1][i] + 3 * FA[e + 2][i] + FA[e + 3][i]);
                B = SB[e / 2][i] + 3.0 * h / 8.0 * (FB[e][i] + 3 * FB[e + 1][i] + 3 * FB[e + 2][i] + FB[e + 3][i]);
            }
            const double c = std::cos(lam[i] * t), sn = sinc_lambda(lam[i], t);
            s.u[i] = sn * A - c * B;
            s.ut[i] = c * A + ev[i] * sn * B;
        }
        out.states.push_back(std::move(s));
    }
    return out;
}

// (int_0^T ||u(t)||_{L^q}^p dt)^{1/p} from per-time L^q norms; p = inf gives the max.
inline double time_lp(std::span<const double> per_time_lq, double p, const TimeGrid& grid) {
    if (per_time_lq.size() != static_cast<std::size_t>(grid.steps) + 1) throw LengthMismatch("per-time norms");
    if (std::isinf(p)) return *std::max_element(per_time_lq.begin(), per_time_lq.end());
    if (!(p >= 1.0)) throw DomainError("time exponent must be >= 1");
    const auto w = time_weights(grid.steps, grid.dt());
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * std::pow(per_time_lq[j], p);
    return std::pow(acc, 1.0 / p);
}

// L^p((0,T); L^q(M)) norm of a field trajectory on the given spatial grid.
inline double spacetime_norm(const Trajectory<SpectralField>& traj, double p, double q, const GridSampling& grid) {
    if (traj.states.empty()) throw DomainError("empty trajectory");
    Transform tr(traj.states.front().basis_ptr(), grid);
    std::vector<double> lq(traj.size());
    for (std::size_t j = 0; j < traj.size(); ++j) lq[j] = lp_norm(tr.synthesize(traj.states[j]), q, tr.cell_volume());
    return time_lp(lq, p, traj.grid);
}

inline double spacetime_norm(const Trajectory<SpectralField>& traj, double p, double q) {
    if (traj.states.empty()) throw DomainError("empty trajectory");
    return spacetime_norm(traj, p, q, default_grid(traj.states.front().basis()));
}

inline Trajectory<SpectralField> positions(const Trajectory<StatePair>& t) {
    Trajectory<SpectralField> out{t.grid, {}};
    out.states.reserve(t.size());
    for (const auto& s : t.states) out.states.push_back(s.u);
    return out;
}

// (p, q) on the line 1/p + 3/q = 3/2 - s with the lower bound on p.
struct AdmissiblePair {
    double p = 4.0;
    double q = 4.0;
    double s = 0.25;
    bool boundary = false;

    double min_p() const {
        if (!boundary) return s > 0.0 ? 2.0 / s : std::numeric_limits<double>::infinity();
        if (s <= 0.7) return s > 0.0 ? 7.0 / (2.0 * s) : std::numeric_limits<double>::infinity();
        return 5.0;
    }

    void validate() const {
        if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("admissible pair: p and q must be >= 1");
        const double lhs = (std::isinf(p) ? 0.0 : 1.0 / p) + (std::isinf(q) ? 0.0 : 3.0 / q);
        if (std::abs(lhs - (1.5 - s)) > 1e-9)
            throw DomainError("admissible pair: scaling line 1/p + 3/q = 3/2 - s violated (" + std::to_string(lhs) +
                              " vs " + std::to_string(1.5 - s) + ")");
        const double pm = min_p();
        if (!(p >= pm * (1.0 - 1e-12)))
            throw DomainError(std::string("admissible pair: ") +
                              (boundary ? (s <= 0.7 ? "p >= 7/(2s)" : "p >= 5") : "p >= 2/s") + " violated (p = " +
                              std::to_string(p) + ", bound " + std::to_string(pm) + ")");
    }
};

// ---------------------------------------------------------------------------
// Averaging experiment

struct AveragingOptions {
    int time_steps = 0;           // 0: resolve lambda_max * dt <= 0.5 with at least 32 steps
    double oversampling = 3.0;
    int lambda_points = 8;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct AveragingTailRow {
    double lambda = 0.0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    double se = 0.0;
    double chebyshev_bound = 0.0;  // mean(X^r)/lambda^r + 3 se
    double exp_fit = 0.0;          // exp(a + b lambda^2) from the fit below
};

struct AveragingResult {
    double exponent = 4.0;           // r: 4 boundaryless, 5 boundary
    double weight_power = 0.0;       // s - 1/4 or s - 2/5
    double data_norm = 0.0;          // ||f||_{H^s x H^{s-1}}
    std::vector<double> per_trial;   // X_omega per trial id
    double mean_power = 0.0;         // mean X^r
    double mean_power_se = 0.0;
    double shape_ratio = 0.0;        // mean X^r / (T ||f||^r)
    std::vector<AveragingTailRow> tail;
    LinearFit fit_gaussian;          // log p_hat ~ lambda^2
    LinearFit fit_power;             // log p_hat ~ log lambda
    bool chebyshev_ok = true;
    bool exponential_preferred = false;
};

namespace detail {

// ||bessel_power(u_f(t), sigma)||_{L^r((0,T) x M)} for the free flow of f.
class WeightedFreeNorm {
public:
    WeightedFreeNorm(const BasisPtr& b, const TimeGrid& grid, double oversampling)
        : tr_(b, oversampled_grid(*b, oversampling)), grid_(grid), weights_(time_weights(grid.steps, grid.dt())) {
        const auto ev = b->eigenvalues_sq();
        cos_.resize(weights_.size());
        sin_.resize(weights_.size());
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            const double t = grid_.time(static_cast<int>(j));
            cos_[j].resize(ev.size());
            sin_[j].resize(ev.size());
            for (std::size_t i = 0; i < ev.size(); ++i) {
                cos_[j][i] = std::cos(std::sqrt(ev[i]) * t);
                sin_[j][i] = sinc_lambda(std::sqrt(ev[i]), t);
            }
        }
    }

    double operator()(const StatePair& weighted, double r) const {
        const std::size_t n = weighted.u.size();
        std::vector<double> c(n);
        double acc = 0.0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) c[i] = cos_[j][i] * weighted.u[i] + sin_[j][i] * weighted.ut[i];
            const auto v = tr_.synthesize(c);
            double s = 0.0;
            if (r == 4.0)
                for (double x : v) s += (x * x) * (x * x);
            else
                for (double x : v) s += std::pow(std::abs(x), r);
            acc += weights_[j] * s * tr_.cell_volume();
        }
        return std::pow(acc, 1.0 / r);
    }

private:
    Transform tr_;
    TimeGrid grid_;
    std::vector<double> weights_;
    std::vector<std::vector<double>> cos_, sin_;
};

inline TimeGrid averaging_grid(const SpectralBasis& b, double T, int steps) {
    if (steps > 0) return {T, steps};
    auto g = TimeGrid::resolving(T, b.max_lambda(), 0.5, 32);
    if (g.steps % 2) ++g.steps;
    return g;
}

} // namespace detail

// Per-trial X = ||(1-Delta)^{sigma/2} u_{f^omega}||_{L^r((0,T) x M)}.
inline std::vector<double> averaging_norms(const StatePair& f, const RandomFamily& fam, double sigma, double r,
                                           double T, std::size_t trials, const AveragingOptions& opt) {
    const auto grid = detail::averaging_grid(f.basis(), T, opt.time_steps);
    const detail::WeightedFreeNorm norm(f.basis_ptr(), grid, opt.oversampling);
    const StatePair weighted{bessel_power(f.u, sigma), bessel_power(f.ut, sigma)};
    std::vector<double> out(trials);
    parallel_for(trials, opt.threads, [&](std::size_t t) {
        const auto real = sample_realization(fam, opt.seed, t, f.u.size());
        out[t] = norm(randomize(weighted, real), r);
    });
    return out;
}

// Tail table over `points` geometric lambdas from the median to the max of x.
inline std::vector<AveragingTailRow> empirical_tail(std::span<const double> x, double r, int points,
                                                    double* mean_power = nullptr, double* mean_power_se = nullptr) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double m = 0.0, m2 = 0.0;
    for (double v : sorted) {
        const double a = std::pow(v, r);
        m += a;
        m2 += a * a;
    }
    m /= n;
    const double mse = n > 1 ? std::sqrt(std::max(0.0, m2 / n - m * m) / (n - 1)) : 0.0;
    if (mean_power) *mean_power = m;
    if (mean_power_se) *mean_power_se = mse;
    const double lo = sorted[sorted.size() / 2], hi = sorted.back();
    std::vector<AveragingTailRow> rows;
    for (int i = 0; i < points; ++i) {
        const double l = (lo > 0.0 && hi > lo) ? lo * std::pow(hi / lo, points == 1 ? 0.0 : double(i) / (points - 1))
                                               : lo;
        AveragingTailRow row;
        row.lambda = l;
        row.hits = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), l));
        row.p_hat = row.hits / n;
        row.se = std::sqrt(row.p_hat * (1.0 - row.p_hat) / n);
        row.chebyshev_bound = l > 0.0 ? m / std::pow(l, r) + 3.0 * row.se : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    return rows;
}

inline AveragingResult averaging_experiment(const StatePair& f, const RandomFamily& fam, double s, double T,
                                            std::size_t trials, bool boundary, const AveragingOptions& opt = {}) {
    if (trials < 2) throw DomainError("averaging_experiment needs trials >= 2");
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (boundary ? !fam.certified.has_6th_moment : !fam.certified.has_4th_moment)
        throw Unsupported(std::string("family '") + std::string(to_string(fam.kind)) + "' is not certified for " +
                          (boundary ? "6th" : "4th") + " moments; call certify() first");
    AveragingResult res;
    res.exponent = boundary ? 5.0 : 4.0;
    res.weight_power = boundary ? s - 0.4 : s - 0.25;
    res.data_norm = pair_norm(f, s);
    res.per_trial = averaging_norms(f, fam, res.weight_power, res.exponent, T, trials, opt);
    res.tail = empirical_tail(res.per_trial, res.exponent, opt.lambda_points, &res.mean_power, &res.mean_power_se);
    res.shape_ratio = res.data_norm > 0.0 ? res.mean_power / (T * std::pow(res.data_norm, res.exponent)) : 0.0;

    std::vector<double> l2, ll, lp;
    for (const auto& row : res.tail) {
        if (row.p_hat > row.chebyshev_bound) res.chebyshev_ok = false;
        if (row.p_hat <= 0.0) continue;
        l2.push_back(row.lambda * row.lambda);
        ll.push_back(std::log(row.lambda));
        lp.push_back(std::log(row.p_hat));
    }
    res.fit_gaussian = linear_fit(l2, lp);
    res.fit_power = linear_fit(ll, lp);
    for (auto& row : res.tail)
        row.exp_fit = std::exp(res.fit_gaussian.intercept + res.fit_gaussian.slope * row.lambda * row.lambda);
    res.exponential_preferred = l2.size() >= 3 && res.fit_gaussian.slope < 0.0 &&
                                res.fit_gaussian.r2 > res.fit_power.r2;
    return res;
}

struct ChaosRow {
    double p = 0.0;
    double lp_omega = 0.0;  // (mean X^p)^{1/p}
    double ratio = 0.0;     // lp_omega / sqrt(p)
};

// ||X||_{L^p(Omega)} / sqrt(p) for X = ||(1-Delta)^{(s-1/4)/2} u_{f^omega}||_{L^4((0,1) x M)}.
inline std::vector<ChaosRow> chaos_lp_growth(const StatePair& f, const RandomFamily& fam, double s,
                                             std::span<const double> p_grid, std::size_t trials,
                                             const AveragingOptions& opt = {}) {
    if (!fam.certified.has_exp_moment)
        throw Unsupported("chaos_lp_growth needs a family certified for exponential moments");
    const auto x = averaging_norms(f, fam, s - 0.25, 4.0, 1.0, trials, opt);
    std::vector<ChaosRow> rows;
    for (double p : p_grid) {
        if (!(p >= 1.0)) throw DomainError("chaos p must be >= 1");
        long double acc = 0.0;
        for (double v : x) acc += std::pow(static_cast<long double>(v), static_cast<long double>(p));
        const double lp = static_cast<double>(std::pow(acc / x.size(), 1.0L / p));
        rows.push_back({p, lp, lp / std::sqrt(p)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Strichartz probe on the half-wave flow e^{it sqrt(-Delta)}

struct StrichartzRow {
    std::size_t cutoff = 0;
    double max_random = 0.0;
    double max_single_mode = 0.0;
    std::size_t argmax_mode = 0;
    double max_ratio = 0.0;
};

struct StrichartzOptions {
    double T = 1.0;
    int time_steps = 0;
    double oversampling = 3.0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::size_t single_modes = 16;  // highest ranks probed individually
};

namespace detail {

// ||e^{it sqrt(-Delta)} f||_{L^p([-T,T]; L^q)}; the modulus is even in t for real f.
inline double half_wave_norm(const Transform& tr, std::span<const double> coeffs, const AdmissiblePair& pr,
                             const TimeGrid& grid) {
    const auto ev = tr.basis().eigenvalues_sq();
    std::vector<double> re(coeffs.size()), im(coeffs.size()), lq(static_cast<std::size_t>(grid.steps) + 1);
    for (int j = 0; j <= grid.steps; ++j) {
        const double t = grid.time(j);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const double lt = std::sqrt(ev[i]) * t;
            re[i] = std::cos(lt) * coeffs[i];
            im[i] = std::sin(lt) * coeffs[i];
        }
        const auto a = tr.synthesize(re), b = tr.synthesize(im);
        std::vector<double> mod(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) mod[k] = std::hypot(a[k], b[k]);
        lq[static_cast<std::size_t>(j)] = lp_norm(mod, pr.q, tr.cell_volume());
    }
    if (std::isinf(pr.p)) return *std::max_element(lq.begin(), lq.end());
    return std::pow(2.0, 1.0 / pr.p) * time_lp(lq, pr.p, grid);
}

} // namespace detail

inline std::vector<StrichartzRow> strichartz_probe(const Geometry& g, const AdmissiblePair& pair,
                                                   std::span<const std::size_t> cutoffs, std::size_t trials,
                                                   const StrichartzOptions& opt = {}) {
    pair.validate();
    std::vector<StrichartzRow> rows;
    for (std::size_t N : cutoffs) {
        const auto b = SpectralBasis::create(g, N);
        const Transform tr(b, oversampled_grid(*b, opt.oversampling));
        TimeGrid grid = opt.time_steps > 0 ? TimeGrid{opt.T, opt.time_steps}
                                           : TimeGrid::resolving(opt.T, b->max_lambda(), 0.25, 16);
        const auto ev = b->eigenvalues_sq();
        StrichartzRow row;
        row.cutoff = b->size();
        std::vector<double> rnd(trials);
        parallel_for(trials, opt.threads, [&](std::size_t t) {
            const auto r = sample_realization(RandomFamily::gaussian(), opt.seed, t, b->size());
            SpectralField f(b, r.h);
            const double nrm = sobolev_norm(f, pair.s);
            rnd[t] = detail::half_wave_norm(tr, f.coeffs(), pair, grid) / nrm;
        });
        for (double v : rnd) row.max_random = std::max(row.max_random, v);
        const std::size_t first = b->size() > opt.single_modes ? b->size() - opt.single_modes : 0;
        std::vector<double> c(b->size(), 0.0);
        for (std::size_t i = first; i < b->size(); ++i) {
            c[i] = 1.0;
            const double v = detail::half_wave_norm(tr, c, pair, grid) / std::pow(1.0 + ev[i], 0.5 * pair.s);
            c[i] = 0.0;
            if (v > row.max_single_mode) row.max_single_mode = v, row.argmax_mode = i + 1;
        }
        row.max_ratio = std::max(row.max_random, row.max_single_mode);
        rows.push_back(row);
    }
    return rows;
}

} // namespace rwave
