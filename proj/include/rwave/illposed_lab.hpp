#pragma once

// Concentrating-bubble constructions for norm inflation: the periodic ODE
// profile V'' + V^3 = 0, bubble data, the explicit profile v_n, the
// semiclassical energy, and the H^s lower-bound sweep.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "rwave/errors.hpp"
#include "rwave/large_deviation.hpp"
#include "rwave/nonlinear_solver.hpp"
#include "rwave/parallel.hpp"
#include "rwave/spectral_basis.hpp"
#include "rwave/state.hpp"

namespace rwave {

// ---------------------------------------------------------------------------
// V'' + V^3 = 0, V(0) = 1, V'(0) = 0

class OdeProfile {
public:
    // One period tabulated at `table_points` equal steps.
    explicit OdeProfile(int table_points = 8192, double h = 1e-3) {
        namespace ode = boost::numeric::odeint;
        using State = std::array<double, 2>;
        auto rhs = [](const State& x, State& dx, double) {
            dx[0] = x[1];
            dx[1] = -x[0] * x[0] * x[0];
        };
        ode::runge_kutta_fehlberg78<State> stepper;

        // V' < 0 on (0, P/2) and > 0 just after; bracket the half period on a coarse pass.
        State x{1.0, 0.0};
        double t = 0.0;
        State prev = x;
        while (true) {
            prev = x;
            stepper.do_step(rhs, x, t, h);
            t += h;
            if (prev[1] < 0.0 && x[1] >= 0.0) break;
            if (t > 100.0) throw Error("ode_V: no half period found");
        }
        auto vprime_at = [&](double tau) {
            State y = prev;
            const double t0 = t - h;
            if (tau > t0) stepper.do_step(rhs, y, t0, tau - t0);
            return y[1];
        };
        std::uintmax_t iters = 100;
        const auto r = boost::math::tools::toms748_solve(
            vprime_at, t - h, t, vprime_at(t - h), x[1],
            [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); }, iters);
        period_ = r.first + r.second;  // twice the midpoint of the bracket

        // Tabulate one period on a uniform grid.
        const int M = table_points;
        step_ = period_ / M;
        V_.resize(static_cast<std::size_t>(M) + 1);
        Vp_.resize(static_cast<std::size_t>(M) + 1);
        State y{1.0, 0.0};
        const int sub = std::max(1, static_cast<int>(std::ceil(step_ / h)));
        const double hh = step_ / sub;
        V_[0] = y[0];
        Vp_[0] = y[1];
        double tt = 0.0;
        for (int j = 1; j <= M; ++j) {
            for (int k = 0; k < sub; ++k) {
                stepper.do_step(rhs, y, tt, hh);
                tt += hh;
            }
            V_[static_cast<std::size_t>(j)] = y[0];
            Vp_[static_cast<std::size_t>(j)] = y[1];
        }
    }

    double period() const { return period_; }
    std::size_t table_size() const { return V_.size(); }
    double table_time(std::size_t j) const { return static_cast<double>(j) * step_; }
    std::span<const double> table_values() const { return V_; }
    std::span<const double> table_derivatives() const { return Vp_; }

    // Quintic Hermite interpolation through (V, V', V'' = -V^3) after reduction mod the period.
    double value(double t) const { return eval(t, 0); }
    double derivative(double t) const { return eval(t, 1); }

    double max_energy_error() const {
        double e = 0.0;
        for (std::size_t j = 0; j < V_.size(); ++j)
            e = std::max(e, std::abs(0.5 * Vp_[j] * Vp_[j] + 0.25 * std::pow(V_[j], 4) - 0.25));
        return e;
    }

private:
    double eval(double t, int deriv) const {
        double r = std::fmod(t, period_);
        if (r < 0.0) r += period_;
        const double x = r / step_;
        auto j = static_cast<std::size_t>(std::floor(x));
        if (j >= V_.size() - 1) j = V_.size() - 2;
        const double u = x - static_cast<double>(j), h = step_;
        const double p0 = V_[j], p1 = V_[j + 1];
        const double m0 = Vp_[j] * h, m1 = Vp_[j + 1] * h;
        const double a0 = -std::pow(p0, 3) * h * h, a1 = -std::pow(p1, 3) * h * h;
        const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
        if (deriv == 0) {
            const double h0 = 1 - 10 * u3 + 15 * u4 - 6 * u5, h1 = u - 6 * u3 + 8 * u4 - 3 * u5;
            const double h2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
            const double h3 = 0.5 * u3 - u4 + 0.5 * u5, h4 = -4 * u3 + 7 * u4 - 3 * u5;
            const double h5 = 10 * u3 - 15 * u4 + 6 * u5;
            return h0 * p0 + h1 * m0 + h2 * a0 + h3 * a1 + h4 * m1 + h5 * p1;
        }
        const double d0 = -30 * u2 + 60 * u3 - 30 * u4, d1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
        const double d2 = u - 4.5 * u2 + 6 * u3 - 2.5 * u4, d3 = 1.5 * u2 - 4 * u3 + 2.5 * u4;
        const double d4 = -12 * u2 + 28 * u3 - 15 * u4, d5 = 30 * u2 - 60 * u3 + 30 * u4;
        return (d0 * p0 + d1 * m0 + d2 * a0 + d3 * a1 + d4 * m1 + d5 * p1) / h;
    }

    double period_ = 0.0;
    double step_ = 0.0;
    std::vector<double> V_, Vp_;
};

struct OdeSamples {
    std::vector<double> times, V, Vp;
    double period = 0.0;
    double max_energy_error = 0.0;
};

inline OdeSamples ode_V(std::span<const double> t_grid, const OdeProfile& profile = OdeProfile()) {
    OdeSamples out;
    out.period = profile.period();
    out.times.assign(t_grid.begin(), t_grid.end());
    for (double t : t_grid) {
        const double v = profile.value(t), vp = profile.derivative(t);
        out.V.push_back(v);
        out.Vp.push_back(vp);
        out.max_energy_error = std::max(out.max_energy_error, std::abs(0.5 * vp * vp + 0.25 * std::pow(v, 4) - 0.25));
    }
    out.max_energy_error = std::max(out.max_energy_error, profile.max_energy_error());
    return out;
}

// ---------------------------------------------------------------------------
// Bubbles  f_n(x) = kappa_n n^{d/2 - s} phi(n (x - x0)),  kappa_n = log(n)^{-delta1}

// Tensor raised cosine prod_a (1 + cos(pi y_a))/2 on |y_a| <= 1, times `height`.
inline double raised_cosine(std::span<const double> y, double height = 1.0) {
    double v = height;
    for (double a : y) {
        if (std::abs(a) >= 1.0) return 0.0;
        v *= 0.5 * (1.0 + std::cos(std::numbers::pi * a));
    }
    return v;
}

struct Bubble {
    int n = 8;
    double s = 0.3;
    double delta1 = 0.01;
    double delta2 = 0.2;
    int dimension = 1;
    std::vector<double> center;    // empty: middle of the cell
    double bump_height = 1.0;

    double kappa() const { return std::pow(std::log(static_cast<double>(n)), -delta1); }
    double amplitude() const { return kappa() * std::pow(static_cast<double>(n), 0.5 * dimension - s); }
    double blowup_time() const {
        return std::pow(std::log(static_cast<double>(n)), delta2) * std::pow(static_cast<double>(n), -(0.5 * dimension - s));
    }

    void validate(const Geometry& g) const {
        if (n < 2) throw DomainError("bubble: n must be >= 2");
        if (g.dimension() != dimension) throw DomainError("bubble: dimension differs from geometry");
        if (g.kind != GeometryKind::torus) throw Unsupported("bubbles live on a torus");
        for (int a = 0; a < dimension; ++a) {
            const double L = g.side_lengths[static_cast<std::size_t>(a)];
            const double c = center.empty() ? 0.5 * L : center[static_cast<std::size_t>(a)];
            if (c - 1.0 / n < 0.0 || c + 1.0 / n > L) throw DomainError("bubble support leaves the cell");
        }
    }

    double x0(const Geometry& g, int axis) const {
        return center.empty() ? 0.5 * g.side_lengths[static_cast<std::size_t>(axis)]
                              : center[static_cast<std::size_t>(axis)];
    }

    // A phi(n (x - x0)) at a point.
    double profile(const Geometry& g, std::span<const double> x) const {
        std::array<double, 3> y{};
        for (int a = 0; a < dimension; ++a)
            y[static_cast<std::size_t>(a)] = n * (x[static_cast<std::size_t>(a)] - x0(g, a));
        return amplitude() * raised_cosine(std::span<const double>(y.data(), static_cast<std::size_t>(dimension)),
                                           bump_height);
    }
};

// Per-axis frequency needed so that phi(n .) is resolved: `factor` * pi * n in
// physical wavenumber (the raised cosine spectrum decays like |xi|^{-3}).
inline int bubble_required_frequency(const Bubble& b, const Geometry& g, double factor = 8.0) {
    return static_cast<int>(std::ceil(factor * std::numbers::pi * b.n / g.frequency_unit(0)));
}

inline std::size_t bubble_required_modes(const Bubble& b, const Geometry& g, double factor = 8.0) {
    const int K = bubble_required_frequency(b, g, factor);
    // torus modes with every |k_a| <= K  (the cube); ball counting would be smaller
    double count = 1.0;
    for (int a = 0; a < g.dimension(); ++a) count *= 2.0 * K + 1.0;
    return static_cast<std::size_t>(count);
}

namespace detail {

// Calls fn(flat index, point) over the grid in row-major order.
template <class Fn>
void for_each_point(const Geometry& g, const GridSampling& grid, Fn&& fn) {
    const int d = g.dimension();
    std::vector<std::vector<double>> xs;
    for (int a = 0; a < d; ++a) xs.push_back(grid_coordinates(g, grid, a));
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::array<double, 3> x{};
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = xs[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
        fn(flat, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < static_cast<std::size_t>(grid.points[static_cast<std::size_t>(a)])) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
}

inline void check_resolution(const Bubble& bub, const SpectralBasis& b, double factor) {
    const int K = bubble_required_frequency(bub, b.geometry(), factor);
    for (int k : b.max_frequency())
        if (k < K)
            throw ResolutionError("bubble n=" + std::to_string(bub.n) + " needs per-axis frequency " +
                                      std::to_string(K) + ", basis has " + std::to_string(k),
                                  static_cast<long>(bubble_required_modes(bub, b.geometry(), factor)));
}

} // namespace detail

inline std::vector<double> sample_bubble(const Bubble& bub, const Geometry& g, const GridSampling& grid) {
    std::vector<double> v(grid.size());
    detail::for_each_point(g, grid, [&](std::size_t i, std::span<const double> x) { v[i] = bub.profile(g, x); });
    return v;
}

// (A phi(n(x - x0)), 0) analyzed on the basis.
inline StatePair make_bubble_state(const Bubble& bub, const BasisPtr& b, double resolution_factor = 8.0) {
    bub.validate(b->geometry());
    detail::check_resolution(bub, *b, resolution_factor);
    const Transform tr(b, default_grid(*b));
    return {tr.analyze(sample_bubble(bub, b->geometry(), tr.grid())), SpectralField(b)};
}

// v_n(t, x) = A phi V(t A phi) and its time derivative (A phi)^2 V'(t A phi) at grid points.
struct ExplicitProfile {
    std::vector<double> v;
    std::vector<double> vt;
};

inline ExplicitProfile explicit_vn(const Bubble& bub, const OdeProfile& V, double t, const Geometry& g,
                                   const GridSampling& grid) {
    ExplicitProfile out{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
    detail::for_each_point(g, grid, [&](std::size_t i, std::span<const double> x) {
        const double a = bub.profile(g, x);
        out.v[i] = a * V.value(t * a);
        out.vt[i] = a * a * V.derivative(t * a);
    });
    return out;
}

inline StatePair explicit_vn_state(const Bubble& bub, const OdeProfile& V, double t, const BasisPtr& b) {
    const Transform tr(b, default_grid(*b));
    const auto e = explicit_vn(bub, V, t, b->geometry(), tr.grid());
    return {tr.analyze(e.v), tr.analyze(e.vt)};
}

struct SemiclassicalEnergyValue {
    double value = 0.0;
    double energy_bracket = 0.0;   // ||u_t||_{L2}^2 + ||grad u||_{L2}^2
    double h1_bracket = 0.0;       // ||u_t||_{H1}^2 + ||grad u||_{H1}^2
};

inline SemiclassicalEnergyValue semiclassical_energy(const StatePair& u, double n, double s) {
    const auto ev = u.basis().eigenvalues_sq();
    SemiclassicalEnergyValue e;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const double a = u.ut[i] * u.ut[i] + ev[i] * u.u[i] * u.u[i];
        e.energy_bracket += a;
        e.h1_bracket += (1.0 + ev[i]) * a;
    }
    e.value = std::pow(n, -(1.0 - s)) * std::sqrt(e.energy_bracket) + std::pow(n, -(2.0 - s)) * std::sqrt(e.h1_bracket);
    return e;
}

// ---------------------------------------------------------------------------
// Norm inflation

struct NormInflationOptions {
    int dimension = 1;
    double side = 2.0 * std::numbers::pi;
    double resolution_factor = 8.0;
    std::size_t max_modes = std::size_t{1} << 16;
    double dt = 2e-4;              // target step; adjusted to divide t_n
    double bump_height = 1.0;
    int threads = 1;
};

struct NormInflationRow {
    int n = 0;
    bool resolved = false;
    std::size_t modes = 0;
    long required_modes = 0;
    double kappa = 0.0;
    double t_n = 0.0;
    double u0_hs = std::numeric_limits<double>::quiet_NaN();
    double u_tn_hs = std::numeric_limits<double>::quiet_NaN();
    double v_tn_hs = std::numeric_limits<double>::quiet_NaN();
    double diff_hs = std::numeric_limits<double>::quiet_NaN();
    double energy_diff = std::numeric_limits<double>::quiet_NaN();   // E_n(u_n - v_n) at t_n
};

struct NormInflationResult {
    std::vector<NormInflationRow> rows;
    bool u0_decreasing = false;
    bool u_tn_increasing = false;
    double v_slope = std::numeric_limits<double>::quiet_NaN();    // d log||v_n(t_n)|| / d log log n
    double v_slope_target = 0.0;                                  // s delta2 - (s + 1) delta1
    double u0_over_kappa_spread = std::numeric_limits<double>::quiet_NaN();
};

inline NormInflationResult norm_inflation_experiment(double s, double delta1, double delta2,
                                                     const std::vector<int>& n_schedule,
                                                     const NormInflationOptions& opt = {}) {
    if (!(s > 0.0 && s < 0.5)) throw DomainError("norm inflation needs s in (0, 1/2)");
    const Geometry g = Geometry::torus(opt.dimension, opt.side);
    const OdeProfile V;
    NormInflationResult res;
    res.v_slope_target = s * delta2 - (s + 1.0) * delta1;
    res.rows.resize(n_schedule.size());
    parallel_for(n_schedule.size(), opt.threads, [&](std::size_t r) {
        Bubble bub;
        bub.n = n_schedule[r];
        bub.s = s;
        bub.delta1 = delta1;
        bub.delta2 = delta2;
        bub.dimension = opt.dimension;
        bub.bump_height = opt.bump_height;
        NormInflationRow& row = res.rows[r];
        row.n = bub.n;
        row.kappa = bub.kappa();
        row.t_n = bub.blowup_time();
        row.required_modes = static_cast<long>(bubble_required_modes(bub, g, opt.resolution_factor));
        if (static_cast<std::size_t>(row.required_modes) > opt.max_modes) return;  // unresolved
        const auto b = SpectralBasis::create(g, static_cast<std::size_t>(row.required_modes));
        row.modes = b->size();
        const auto f = make_bubble_state(bub, b, opt.resolution_factor);
        const int steps = std::max(1, static_cast<int>(std::ceil(row.t_n / opt.dt)));
        const auto traj = reference_solve(f, row.t_n, row.t_n / steps, {steps, 2.0});
        const auto vn = explicit_vn_state(bub, V, row.t_n, b);
        const StatePair diff = traj.back() - vn;
        row.u0_hs = sobolev_norm(f.u, s);
        row.u_tn_hs = sobolev_norm(traj.back().u, s);
        row.v_tn_hs = sobolev_norm(vn.u, s);
        row.diff_hs = sobolev_norm(diff.u, s);
        row.energy_diff = semiclassical_energy(diff, bub.n, s).value;
        row.resolved = true;
    });

    std::vector<const NormInflationRow*> ok;
    for (const auto& r : res.rows)
        if (r.resolved) ok.push_back(&r);
    if (ok.size() >= 2) {
        res.u0_decreasing = res.u_tn_increasing = true;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        std::vector<double> x, y;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            if (i > 0) {
                if (!(ok[i]->u0_hs < ok[i - 1]->u0_hs)) res.u0_decreasing = false;
                if (!(ok[i]->u_tn_hs > ok[i - 1]->u_tn_hs)) res.u_tn_increasing = false;
            }
            const double q = ok[i]->u0_hs / ok[i]->kappa;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            x.push_back(std::log(std::log(static_cast<double>(ok[i]->n))));
            y.push_back(std::log(ok[i]->v_tn_hs));
        }
        res.u0_over_kappa_spread = hi / lo - 1.0;
        res.v_slope = linear_fit(x, y).slope;
    }
    return res;
}

// ---------------------------------------------------------------------------
// ||psi(x) V(lambda phi(x))||_{H^s} / lambda^s on a torus

struct HsLowerBoundSetup {
    int dimension = 1;
    double side = 2.0 * std::numbers::pi;
    std::function<double(std::span<const double>)> psi;     // smooth, compactly supported
    std::function<double(std::span<const double>)> phase;   // phi
    std::function<double(double)> V = [](double x) { return std::cos(x); };
    double phase_gradient = 1.0;   // bound on |grad phi| over supp psi
    double psi_bandwidth = 40.0;   // extra wavenumber margin for psi

    // psi = raised cosine of radius r at the centre, phi = x_1 - centre.
    static HsLowerBoundSetup standard(int dim = 1, double radius = 1.0, double side = 2.0 * std::numbers::pi) {
        HsLowerBoundSetup st;
        st.dimension = dim;
        st.side = side;
        const double c = 0.5 * side;
        st.psi = [=](std::span<const double> x) {
            std::array<double, 3> y{};
            for (std::size_t a = 0; a < x.size(); ++a) y[a] = (x[a] - c) / radius;
            return raised_cosine(std::span<const double>(y.data(), x.size()));
        };
        st.phase = [=](std::span<const double> x) { return x[0] - c; };
        st.phase_gradient = 1.0;
        st.psi_bandwidth = 40.0 / radius;
        return st;
    }
};

struct HsLowerBoundRow {
    double lambda = 0.0;
    double hs_norm = 0.0;
    double ratio = 0.0;
    std::size_t modes = 0;
};

struct HsLowerBoundResult {
    std::vector<HsLowerBoundRow> rows;
    double min_ratio_upper = 0.0;     // over the upper half of the grid
    double spread_upper = 0.0;        // max/min - 1 over the upper half
    double psi_l2 = 0.0;
};

inline HsLowerBoundResult hs_lower_bound_check(const HsLowerBoundSetup& st, double s, std::vector<double> lambda_grid,
                                               int threads = 1) {
    if (!st.psi || !st.phase || !st.V) throw DomainError("hs_lower_bound_check: psi, phase and V are required");
    if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
    std::sort(lambda_grid.begin(), lambda_grid.end());
    const Geometry g = Geometry::torus(st.dimension, st.side);
    HsLowerBoundResult res;
    res.rows.resize(lambda_grid.size());
    parallel_for(lambda_grid.size(), threads, [&](std::size_t r) {
        const double lam = lambda_grid[r];
        if (!(lam > 0.0)) throw DomainError("lambda must be positive");
        const double kmax = (lam * st.phase_gradient + st.psi_bandwidth) / g.frequency_unit(0);
        const auto K = static_cast<std::size_t>(std::ceil(kmax));
        std::size_t N = 1;
        for (int a = 0; a < st.dimension; ++a) N *= 2 * K + 1;
        const auto b = SpectralBasis::create(g, N);
        const Transform tr(b, default_grid(*b));
        std::vector<double> v(tr.point_count());
        detail::for_each_point(g, tr.grid(), [&](std::size_t i, std::span<const double> x) {
            v[i] = st.psi(x) * st.V(lam * st.phase(x));
        });
        const auto f = tr.analyze(v);
        res.rows[r] = {lam, sobolev_norm(f, s), sobolev_norm(f, s) / std::pow(lam, s), b->size()};
    });
    {
        static constexpr int fine[] = {4096, 512, 96};
        const GridSampling grid{std::vector<int>(static_cast<std::size_t>(st.dimension), fine[st.dimension - 1])};
        double acc = 0.0;
        detail::for_each_point(g, grid, [&](std::size_t, std::span<const double> x) {
            const double p = st.psi(x);
            acc += p * p;
        });
        res.psi_l2 = std::sqrt(acc * g.volume() / static_cast<double>(grid.size()));
    }
    const std::size_t half = res.rows.size() / 2;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = half; i < res.rows.size(); ++i) {
        lo = std::min(lo, res.rows[i].ratio);
        hi = std::max(hi, res.rows[i].ratio);
    }
    res.min_ratio_upper = lo;
    res.spread_upper = hi / lo - 1.0;
    return res;
}

} // namespace rwave
