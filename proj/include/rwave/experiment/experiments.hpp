#pragma once

// The registered experiments. Each reads its parameters from a ConfigReader,
// then (when a context is given) runs and fills tables and a summary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rwave/experiment/config.hpp"
#include "rwave/experiment/output.hpp"
#include "rwave/illposed_lab.hpp"
#include "rwave/large_deviation.hpp"
#include "rwave/nonlinear_solver.hpp"
#include "rwave/wave_propagator.hpp"

namespace rwave::experiment {

struct Context {
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Outcome {
    std::vector<Table> tables;
    json summary = json::object();
};

using ExperimentFn = std::function<void(ConfigReader&, const Context*, Outcome&)>;

namespace detail {

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Random-datum block shared by averaging, chaos and local existence.
struct Datum {
    BasisPtr basis;
    StatePair f;
};

inline Datum read_datum(ConfigReader& r, const Geometry& g, double s, std::size_t N, double amplitude) {
    const double eps = positive<double>(r, "eps", 0.05);
    const double amp = positive<double>(r, "amplitude", amplitude);
    const bool velocity = r.get<bool>("velocity", true);
    const std::size_t n = positive<std::size_t>(r, "N", N);
    auto b = SpectralBasis::create(g, n);
    return {b, profile_pair(b, s, eps, amp, velocity)};
}

inline CoefficientVector read_coefficients(ConfigReader& r) {
    const auto c = r.require<std::vector<double>>("c");
    check(!c.empty(), r, "c", "must not be empty");
    double n2 = 0.0;
    for (double x : c) n2 += x * x;
    check(n2 > 0.0, r, "c", "must not be the zero vector");
    return CoefficientVector(c);
}

inline bool enumerable(const CoefficientVector& c, const RandomFamily& fam) {
    if (!fam.finite_support()) return false;
    return std::pow(static_cast<double>(fam.atoms().size()), static_cast<double>(c.size())) <=
           static_cast<double>(rwave::detail::enumeration_limit);
}

inline StatePair coefficient_pair(const BasisPtr& b, const std::vector<std::vector<double>>& u,
                                  const std::vector<std::vector<double>>& ut, ConfigReader& r) {
    StatePair f = StatePair::zero(b);
    auto fill = [&](SpectralField& out, const std::vector<std::vector<double>>& list, const char* key) {
        for (const auto& e : list) {
            check(e.size() == 2, r, key, "entries must be [rank, value] pairs");
            const double rank = e[0];
            check(rank >= 1 && rank <= static_cast<double>(b->size()) && rank == std::floor(rank), r, key,
                  "rank must be an integer in [1, N]");
            out[static_cast<std::size_t>(rank) - 1] += e[1];
        }
    };
    fill(f.u, u, "u0");
    fill(f.ut, ut, "ut0");
    return f;
}

} // namespace detail

// ---------------------------------------------------------------------------

inline void sogge_ratio_experiment(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 3);
    const auto N = positive<std::size_t>(r, "N", 200);
    const double p = r.get<double>("p", 4.0);
    check(p >= 1.0, r, "p", "must be >= 1");
    const double exponent = r.get<double>("exponent", g.has_boundary() ? 0.2 : 0.125);
    const auto reference = positive<std::size_t>(r, "reference_modes", 20);
    check(reference <= N, r, "reference_modes", "must not exceed N");
    const double os = r.get<double>("oversampling", 3.0);
    check(os >= 2.0, r, "oversampling", "must be >= 2");
    r.finish();
    if (!ctx) return;

    const auto b = SpectralBasis::create(g, N);
    const auto ratios = sogge_ratios(b, p, exponent, os);
    Table t{"sogge.csv", {"rank", "lambda", "lp_norm", "ratio", "running_max"}, {}, {}};
    auto plot = plot_table("sogge.plot.csv", "Prop 2.4: ||e_n||_Lp / (1+lambda_n^2)^exponent", "lambda", "ratio");
    double run = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        run = std::max(run, ratios[i]);
        if (i < reference) ref = run;
        const double lam = b->mode(i + 1).lambda();
        t.add({i + 1, lam, ratios[i] * std::pow(1.0 + lam * lam, exponent), ratios[i], run});
        plot.add({lam, ratios[i]});
    }
    out.tables = {t, plot};
    out.summary = {{"modes", b->size()},
                   {"max_ratio", run},
                   {"max_ratio_reference", ref},
                   {"bounded_by_reference_1_01", run <= 1.01 * ref}};
}

inline void deviation_experiment(ConfigReader& r, const Context* ctx, Outcome& out) {
    const RandomFamily fam = read_family(r, "family", "gaussian");
    const auto c = detail::read_coefficients(r);
    const auto lambdas = nonempty_list<double>(r, "lambda_grid", default_lambda_grid(c), true);
    const auto trials = positive<std::size_t>(r, "trials", 1000);
    const double z = positive<double>(r, "z", 1.96);
    const double alpha = positive<double>(r, "alpha", 0.5);
    const bool exact = r.get<bool>("exact", detail::enumerable(c, fam));
    check(!exact || detail::enumerable(c, fam), r, "exact", "needs a finite-support family with at most 2^20 outcomes");
    r.finish();
    if (!ctx) return;

    const auto x = sample_sums(c, fam, trials, ctx->seed, ctx->threads);
    Table t{"deviation.csv", {"lambda", "trials", "hits", "p_hat", "ci_low", "ci_high", "p_exact", "bound"}, {}, {}};
    auto plot = plot_table("deviation.plot.csv", "Lemma 3.1: P(|sum c_n l_n| > lambda)", "lambda", "p_hat");
    bool inside = true;
    for (double l : lambdas) {
        const auto e = tail_from_samples(x, l, z);
        const double pe = exact ? tail_probability_exact(c, fam, l) : std::numeric_limits<double>::quiet_NaN();
        if (exact && (pe < e.ci.low || pe > e.ci.high)) inside = false;
        t.add({l, e.trials, e.hits, e.p_hat, e.ci.low, e.ci.high, pe, 2.0 * std::exp(-alpha * l * l / c.norm_sq())});
        plot.add({l, e.p_hat});
    }
    out.tables = {t, plot};
    out.summary = {{"norm", c.norm()}, {"exact_available", exact}};
    if (exact) out.summary["exact_inside_ci"] = inside;
}

inline void khinchin_experiment(ConfigReader& r, const Context* ctx, Outcome& out) {
    const RandomFamily fam = read_family(r, "family", "gaussian");
    const auto c = detail::read_coefficients(r);
    const auto p_grid = nonempty_list<double>(r, "p_grid", {2, 4, 6, 8}, true);
    for (double p : p_grid) check(p >= 2.0, r, "p_grid", "entries must be >= 2");
    const bool can_exact = detail::enumerable(c, fam) || fam.kind == FamilyKind::gaussian;
    const auto mode_s = r.get<std::string>("mode", can_exact ? "exact" : "monte_carlo");
    check(mode_s == "exact" || mode_s == "monte_carlo", r, "mode", "must be 'exact' or 'monte_carlo'");
    check(mode_s != "exact" || can_exact, r, "mode", "exact mode needs an enumerable or gaussian family");
    const auto trials = positive<std::size_t>(r, "trials", 100000);
    const auto lambdas = nonempty_list<double>(r, "lambda_grid", default_lambda_grid(c), true);
    const auto k_grid = nonempty_list<int>(r, "k_grid", {1, 2, 3}, true);
    r.finish();
    if (!ctx) return;

    const MomentMode mode = mode_s == "exact" ? MomentMode::exact : MomentMode::monte_carlo;
    Table lp{"khinchin_lp.csv", {"p", "moment", "moment_se", "lp_norm", "ratio", "exact"}, {}, {}};
    auto plot = plot_table("khinchin_lp.plot.csv", "Lemma 3.1: ||sum c_n l_n||_Lp / (sqrt(p) ||c||)", "p", "ratio");
    double worst = 0.0;
    for (double p : p_grid) {
        const auto m = lp_moment_check(c, fam, p, mode, trials, ctx->seed, ctx->threads);
        worst = std::max(worst, m.ratio);
        lp.add({p, m.moment, m.moment_se, m.lp_norm, m.ratio, m.exact});
        plot.add({p, m.ratio});
    }
    const auto fit = khinchin_alpha_fit(c, fam, lambdas, trials, ctx->seed, ctx->threads);
    Table tail{"khinchin_tail.csv", {"lambda", "hits", "p_hat", "ci_low", "ci_high", "chernoff_bound"}, {}, {}};
    for (const auto& e : fit.table)
        tail.add({e.lambda, e.hits, e.p_hat, e.ci.low, e.ci.high,
                  2.0 * std::exp(-fit.alpha_chernoff * e.lambda * e.lambda / c.norm_sq())});
    Table mk{"khinchin_2k.csv", {"k", "ratio", "ratio_se", "combinatorial_bound", "within_bound"}, {}, {}};
    for (int k : k_grid) {
        const auto m = moment_2k_bound_check(fam, c, k, mode, trials, ctx->seed, ctx->threads);
        mk.add({k, m.ratio, m.ratio_se, m.combinatorial_bound, m.within_bound});
    }
    out.tables = {lp, plot, tail, mk};
    out.summary = {{"max_lp_ratio", worst},
                   {"alpha_chernoff", fit.alpha_chernoff},
                   {"c_hat", fit.c_hat},
                   {"alpha_grid", detail::finite_or_null(fit.alpha_grid)},
                   {"alpha_regression", detail::finite_or_null(fit.alpha_regression)}};
}

inline void averaging_like(ConfigReader& r, const Context* ctx, Outcome& out, bool chaos) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 3);
    const RandomFamily fam = read_family(r, "family", "gaussian");
    const double s = r.get<double>("s", 0.25);
    check(s > 0.0 && s < 1.0, r, "s", "must lie in (0, 1)");
    auto datum = detail::read_datum(r, g, s, 20, 1.0);
    const double T = chaos ? 1.0 : positive<double>(r, "T", 1.0);
    check(T <= 1.0, r, "T", "must lie in (0, 1]");
    const auto trials = positive<std::size_t>(r, "trials", chaos ? 1000 : 2000);
    check(trials >= 2, r, "trials", "must be >= 2");
    AveragingOptions opt;
    opt.time_steps = r.get<int>("time_steps", 0);
    check(opt.time_steps >= 0 && opt.time_steps % 2 == 0, r, "time_steps", "must be 0 (auto) or a positive even count");
    opt.oversampling = r.get<double>("oversampling", 3.0);
    check(opt.oversampling >= 2.0, r, "oversampling", "must be >= 2");
    std::vector<double> p_grid;
    if (chaos) {
        p_grid = nonempty_list<double>(r, "p_grid", {1, 2, 4, 8, 16}, true);
        for (double p : p_grid) check(p >= 1.0, r, "p_grid", "entries must be >= 1");
    } else {
        opt.lambda_points = r.get<int>("lambda_points", 8);
        check(opt.lambda_points >= 3, r, "lambda_points", "must be >= 3");
    }
    r.finish();
    if (!ctx) return;
    opt.seed = ctx->seed;
    opt.threads = ctx->threads;

    if (chaos) {
        const auto rows = chaos_lp_growth(datum.f, fam, s, p_grid, trials, opt);
        Table t{"chaos.csv", {"p", "lp_omega", "ratio"}, {}, {}};
        auto plot = plot_table("chaos.plot.csv", "Prop 4.3: ||X||_Lp(Omega) / sqrt(p)", "p", "ratio");
        double mx = 0.0;
        for (const auto& row : rows) {
            t.add({row.p, row.lp_omega, row.ratio});
            plot.add({row.p, row.ratio});
            mx = std::max(mx, row.ratio);
        }
        out.tables = {t, plot};
        out.summary = {{"modes", datum.basis->size()}, {"data_norm", pair_norm(datum.f, s)}, {"max_ratio", mx}};
        return;
    }

    const auto res = averaging_experiment(datum.f, fam, s, T, trials, g.has_boundary(), opt);
    Table per{"averaging_trials.csv", {"trial_id", "X"}, {}, {}};
    for (std::size_t i = 0; i < res.per_trial.size(); ++i) per.add({i, res.per_trial[i]});
    Table tail{"averaging_tail.csv", {"lambda", "hits", "p_hat", "se", "chebyshev_bound", "exp_fit"}, {}, {}};
    auto plot = plot_table("averaging_tail.plot.csv", "Prop 4.1: P(X > lambda), X the weighted space-time norm",
                           "lambda", "p_hat");
    for (const auto& row : res.tail) {
        tail.add({row.lambda, row.hits, row.p_hat, row.se, row.chebyshev_bound, row.exp_fit});
        plot.add({row.lambda, row.p_hat});
    }
    out.tables = {per, tail, plot};
    out.summary = {{"modes", datum.basis->size()},
                   {"exponent", res.exponent},
                   {"weight_power", res.weight_power},
                   {"data_norm", res.data_norm},
                   {"mean_power", res.mean_power},
                   {"mean_power_se", res.mean_power_se},
                   {"shape_ratio", res.shape_ratio},
                   {"r2_gaussian", detail::finite_or_null(res.fit_gaussian.r2)},
                   {"r2_power", detail::finite_or_null(res.fit_power.r2)},
                   {"chebyshev_ok", res.chebyshev_ok},
                   {"exponential_preferred", res.exponential_preferred}};
}

inline void strichartz_experiment(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 3);
    AdmissiblePair pair;
    pair.s = r.get<double>("s", 0.5);
    pair.p = r.get<double>("p", 4.0);
    pair.q = r.get<double>("q", 4.0);
    pair.boundary = g.has_boundary();
    try {
        pair.validate();
    } catch (const DomainError& e) {
        throw ConfigError(r.path("p"), e.what());
    }
    const auto cutoffs = nonempty_list<std::size_t>(r, "cutoffs", {8, 27, 64}, true);
    StrichartzOptions opt;
    opt.T = positive<double>(r, "T", 1.0);
    opt.time_steps = r.get<int>("time_steps", 0);
    check(opt.time_steps >= 0, r, "time_steps", "must be >= 0");
    opt.single_modes = r.get<std::size_t>("single_modes", 16);
    const auto trials = positive<std::size_t>(r, "trials", 50);
    r.finish();
    if (!ctx) return;
    opt.seed = ctx->seed;
    opt.threads = ctx->threads;

    const auto rows = strichartz_probe(g, pair, cutoffs, trials, opt);
    Table t{"strichartz.csv", {"cutoff", "max_random", "max_single_mode", "argmax_mode", "max_ratio"}, {}, {}};
    auto plot = plot_table("strichartz.plot.csv", "Prop 2.2: ||e^{it sqrt(-Delta)} f||_LpLq / ||f||_Hs", "cutoff",
                           "max_ratio");
    for (const auto& row : rows) {
        t.add({row.cutoff, row.max_random, row.max_single_mode, row.argmax_mode, row.max_ratio});
        plot.add({row.cutoff, row.max_ratio});
    }
    out.tables = {t, plot};
    out.summary = {{"max_ratio_last", rows.back().max_ratio}, {"max_ratio_first", rows.front().max_ratio}};
}

inline void local_existence_experiment_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 1);
    const RandomFamily fam = read_family(r, "family", "gaussian");
    const double s = r.get<double>("s", 0.3);
    check(s > 0.0 && s < 1.0, r, "s", "must lie in (0, 1)");
    auto datum = detail::read_datum(r, g, s, 64, 4.0);
    auto T_grid = nonempty_list<double>(r, "T_grid", {0.8, 0.4, 0.2, 0.1}, true);
    for (double T : T_grid) check(T <= 1.0, r, "T_grid", "entries must lie in (0, 1]");
    const auto trials = positive<std::size_t>(r, "trials", 500);
    LocalExistenceOptions opt;
    try {
        opt.rule = parse_lambda_rule(r.get<std::string>("rule", "picard_success"));
    } catch (const DomainError& e) {
        throw ConfigError(r.path("rule"), e.what());
    }
    opt.epsilon = positive<double>(r, "epsilon", 1.0);
    opt.delta = r.get<double>("delta", 0.0);
    check(opt.delta >= 0.0, r, "delta", "must be >= 0");
    {
        ConfigReader pr = r.child("picard");
        opt.picard.dt = pr.get<double>("dt", 0.0);
        check(opt.picard.dt >= 0.0, pr, "dt", "must be >= 0 (0 picks a CFL step)");
        opt.picard.cfl = positive<double>(pr, "cfl", 0.5);
        opt.picard.max_iter = positive<int>(pr, "max_iter", 60);
        opt.picard.tol = positive<double>(pr, "tol", 1e-10);
        opt.picard.sigma = pr.get<double>("sigma", default_sigma(s));
        pr.finish();
        r.set_resolved("picard", pr.resolved());
    }
    r.finish();
    if (!ctx) return;
    opt.seed = ctx->seed;
    opt.threads = ctx->threads;

    const auto res = local_existence_experiment(datum.f, fam, s, T_grid, trials, opt);
    Table t{"local_existence.csv",
            {"T", "trials", "successes", "fraction", "failure", "mean_iterations", "mean_lambda"}, {}, {}};
    auto plot = plot_table("local_existence.plot.csv", "Thm 1: P(Omega_T) >= 1 - C T^{1+delta}", "T", "fraction");
    for (const auto& row : res.rows) {
        t.add({row.T, row.trials, row.successes, row.fraction, row.failure, row.mean_iterations, row.mean_lambda});
        plot.add({row.T, row.fraction});
    }
    out.tables = {t, plot};
    out.summary = {{"modes", datum.basis->size()},
                   {"data_norm", pair_norm(datum.f, s)},
                   {"monotone", res.monotone},
                   {"fraction_smallest_T", res.rows.back().fraction},
                   {"failure_slope", detail::finite_or_null(res.slope)}};
}

inline void no_regularization_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 1);
    const RandomFamily fam = read_family(r, "family", "gaussian");
    const double s = r.get<double>("s", 0.3);
    const double eps = positive<double>(r, "eps", 0.1);
    const auto N = positive<std::size_t>(r, "N", 4096);
    const auto truncs = nonempty_list<std::size_t>(r, "truncations", {16, 32, 64, 128, 256, 512, 1024, 2048, 4096}, true);
    for (auto m : truncs) check(m <= N, r, "truncations", "entries must not exceed N");
    const int trials = positive<int>(r, "trials", 200);
    const bool control = r.get<bool>("control", true);
    r.finish();
    if (!ctx) return;

    const auto b = SpectralBasis::create(g, N);
    const auto res = no_regularization_experiment(divergent_profile(b, s, eps), s, eps, fam, truncs, trials,
                                                  ctx->seed, ctx->threads);
    NoRegularizationResult ctl;
    if (control)
        ctl = no_regularization_experiment(convergent_profile(b, s, eps), s, eps, fam, truncs, trials, ctx->seed,
                                           ctx->threads);
    Table per{"no_regularization_trials.csv", {"trial_id", "truncation", "partial_sum"}, {}, {}};
    for (const auto& row : res.rows) per.add({row.trial_id, row.truncation, row.partial_sum});
    Table sum{"no_regularization.csv",
              {"truncation", "deterministic", "min_over_trials", "max_over_trials", "control_deterministic",
               "control_min_over_trials"},
              {},
              {}};
    auto plot = plot_table("no_regularization.plot.csv",
                           "Lemma B.1: min over trials of the H^{s+eps} partial sum", "truncation", "min_over_trials");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < res.truncations.size(); ++j) {
        sum.add({res.truncations[j], res.deterministic[j], res.min_over_trials[j], res.max_over_trials[j],
                 control ? ctl.deterministic[j] : nan, control ? ctl.min_over_trials[j] : nan});
        plot.add({res.truncations[j], res.min_over_trials[j]});
    }
    out.tables = {per, sum, plot};
    const std::size_t last = res.truncations.size() - 1;
    out.summary = {{"min_growth_last_over_first", res.min_over_trials[last] / res.min_over_trials[0]},
                   {"truncation_ratio", static_cast<double>(res.truncations[last]) / res.truncations[0]},
                   {"all_monotone", res.all_monotone}};
    if (control && last > 0)
        out.summary["control_last_over_penultimate"] = ctl.min_over_trials[last] / ctl.min_over_trials[last - 1];
}

inline void norm_inflation_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const double s = r.get<double>("s", 0.3);
    check(s > 0.0 && s < 0.5, r, "s", "must lie in (0, 1/2)");
    const double d1 = positive<double>(r, "delta1", 0.01);
    const double d2 = positive<double>(r, "delta2", 0.2);
    const auto sched = nonempty_list<int>(r, "n_schedule", {8, 16, 32, 64}, true);
    for (int n : sched) check(n >= 2, r, "n_schedule", "entries must be >= 2");
    NormInflationOptions opt;
    opt.dimension = r.get<int>("dimension", 1);
    check(opt.dimension >= 1 && opt.dimension <= 3, r, "dimension", "must be 1, 2 or 3");
    opt.side = positive<double>(r, "side", 2.0 * std::numbers::pi);
    opt.resolution_factor = positive<double>(r, "resolution_factor", 8.0);
    opt.max_modes = positive<std::size_t>(r, "max_modes", std::size_t{1} << 16);
    opt.dt = positive<double>(r, "dt", 2e-4);
    opt.bump_height = positive<double>(r, "bump_height", 1.0);
    r.finish();
    if (!ctx) return;
    opt.threads = ctx->threads;

    const auto res = norm_inflation_experiment(s, d1, d2, sched, opt);
    Table t{"norm_inflation.csv",
            {"n", "resolved", "modes", "required_modes", "kappa", "t_n", "u0_hs", "u_tn_hs", "v_tn_hs", "diff_hs",
             "energy_diff"},
            {},
            {}};
    auto plot = plot_table("norm_inflation.plot.csv", "Prop A.1: ||u_n(t_n)||_Hs against n", "n", "u_tn_hs");
    std::size_t unresolved = 0;
    for (const auto& row : res.rows) {
        t.add({row.n, row.resolved ? "1" : "unresolved", row.modes, row.required_modes, row.kappa, row.t_n, row.u0_hs,
               row.u_tn_hs, row.v_tn_hs, row.diff_hs, row.energy_diff});
        if (row.resolved)
            plot.add({row.n, row.u_tn_hs});
        else
            ++unresolved;
    }
    out.tables = {t, plot};
    out.summary = {{"unresolved_rows", unresolved},
                   {"u0_decreasing", res.u0_decreasing},
                   {"u_tn_increasing", res.u_tn_increasing},
                   {"v_slope", detail::finite_or_null(res.v_slope)},
                   {"v_slope_target", res.v_slope_target},
                   {"u0_over_kappa_spread", detail::finite_or_null(res.u0_over_kappa_spread)}};
}

inline void hs_lower_bound_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const double s = r.get<double>("s", 0.25);
    check(s >= 0.0 && s < 1.0, r, "s", "must lie in [0, 1)");
    const auto lambdas = nonempty_list<double>(r, "lambda_grid", {1, 2, 4, 8, 16, 32, 64, 128}, true);
    const int dim = r.get<int>("dimension", 1);
    check(dim >= 1 && dim <= 3, r, "dimension", "must be 1, 2 or 3");
    const double radius = positive<double>(r, "radius", 1.0);
    check(radius < std::numbers::pi, r, "radius", "must be below half the torus side");
    r.finish();
    if (!ctx) return;

    const auto res = hs_lower_bound_check(HsLowerBoundSetup::standard(dim, radius), s, lambdas, ctx->threads);
    Table t{"hs_lower_bound.csv", {"lambda", "hs_norm", "ratio", "modes"}, {}, {}};
    auto plot = plot_table("hs_lower_bound.plot.csv", "Lemma A.4: ||psi V(lambda phi)||_Hs / lambda^s", "lambda",
                           "ratio");
    for (const auto& row : res.rows) {
        t.add({row.lambda, row.hs_norm, row.ratio, row.modes});
        plot.add({row.lambda, row.ratio});
    }
    out.tables = {t, plot};
    out.summary = {{"min_ratio_upper", res.min_ratio_upper},
                   {"spread_upper", res.spread_upper},
                   {"psi_l2", res.psi_l2},
                   {"l2_limit", res.psi_l2 / std::sqrt(2.0)}};
}

inline void picard_single_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 1);
    const auto N = positive<std::size_t>(r, "N", 9);
    const auto u0 = r.get<std::vector<std::vector<double>>>("u0", {{2.0, 0.01}});
    const auto ut0 = r.get<std::vector<std::vector<double>>>("ut0", {});
    PicardConfig cfg;
    cfg.T = positive<double>(r, "T", 0.5);
    cfg.dt = positive<double>(r, "dt", 0.005);
    cfg.max_iter = positive<int>(r, "max_iter", 60);
    cfg.tol = positive<double>(r, "tol", 1e-10);
    cfg.sigma = r.get<double>("sigma", 0.5);
    const double ref_dt = positive<double>(r, "reference_dt", 5e-4);
    const double steps = cfg.T / cfg.dt;
    check(std::abs(steps - std::round(steps)) <= 1e-9 * steps, r, "dt", "must divide T");
    const double rsteps = cfg.T / ref_dt;
    check(std::abs(rsteps - std::round(rsteps)) <= 1e-9 * rsteps, r, "reference_dt", "must divide T");
    const auto b = SpectralBasis::create(g, N);
    const StatePair f = detail::coefficient_pair(b, u0, ut0, r);
    r.finish();
    if (!ctx) return;

    const auto p = picard_solve(f, cfg);
    const long stride = std::lround(cfg.dt / ref_dt);
    const auto ref = reference_solve(f, cfg.T, ref_dt, {static_cast<int>(std::max(1L, stride)), 2.0});
    Table it{"picard_iterations.csv", {"iteration", "contraction_ratio"}, {}, {}};
    for (std::size_t i = 0; i < p.report.contraction_ratios.size(); ++i)
        it.add({i + 2, p.report.contraction_ratios[i]});
    Table tr{"picard_trajectory.csv", {"t", "picard_h1", "reference_h1", "h1_discrepancy"}, {}, {}};
    auto plot = plot_table("picard_trajectory.plot.csv", "Prop 5.1: H1 gap between Picard and the splitting solver",
                           "t", "h1_discrepancy");
    const bool aligned = stride >= 1 && ref.size() == p.u.size();
    double gap_T = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < p.u.size(); ++j) {
        const double a = sobolev_norm(p.u.states[j].u, 1.0);
        double bnorm = std::numeric_limits<double>::quiet_NaN(), gap = bnorm;
        if (aligned) {
            bnorm = sobolev_norm(ref.states[j].u, 1.0);
            gap = sobolev_norm(p.u.states[j].u - ref.states[j].u, 1.0);
        }
        tr.add({p.u.time(j), a, bnorm, gap});
        plot.add({p.u.time(j), gap});
    }
    gap_T = sobolev_norm(p.u.back().u - ref.back().u, 1.0);
    out.tables = {it, tr, plot};
    out.summary = {{"converged", p.report.converged},
                   {"diverged", p.report.diverged},
                   {"iterations", p.report.iterations},
                   {"h1_discrepancy_at_T", gap_T},
                   {"lambda_used", p.report.lambda_used}};
}

inline void reference_convergence_cfg(ConfigReader& r, const Context* ctx, Outcome& out) {
    const Geometry g = read_geometry(r, "geometry", GeometryKind::torus, 1);
    const auto N = positive<std::size_t>(r, "N", 9);
    const auto u0 = r.get<std::vector<std::vector<double>>>("u0", {{2.0, 0.8}, {5.0, 0.5}});
    const auto ut0 = r.get<std::vector<std::vector<double>>>("ut0", {{3.0, 0.3}});
    const double T = positive<double>(r, "T", 1.0);
    auto dts = nonempty_list<double>(r, "dt_grid", {0.02, 0.01, 0.005}, true);
    check(dts.size() >= 3, r, "dt_grid", "needs at least three step sizes");
    const double energy_dt = positive<double>(r, "energy_dt", 1e-3);
    for (double dt : dts) {
        const double m = T / dt;
        check(std::abs(m - std::round(m)) <= 1e-9 * m, r, "dt_grid", "every step must divide T");
    }
    const double em = T / energy_dt;
    check(std::abs(em - std::round(em)) <= 1e-9 * em, r, "energy_dt", "must divide T");
    const double a = r.get<double>("constant_amplitude", 1.0);
    check(a >= 0.0, r, "constant_amplitude", "must be >= 0 (0 skips the constant-data check)");
    check(a == 0.0 || g.kind == GeometryKind::torus, r, "constant_amplitude", "constant data needs a torus");
    const double periods = positive<double>(r, "constant_periods", 2.0);
    const double cdt = positive<double>(r, "constant_dt", 1e-4);
    const auto b = SpectralBasis::create(g, N);
    const StatePair f = detail::coefficient_pair(b, u0, ut0, r);
    r.finish();
    if (!ctx) return;

    std::sort(dts.begin(), dts.end(), std::greater<>());
    std::vector<StatePair> finals;
    for (double dt : dts) finals.push_back(reference_solve(f, T, dt).back());
    Table rich{"richardson.csv", {"dt", "h1_diff_to_next", "ratio"}, {}, {}};
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) diffs.push_back(sobolev_norm(finals[i].u - finals[i + 1].u, 1.0));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < dts.size(); ++i)
        rich.add({dts[i], i < diffs.size() ? diffs[i] : nan,
                  i + 1 < diffs.size() && diffs[i + 1] > 0 ? diffs[i] / diffs[i + 1] : nan});

    const CubicNonlinearity nl(b);
    const long esteps = std::lround(T / energy_dt);
    int every = std::max(1, static_cast<int>(std::lround(0.01 / energy_dt)));
    while (esteps % every) --every;
    const auto traj = reference_solve(f, T, energy_dt, {every, 2.0});
    const double e0 = energy(f, nl);
    Table en{"energy.csv", {"t", "energy", "relative_drift"}, {}, {}};
    auto eplot = plot_table("energy.plot.csv", "Eq. (1): energy drift of the splitting solver", "t", "relative_drift");
    double drift = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double e = energy(traj.states[j], nl);
        const double rel = e0 != 0.0 ? e / e0 - 1.0 : e;
        drift = std::max(drift, std::abs(rel));
        en.add({traj.time(j), e, rel});
        eplot.add({traj.time(j), rel});
    }
    out.tables = {rich, en, eplot};
    out.summary = {{"richardson_ratio", diffs.size() >= 2 ? json(diffs[0] / diffs[1]) : json(nullptr)},
                   {"max_energy_drift", drift}};

    if (a > 0.0) {
        const OdeProfile V;
        const auto cb = SpectralBasis::create(g, 1);
        const double root_vol = std::sqrt(g.volume());
        StatePair c{a * root_vol * SpectralField::unit(cb, 1), SpectralField(cb)};
        const double horizon = periods * V.period() / a;
        long steps = std::max(1L, std::lround(horizon / cdt));
        const int stride = std::max(1, static_cast<int>(steps / 2000));
        steps = (steps + stride - 1) / stride * stride;
        const auto ct = reference_solve(c, horizon, horizon / static_cast<double>(steps), {stride, 2.0});
        Table ctab{"constant_data.csv", {"t", "u", "a_V_at", "abs_error"}, {}, {}};
        double err = 0.0;
        for (std::size_t j = 0; j < ct.size(); ++j) {
            const double t = ct.time(j), u = ct.states[j].u[0] / root_vol, v = a * V.value(a * t);
            err = std::max(err, std::abs(u - v));
            ctab.add({t, u, v, std::abs(u - v)});
        }
        out.tables.push_back(ctab);
        out.summary["constant_data_sup_error"] = err;
        out.summary["ode_period"] = V.period();
    }
}

} // namespace rwave::experiment
