#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rwave/illposed_lab.hpp"
#include "rwave/nonlinear_solver.hpp"

using namespace rwave;

namespace {

std::size_t rank_of(const SpectralBasis& b, int k, int parity) {
    for (const auto& m : b.modes())
        if (m.multi_index[0] == k && m.parity[0] == parity) return m.index;
    return 0;
}

double h1_distance(const StatePair& a, const StatePair& b) { return sobolev_norm(a.u - b.u, 1.0); }

} // namespace

TEST(Sigma, DefaultRule) {
    EXPECT_EQ(default_sigma(0.25), 0.5);
    EXPECT_NEAR(default_sigma(0.3), 0.65, 1e-12);
    EXPECT_EQ(default_sigma(0.6), 0.9);
}

TEST(Cubic, SingleModeProducesTrigIdentityOnly) {
    // (c cos x)^3 = c^3 (3 cos x + cos 3x)/4 with c = 1/sqrt(pi)
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const CubicNonlinearity nl(b);
    const auto g = nl.cube(SpectralField::unit(b, rank_of(*b, 1, 0)));
    const double c = 1 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double expect = 0;
        if (i + 1 == rank_of(*b, 1, 0)) expect = 0.75 * c * c * c / c;
        if (i + 1 == rank_of(*b, 3, 0)) expect = 0.25 * c * c * c / c;
        EXPECT_NEAR(g[i], expect, 1e-14) << i;
    }
    // Dirichlet box: (sqrt(2/pi) sin x)^3 = c^3 (3 sin x - sin 3x)/4, c = sqrt(2/pi)
    auto d = SpectralBasis::create(Geometry::dirichlet_box(1), 5);
    const auto h = CubicNonlinearity(d).cube(SpectralField::unit(d, 1));
    const double cd = std::sqrt(2 / std::numbers::pi);
    EXPECT_NEAR(h[0], 0.75 * cd * cd, 1e-14);
    EXPECT_NEAR(h[2], -0.25 * cd * cd, 1e-14);
    EXPECT_NEAR(h[1], 0.0, 1e-14);
    EXPECT_NEAR(h[3], 0.0, 1e-14);
}

TEST(Picard, ZeroData) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    PicardConfig cfg;
    cfg.T = 0.5;
    const auto r = picard_solve(StatePair::zero(b), cfg);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 1);
    for (const auto& s : r.u.states) EXPECT_EQ(sobolev_norm(s.u, 0), 0.0);
}

TEST(Picard, KVanishesAtTimeZero) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    StatePair f{0.3 * SpectralField::unit(b, 2), SpectralField(b)};
    PicardConfig cfg;
    const auto grid = cfg.time_grid(*b);
    Trajectory<StatePair> v{grid, std::vector<StatePair>(grid.steps + 1, StatePair::zero(b))};
    const auto k = apply_K(f, v, cfg);
    EXPECT_EQ(sobolev_norm(k.states[0].u, 0), 0.0);
    EXPECT_GT(sobolev_norm(k.back().u, 0), 0.0);
    const auto z = apply_K(StatePair::zero(b), v, cfg);
    for (const auto& s : z.states) EXPECT_EQ(sobolev_norm(s.u, 0), 0.0);
}

TEST(Picard, FirstIterateClosedForm) {
    // f = (a e_0, 0) on the torus: u_free = a/sqrt(2pi) constant, K(0) = -(a c)^3 t^2/2 / c in the constant mode
    auto b = SpectralBasis::create(Geometry::torus(1), 5);
    const double a = 0.2, c = 1 / std::sqrt(2 * std::numbers::pi);
    StatePair f{a * SpectralField::unit(b, 1), SpectralField(b)};
    PicardConfig cfg;
    cfg.T = 0.4;
    cfg.dt = 0.01;
    const auto grid = cfg.time_grid(*b);
    Trajectory<StatePair> v{grid, std::vector<StatePair>(grid.steps + 1, StatePair::zero(b))};
    const auto k = apply_K(f, v, cfg);
    const double t = 0.4;
    EXPECT_NEAR(k.back().u[0], -std::pow(a * c, 3) / c * t * t / 2, 1e-15);

    // f = (a e_k cos-mode, 0): source cos^3(lambda tau) cos^3(k x) with both trig identities; compare against a fine direct quadrature
    const auto rk = rank_of(*b, 2, 0);  // cos 6x lies outside the basis
    const double lam = 2;
    StatePair g{a * SpectralField::unit(b, rk), SpectralField(b)};
    cfg.dt = 0.001;
    const auto grid2 = cfg.time_grid(*b);
    Trajectory<StatePair> v2{grid2, std::vector<StatePair>(grid2.steps + 1, StatePair::zero(b))};
    const auto k2 = apply_K(g, v2, cfg);
    // projection of (a c' cos(lam t) cos 2x)^3 onto the cos 2x mode: (a c')^3 cos^3(lam t) * (3/4) / c'
    const double cp = 1 / std::sqrt(std::numbers::pi);
    const double amp = std::pow(a * cp, 3) * 0.75 / cp;
    // int_0^t sin(lam(t-tau))/lam cos^3(lam tau) dtau with cos^3 = (3 cos + cos 3)/4
    auto resonant = [&](double t) { return t * std::sin(lam * t) / (2 * lam); };
    auto offres = [&](double w, double t) { return (std::cos(w * t) - std::cos(lam * t)) / (lam * lam - w * w); };
    const double exact = -amp * (0.75 * resonant(t) + 0.25 * offres(3 * lam, t));
    EXPECT_NEAR(k2.back().u[rk - 1], exact, 1e-12);
}

TEST(Reference, ZeroDataAndConstantData) {
    auto b = SpectralBasis::create(Geometry::torus(1), 3);
    const auto z = reference_solve(StatePair::zero(b), 1.0, 0.01);
    EXPECT_EQ(sobolev_norm(z.back().u, 0), 0.0);

    // constant data a: u(t) = a V(a t); coefficient of e_0 is u sqrt(2 pi)
    const double a = 1.0, c = std::sqrt(2 * std::numbers::pi);
    StatePair f{a * c * SpectralField::unit(b, 1), SpectralField(b)};
    const OdeProfile V;
    const double T = 2.0;
    const auto tr = reference_solve(f, T, 1e-4, {100});
    double err = 0;
    for (std::size_t j = 0; j < tr.size(); ++j) {
        const double t = tr.time(j);
        err = std::max(err, std::abs(tr.states[j].u[0] / c - a * V.value(a * t)));
    }
    EXPECT_LE(err, 1e-6);
}

TEST(Reference, SecondOrderAndEnergy) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    StatePair f{0.8 * SpectralField::unit(b, 2) + 0.5 * SpectralField::unit(b, 5), 0.3 * SpectralField::unit(b, 3)};
    const double T = 1.0;
    const auto u1 = reference_solve(f, T, 0.02).back();
    const auto u2 = reference_solve(f, T, 0.01).back();
    const auto u3 = reference_solve(f, T, 0.005).back();
    const double ratio = h1_distance(u1, u2) / h1_distance(u2, u3);
    EXPECT_NEAR(ratio, 4.0, 0.3);

    const CubicNonlinearity nl(b);
    const auto tr = reference_solve(f, T, 0.001, {10});
    const double e0 = energy(f, nl);
    double drift = 0;
    for (const auto& s : tr.states) drift = std::max(drift, std::abs(energy(s, nl) / e0 - 1));
    EXPECT_LE(drift, 1e-6);

    // time reversal
    StatePair end = tr.back();
    end.ut *= -1.0;
    auto back = reference_solve(end, T, 0.001).back();
    back.ut *= -1.0;
    EXPECT_LE(h1_distance(back, f), 1e-6);
}

TEST(Picard, AgreesWithReference) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    for (double amp : {0.01, 0.1}) {
        for (double T : {0.25, 0.5}) {
            StatePair f{amp * SpectralField::unit(b, 2), SpectralField(b)};
            PicardConfig cfg;
            cfg.T = T;
            cfg.dt = 0.005;
            cfg.sigma = 0.5;
            const auto p = picard_solve(f, cfg);
            ASSERT_TRUE(p.report.converged);
            const auto r = reference_solve(f, T, 0.0005);
            const double d = h1_distance(p.u.back(), r.back());
            EXPECT_LE(d, std::max(1e-6, 10 * (cfg.dt * cfg.dt + cfg.tol))) << amp << " " << T;
            // fixed point consistency
            const CubicNonlinearity nl(b);
            const auto kv = apply_K(FreeEvolutionCache(f, p.v.grid, nl), p.v, nl);
            Trajectory<StatePair> diff = kv;
            for (std::size_t j = 0; j < diff.size(); ++j) diff.states[j] -= p.v.states[j];
            EXPECT_LE(x_proxy_norm(diff, cfg.sigma, nl), cfg.tol * x_proxy_norm(p.v, cfg.sigma, nl) * 1.0001);
        }
    }
}

TEST(Picard, LargeDataDiverges) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    StatePair f{30.0 * SpectralField::unit(b, 1), SpectralField(b)};
    PicardConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.01;
    const auto r = picard_solve(f, cfg);
    EXPECT_FALSE(r.report.converged);
    ASSERT_FALSE(r.report.contraction_ratios.empty());
    EXPECT_GE(r.report.contraction_ratios.back(), 1.0);
}

TEST(Picard, ConfigValidation) {
    auto b = SpectralBasis::create(Geometry::torus(1), 3);
    PicardConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 0.3;
    EXPECT_THROW(cfg.time_grid(*b), DomainError);
    cfg.dt = 0.1;
    cfg.tol = 0;
    EXPECT_THROW(cfg.time_grid(*b), DomainError);
}

TEST(LocalExistence, TrivialCases) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const auto fam = RandomFamily::gaussian();
    LocalExistenceOptions opt;
    const auto z = local_existence_experiment(StatePair::zero(b), fam, 0.3, {0.4, 0.2}, 5, opt);
    for (const auto& r : z.rows) EXPECT_EQ(r.fraction, 1.0);
    opt.rule = LambdaRule::threshold;
    opt.epsilon = 1e300;
    const auto f = profile_pair(b, 0.3, 0.05, 5.0);
    const auto t = local_existence_experiment(f, fam, 0.3, {0.8, 0.1}, 10, opt);
    for (const auto& r : t.rows) EXPECT_EQ(r.fraction, 1.0);
}

TEST(LocalExistence, BernoulliSingleModeIsAllOrNothing) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    StatePair f{4.0 * SpectralField::unit(b, 3), SpectralField(b)};
    LocalExistenceOptions opt;
    opt.picard.dt = 0.0;
    const auto r = local_existence_experiment(f, RandomFamily::bernoulli(), 0.3, {0.8, 0.4, 0.2}, 12, opt);
    for (const auto& row : r.rows) EXPECT_TRUE(row.fraction == 0.0 || row.fraction == 1.0);
}
