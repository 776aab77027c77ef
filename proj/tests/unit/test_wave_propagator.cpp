#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rwave/wave_propagator.hpp"

using namespace rwave;

namespace {

StatePair random_pair(const BasisPtr& b, std::uint64_t seed) {
    const auto r = sample_realization(RandomFamily::gaussian(), seed, 0, b->size());
    return {SpectralField(b, r.h), SpectralField(b, r.l)};
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(FreeEvolution, SingleModeAndZeroMode) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const StatePair f{SpectralField::unit(b, 5), SpectralField(b)};
    const double t = 0.73;
    const auto u = free_evolution(f, t);
    const double lam = b->mode(5).lambda();
    EXPECT_NEAR(u.u[4], std::cos(t * lam), 1e-15);
    EXPECT_NEAR(u.ut[4], -lam * std::sin(t * lam), 1e-15);
    const StatePair z{SpectralField(b), SpectralField::unit(b, 1)};
    const auto zt = free_evolution(z, 2.5);
    EXPECT_EQ(zt.u[0], 2.5);
    EXPECT_EQ(zt.ut[0], 1.0);
}

TEST(FreeEvolution, GroupLawEnergyReversal) {
    for (const auto& g : {Geometry::torus(2), Geometry::dirichlet_box(3), Geometry::neumann_box(1)}) {
        auto b = SpectralBasis::create(g, 50);
        const auto f = random_pair(b, 3);
        const auto a = free_evolution(free_evolution(f, 0.4), 1.1);
        const auto c = free_evolution(f, 1.5);
        EXPECT_LE(max_abs_diff(a.u, c.u), 1e-10);
        EXPECT_LE(max_abs_diff(a.ut, c.ut), 1e-10);
        EXPECT_NEAR(linear_energy(c) / linear_energy(f), 1.0, 1e-10);
        const auto back = free_evolution(free_evolution(f, -2.0), 2.0);
        EXPECT_LE(max_abs_diff(back.u, f.u), 1e-10);
    }
}

TEST(TimeWeights, IntegratePolynomials) {
    for (int m : {1, 2, 3, 4, 5, 7, 10}) {
        const double h = 0.3;
        const auto w = time_weights(m, h);
        double s0 = 0, s3 = 0;
        for (int j = 0; j <= m; ++j) s0 += w[j], s3 += w[j] * std::pow(j * h, m == 1 ? 1 : 3);
        EXPECT_NEAR(s0, m * h, 1e-13);
        const double T = m * h;
        EXPECT_NEAR(s3, m == 1 ? T * T / 2 : std::pow(T, 4) / 4, 1e-12);
    }
}

TEST(Duhamel, ConstantSource) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const TimeGrid grid{2.0, 400};
    Trajectory<SpectralField> src{grid, {}};
    SpectralField g(b, std::vector<double>(b->size(), 1.0));
    for (int j = 0; j <= grid.steps; ++j) src.states.push_back(g);
    const auto all = duhamel_all(src);
    for (int m : {1, 37, 200, 400}) {
        const double t = grid.time(m);
        const auto d = duhamel(src, t);
        for (std::size_t i = 0; i < b->size(); ++i) {
            const double lam = std::sqrt(b->eigenvalues_sq()[i]);
            const double exact = lam == 0 ? t * t / 2 : (1 - std::cos(t * lam)) / (lam * lam);
            EXPECT_NEAR(d[i], exact, 1e-8) << "m=" << m << " i=" << i;
            EXPECT_NEAR(all.states[m].u[i], d[i], 1e-12);
            const double dexact = lam == 0 ? t : std::sin(t * lam) / lam;
            // the first step is a single trapezoid panel
            EXPECT_NEAR(all.states[m].ut[i], dexact, m == 1 ? 1e-6 : 1e-8);
        }
    }
    EXPECT_THROW(duhamel(src, 2.5), DomainError);
    EXPECT_THROW(duhamel(src, 0.0013), DomainError);
}

TEST(Duhamel, OscillatorySourceResonantAndNot) {
    // g(tau) = cos(w tau) e_n: int_0^t sin(l(t-tau))/l cos(w tau) = (cos wt - cos lt)/(l^2 - w^2), or t sin(lt)/(2l) at w = l
    auto b = SpectralBasis::create(Geometry::torus(1), 5);  // lambda = 0, 1, 1, 2, 2
    const TimeGrid grid{3.0, 600};
    for (double w : {1.0, 2.0, 3.7}) {
        Trajectory<SpectralField> src{grid, {}};
        for (int j = 0; j <= grid.steps; ++j) {
            SpectralField g(b);
            for (std::size_t i = 1; i < b->size(); ++i) g[i] = std::cos(w * grid.time(j));
            src.states.push_back(g);
        }
        const auto d = duhamel_all(src).back().u;
        const double t = 3.0;
        for (std::size_t i = 1; i < b->size(); ++i) {
            const double l = std::sqrt(b->eigenvalues_sq()[i]);
            const double exact = std::abs(l - w) < 1e-12 ? t * std::sin(l * t) / (2 * l)
                                                         : (std::cos(w * t) - std::cos(l * t)) / (l * l - w * w);
            EXPECT_NEAR(d[i], exact, 1e-8);
        }
    }
}

TEST(Duhamel, SecondDerivativeReproducesSource) {
    auto b = SpectralBasis::create(Geometry::torus(1), 7);
    const TimeGrid grid{1.0, 200};
    Trajectory<SpectralField> src{grid, {}};
    for (int j = 0; j <= grid.steps; ++j) {
        const double t = grid.time(j);
        SpectralField g(b);
        for (std::size_t i = 0; i < b->size(); ++i) g[i] = std::exp(-t) * (1.0 + i) + t * t;
        src.states.push_back(g);
    }
    const auto d = duhamel_all(src);
    const double h = grid.dt();
    for (int j : {50, 101, 150}) {
        for (std::size_t i = 0; i < b->size(); ++i) {
            const double dd = (d.states[j + 1].u[i] - 2 * d.states[j].u[i] + d.states[j - 1].u[i]) / (h * h);
            const double resid = dd + b->eigenvalues_sq()[i] * d.states[j].u[i] - src.states[j][i];
            EXPECT_LE(std::abs(resid), 50 * h * h);
        }
    }
}

TEST(SpacetimeNorm, StaticAndCosine) {
    auto b = SpectralBasis::create(Geometry::torus(2), 10);
    const auto f = random_pair(b, 4).u;
    const TimeGrid grid{0.8, 16};
    Trajectory<SpectralField> tr{grid, std::vector<SpectralField>(17, f)};
    const double lq = lp_norm(synthesize(f, default_grid(*b)), 3.0, b->geometry(), default_grid(*b));
    EXPECT_NEAR(spacetime_norm(tr, 5.0, 3.0), std::pow(0.8, 0.2) * lq, 1e-12);

    const double T = 2 * std::numbers::pi;
    const TimeGrid g2{T, 256};
    Trajectory<SpectralField> c{g2, {}};
    for (int j = 0; j <= 256; ++j) c.states.push_back(std::cos(g2.time(j)) * SpectralField::unit(b, 1));
    EXPECT_NEAR(spacetime_norm(c, 4.0, 2.0), std::pow(3 * std::numbers::pi / 4, 0.25), 1e-8);
}

TEST(SpacetimeNorm, FubiniWhenPEqualsQ) {
    auto b = SpectralBasis::create(Geometry::torus(1), 7);
    const auto f = random_pair(b, 5);
    const TimeGrid grid{1.0, 64};
    const auto tr = positions(free_trajectory(f, grid));
    const auto sg = default_grid(*b);
    const auto w = time_weights(64, grid.dt());
    double flat = 0;
    for (int j = 0; j <= 64; ++j) {
        const auto v = synthesize(tr.states[j], sg);
        for (double x : v) flat += w[j] * std::pow(std::abs(x), 4) * (2 * std::numbers::pi / sg.size());
    }
    EXPECT_NEAR(spacetime_norm(tr, 4.0, 4.0), std::pow(flat, 0.25), 1e-12);
}

TEST(Admissible, Validation) {
    EXPECT_NO_THROW((AdmissiblePair{4, 4, 0.5, false}.validate()));
    EXPECT_NO_THROW((AdmissiblePair{INFINITY, 2, 0.0, false}.validate()));
    try {
        AdmissiblePair{4, 5, 0.5, false}.validate();
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("scaling line"), std::string::npos);
    }
    try {
        AdmissiblePair{2, 3, 0.5, false}.validate();  // 1/2 + 1 != 3/2 - 1/2
        FAIL();
    } catch (const DomainError&) {
    }
    // boundary: s = 8/21 with (21/4, 14/3)
    EXPECT_NO_THROW((AdmissiblePair{21.0 / 4, 14.0 / 3, 2.0 / 3, true}.validate()));
    try {
        AdmissiblePair{3.0, 4.5, 0.5, false}.validate();  // on the line, p < 4
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("2/s"), std::string::npos);
    }
}

TEST(Averaging, SingleModeFactorizes) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const StatePair f{SpectralField::unit(b, 6), SpectralField(b)};
    const auto fam = certify(RandomFamily::gaussian());
    AveragingOptions opt;
    opt.seed = 3;
    const auto res = averaging_experiment(f, fam, 0.25, 1.0, 50, false, opt);
    // at s = 1/4 the weight power is zero, so X = |h_6| times the unweighted norm of e_6
    const double base = averaging_norms(f, certify(RandomFamily::bernoulli()), 0.0, 4.0, 1.0, 1, opt)[0];
    for (std::size_t t = 0; t < 50; ++t) {
        const double h = sample_realization(fam, 3, t, b->size()).h[5];
        EXPECT_NEAR(res.per_trial[t], std::abs(h) * base, 1e-12 * base);
    }
    const auto bern = averaging_experiment(f, certify(RandomFamily::bernoulli()), 0.25, 1.0, 20, false, opt);
    for (double v : bern.per_trial) EXPECT_DOUBLE_EQ(v, bern.per_trial[0]);
}

TEST(Averaging, HomogeneityAndThreads) {
    auto b = SpectralBasis::create(Geometry::torus(2), 20);
    const auto f = random_pair(b, 8);
    const auto fam = certify(RandomFamily::gaussian());
    AveragingOptions opt;
    opt.seed = 4;
    const auto a = averaging_norms(f, fam, 0.0, 4.0, 1.0, 40, opt);
    const auto c = averaging_norms(4.0 * f, fam, 0.0, 4.0, 1.0, 40, opt);
    opt.threads = 3;
    const auto d = averaging_norms(f, fam, 0.0, 4.0, 1.0, 40, opt);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(c[i], 4 * a[i], 1e-12 * a[i]);
        EXPECT_EQ(a[i], d[i]);
    }
}

TEST(Averaging, RejectsUncertified) {
    auto b = SpectralBasis::create(Geometry::torus(1), 5);
    const auto f = random_pair(b, 1);
    EXPECT_THROW(averaging_experiment(f, RandomFamily::gaussian(), 0.25, 1.0, 10, false), Unsupported);
}

TEST(Chaos, SingleModeGaussianMoments) {
    auto b = SpectralBasis::create(Geometry::torus(1), 5);
    const StatePair f{SpectralField::unit(b, 4), SpectralField(b)};
    const auto fam = certify(RandomFamily::gaussian());
    AveragingOptions opt;
    opt.seed = 12;
    const std::vector<double> ps{2.0, 4.0};
    const auto rows = chaos_lp_growth(f, fam, 0.25, ps, 200000, opt);
    const double D = averaging_norms(f, certify(RandomFamily::bernoulli()), 0.0, 4.0, 1.0, 1, opt)[0];
    EXPECT_NEAR(rows[0].lp_omega / D, 1.0, 0.01);
    EXPECT_NEAR(rows[1].lp_omega / D, std::pow(3.0, 0.25), 0.02);
    const auto bern = chaos_lp_growth(f, certify(RandomFamily::bernoulli()), 0.25, ps, 10, opt);
    EXPECT_NEAR(bern[0].lp_omega, bern[1].lp_omega, 1e-12);
}

TEST(Strichartz, EnergyPairIsOne) {
    const std::vector<std::size_t> Ns{5, 11};
    StrichartzOptions opt;
    const auto rows = strichartz_probe(Geometry::torus(1), AdmissiblePair{INFINITY, 2, 0.0, false}, Ns, 5, opt);
    for (const auto& r : rows) {
        EXPECT_NEAR(r.max_random, 1.0, 1e-12);
        EXPECT_NEAR(r.max_single_mode, 1.0, 1e-12);
    }
}

TEST(Strichartz, SingleModeClosedForm) {
    const AdmissiblePair pr{4, 4, 0.5, false};
    StrichartzOptions opt;
    opt.single_modes = 3;
    const std::vector<std::size_t> Ns{9};
    const auto rows = strichartz_probe(Geometry::dirichlet_box(1), pr, Ns, 0, opt);
    // Dirichlet modes: ||e_n||_4 = (3/(2 pi))^{1/4}, lambda = n; maximum is at the smallest of the probed ranks
    const double c = std::pow(3 / (2 * std::numbers::pi), 0.25) * std::pow(2.0, 0.25);
    EXPECT_NEAR(rows[0].max_single_mode, c / std::pow(1 + 49.0, 0.25), 1e-9);
    EXPECT_EQ(rows[0].argmax_mode, 7u);
    EXPECT_THROW(strichartz_probe(Geometry::torus(1), AdmissiblePair{4, 5, 0.5, false}, Ns, 1, opt), DomainError);
}
