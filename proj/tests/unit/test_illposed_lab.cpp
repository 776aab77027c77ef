#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rwave/illposed_lab.hpp"

using namespace rwave;

namespace {

double period_oracle() {
    boost::math::quadrature::tanh_sinh<double> q;
    const double I = q.integrate([](double v) { return 1.0 / std::sqrt(1.0 - v * v * v * v); }, 0.0, 1.0);
    return 4.0 * std::sqrt(2.0) * I;
}

} // namespace

TEST(OdeV, InitialEnergyPeriod) {
    const OdeProfile V;
    EXPECT_EQ(V.value(0.0), 1.0);
    EXPECT_EQ(V.derivative(0.0), 0.0);
    EXPECT_LE(V.max_energy_error(), 1e-10);
    EXPECT_NEAR(V.period() / period_oracle(), 1.0, 1e-6);
    EXPECT_NEAR(V.period(), 7.4163, 1e-4);
    std::vector<double> t;
    for (int i = 0; i < 500; ++i) t.push_back(-20 + 0.0837 * i);
    const auto s = ode_V(t, V);
    EXPECT_LE(s.max_energy_error, 1e-10);
    // periodicity and evenness
    EXPECT_NEAR(V.value(1.3), V.value(1.3 + 3 * V.period()), 1e-12);
    EXPECT_NEAR(V.value(-1.3), V.value(1.3), 1e-12);
}

TEST(OdeV, InterpolantSatisfiesOde) {
    const OdeProfile V;
    const double h = 1e-3;
    for (double t : {0.37, 2.1, 5.55, 11.0}) {
        const double dd = (V.value(t + h) - 2 * V.value(t) + V.value(t - h)) / (h * h);
        EXPECT_NEAR(dd + std::pow(V.value(t), 3), 0.0, 1e-6);
    }
}

TEST(Bubble, ScalingAndZeroVelocity) {
    const Geometry g = Geometry::torus(1);
    double prev_q = 0;
    for (int n : {8, 16, 32, 64}) {
        Bubble bub;
        bub.n = n;
        bub.s = 0.3;
        const auto b = SpectralBasis::create(g, bubble_required_modes(bub, g));
        const auto f = make_bubble_state(bub, b);
        EXPECT_EQ(sobolev_norm(f.ut, 0), 0.0);
        // ||phi||_{L2}^2 = 3/4 for the 1D raised cosine
        const double l2 = bub.kappa() * std::pow(double(n), -bub.s) * std::sqrt(0.75);
        EXPECT_NEAR(sobolev_norm(f.u, 0) / l2, 1.0, 0.01);
        const double q = sobolev_norm(f.u, bub.s) / bub.kappa();
        if (prev_q > 0) { EXPECT_NEAR(q / prev_q, 1.0, 0.1); }
        prev_q = q;
    }
}

TEST(Bubble, RefusesUnresolved) {
    Bubble bub;
    bub.n = 64;
    const auto b = SpectralBasis::create(Geometry::torus(1), 101);
    try {
        make_bubble_state(bub, b);
        FAIL();
    } catch (const ResolutionError& e) {
        EXPECT_GT(e.required, 101);
    }
}

TEST(ExplicitVn, TimeZeroIsBubbleData) {
    const Geometry g = Geometry::torus(1);
    Bubble bub;
    bub.n = 8;
    const OdeProfile V;
    const auto b = SpectralBasis::create(g, bubble_required_modes(bub, g));
    const auto grid = default_grid(*b);
    const auto e = explicit_vn(bub, V, 0.0, g, grid);
    const auto data = sample_bubble(bub, g, grid);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(e.v[i], data[i]);
}

TEST(ExplicitVn, PointwiseOdeResidual) {
    const Geometry g = Geometry::torus(1);
    Bubble bub;
    bub.n = 16;
    const OdeProfile V;
    const GridSampling grid{{257}};
    const double t = 0.3, h = 1e-3;
    const auto a = explicit_vn(bub, V, t - h, g, grid), c = explicit_vn(bub, V, t, g, grid),
               d = explicit_vn(bub, V, t + h, g, grid);
    for (std::size_t i = 0; i < c.v.size(); ++i) {
        const double tt = (a.v[i] - 2 * c.v[i] + d.v[i]) / (h * h);
        EXPECT_NEAR(tt + c.v[i] * c.v[i] * c.v[i], 0.0, 1e-4 * (1 + std::pow(std::abs(c.v[i]), 3)));
    }
}

TEST(Semiclassical, Examples) {
    const auto b = SpectralBasis::create(Geometry::torus(1), 9);
    EXPECT_EQ(semiclassical_energy(StatePair::zero(b), 8, 0.3).value, 0.0);
    const StatePair e{SpectralField::unit(b, 7), SpectralField(b)};
    const double lam = b->mode(7).lambda(), n = 8, s = 0.3;
    const double expect = std::pow(n, -(1 - s)) * lam + std::pow(n, -(2 - s)) * std::sqrt(lam * lam * (1 + lam * lam));
    EXPECT_NEAR(semiclassical_energy(e, n, s).value, expect, 1e-14);
    const StatePair w{SpectralField(b, {0.1, 0.3, -0.2, 0.5, 0.0, 1.0, -1.0, 0.25, 0.7}),
                      SpectralField(b, {0.0, -0.3, 0.2, 0.1, 0.4, 0.0, 0.3, 0.6, -0.1})};
    EXPECT_NEAR(semiclassical_energy(-2.5 * w, n, s).value, 2.5 * semiclassical_energy(w, n, s).value, 1e-13);
    EXPECT_LE(semiclassical_energy(w + e, n, s).value,
              semiclassical_energy(w, n, s).value + semiclassical_energy(e, n, s).value + 1e-14);
}

TEST(HsLowerBound, L2LimitAndStability) {
    const auto st = HsLowerBoundSetup::standard(1, 1.0);
    const auto r0 = hs_lower_bound_check(st, 0.0, {4, 8, 16, 32, 64, 128});
    EXPECT_NEAR(r0.psi_l2, std::sqrt(0.75), 1e-8);
    EXPECT_NEAR(r0.rows.back().ratio / (r0.psi_l2 / std::sqrt(2.0)), 1.0, 0.05);
    const auto r1 = hs_lower_bound_check(st, 0.25, {1, 2, 4, 8, 16, 32, 64, 128});
    EXPECT_GT(r1.min_ratio_upper, 0.0);
    EXPECT_LE(r1.spread_upper, 0.25);
    // small lambda: bounded by the trivial H^s norm of psi V(lambda phi)
    for (const auto& row : r1.rows)
        if (row.lambda <= 1) { EXPECT_LE(row.hs_norm, 10.0); }
}
