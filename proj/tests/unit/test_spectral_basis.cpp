#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rwave/spectral_basis.hpp"

using namespace rwave;

namespace {

std::vector<double> random_coeffs(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    std::vector<double> c(n);
    for (auto& x : c) x = g(gen);
    return c;
}

std::vector<Geometry> all_geometries() {
    std::vector<Geometry> out;
    for (int d = 1; d <= 3; ++d) {
        out.push_back(Geometry::torus(d));
        out.push_back(Geometry::dirichlet_box(d));
        out.push_back(Geometry::neumann_box(d));
    }
    Geometry odd{GeometryKind::torus, {1.0, 3.0}};
    out.push_back(odd);
    out.push_back(Geometry{GeometryKind::dirichlet_box, {2.0, 0.7}});
    return out;
}

} // namespace

TEST(EnumerateModes, TorusOneDimFirstThree) {
    const auto m = enumerate_modes(Geometry::torus(1), 3);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m[0].eigenvalue_sq, 0.0);
    EXPECT_DOUBLE_EQ(m[1].eigenvalue_sq, 1.0);
    EXPECT_DOUBLE_EQ(m[2].eigenvalue_sq, 1.0);
    EXPECT_EQ(m[1].parity[0], 0);
    EXPECT_EQ(m[2].parity[0], 1);
}

TEST(EnumerateModes, TorusThreeDimFirstShellHasSixModes) {
    const auto m = enumerate_modes(Geometry::torus(3), 2);
    ASSERT_EQ(m.size(), 7u);  // constant + full lambda^2 = 1 shell
    for (std::size_t i = 1; i < 7; ++i) EXPECT_DOUBLE_EQ(m[i].eigenvalue_sq, 1.0);
    // brute-force count of real modes with |k|^2 = 1
    int count = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c)
                if (a * a + b * b + c * c == 1) ++count;
    EXPECT_EQ(count, 6);
}

TEST(EnumerateModes, DirichletSquares) {
    const auto m = enumerate_modes(Geometry::dirichlet_box(1), 4);
    ASSERT_EQ(m.size(), 4u);
    for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(m[static_cast<std::size_t>(n - 1)].eigenvalue_sq, n * n);
}

TEST(EnumerateModes, BoundaryZeroModes) {
    EXPECT_GT(enumerate_modes(Geometry::dirichlet_box(2), 5)[0].eigenvalue_sq, 0.0);
    EXPECT_EQ(enumerate_modes(Geometry::neumann_box(2), 5)[0].eigenvalue_sq, 0.0);
}

TEST(EnumerateModes, SortedAndNeverSplitsEigenspace) {
    for (const auto& g : all_geometries()) {
        const auto m = enumerate_modes(g, 37);
        ASSERT_GE(m.size(), 37u);
        for (std::size_t i = 1; i < m.size(); ++i) EXPECT_LE(m[i - 1].eigenvalue_sq, m[i].eigenvalue_sq);
        const auto bigger = enumerate_modes(g, m.size() + 1);
        EXPECT_GT(bigger[m.size()].eigenvalue_sq, m.back().eigenvalue_sq);
    }
}

TEST(EnumerateModes, CapacityError) {
    EXPECT_THROW(enumerate_modes(Geometry::torus(1), 100, 10), CapacityError);
    EXPECT_THROW(enumerate_modes(Geometry::torus(1), 0), DomainError);
}

TEST(Transform, ConstantModeSynthesis) {
    auto b = SpectralBasis::create(Geometry::torus(2), 10);
    const auto grid = default_grid(*b);
    const auto v = synthesize(SpectralField::unit(b, 1), grid);
    const double expect = 1.0 / std::sqrt(b->geometry().volume());
    for (double x : v) EXPECT_NEAR(x, expect, 1e-14);
}

TEST(Transform, PointValuesMatchClosedForm) {
    for (const auto& g : all_geometries()) {
        if (g.dimension() != 1) continue;
        auto b = SpectralBasis::create(g, 9);
        const auto grid = default_grid(*b);
        const auto x = grid_coordinates(g, grid, 0);
        const double L = g.side_lengths[0];
        Transform tr(b, grid);
        for (std::size_t r = 1; r <= b->size(); ++r) {
            const auto v = tr.synthesize(SpectralField::unit(b, r));
            const Mode& m = b->mode(r);
            const int k = m.multi_index[0];
            for (std::size_t j = 0; j < x.size(); ++j) {
                double e;
                if (g.kind == GeometryKind::dirichlet_box)
                    e = std::sqrt(2 / L) * std::sin(k * std::numbers::pi * x[j] / L);
                else if (g.kind == GeometryKind::neumann_box)
                    e = k == 0 ? 1 / std::sqrt(L) : std::sqrt(2 / L) * std::cos(k * std::numbers::pi * x[j] / L);
                else if (k == 0)
                    e = 1 / std::sqrt(L);
                else
                    e = std::sqrt(2 / L) * (m.parity[0] == 0 ? std::cos(2 * std::numbers::pi * k * x[j] / L)
                                                             : std::sin(2 * std::numbers::pi * k * x[j] / L));
                EXPECT_NEAR(v[j], e, 1e-12) << to_string(g.kind) << " rank " << r;
            }
        }
    }
}

TEST(Transform, RoundTripAndParseval) {
    for (const auto& g : all_geometries()) {
        auto b = SpectralBasis::create(g, 60);
        Transform tr(b, default_grid(*b));
        for (unsigned t = 0; t < 5; ++t) {
            SpectralField f(b, random_coeffs(b->size(), 17 + t));
            const auto vals = tr.synthesize(f);
            const auto back = tr.analyze(vals);
            double err = 0, nrm = 0;
            for (std::size_t i = 0; i < f.size(); ++i) err += std::pow(back[i] - f[i], 2), nrm += f[i] * f[i];
            EXPECT_LE(std::sqrt(err / nrm), 1e-12) << to_string(g.kind) << " d=" << g.dimension();
            EXPECT_NEAR(lp_norm(vals, 2, tr.cell_volume()) / sobolev_norm(f, 0), 1.0, 1e-12);
        }
    }
}

TEST(Transform, Orthonormality) {
    for (const auto& g : all_geometries()) {
        auto b = SpectralBasis::create(g, 20);
        Transform tr(b, default_grid(*b));
        for (std::size_t r = 1; r <= b->size(); ++r) {
            const auto c = tr.analyze_coeffs(tr.synthesize(SpectralField::unit(b, r)));
            for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], i + 1 == r ? 1.0 : 0.0, 1e-12);
        }
    }
}

TEST(Transform, AliasingRefused) {
    auto b = SpectralBasis::create(Geometry::torus(1), 11);  // k up to 5
    EXPECT_THROW(Transform(b, GridSampling{{10}}), AliasingError);
    EXPECT_NO_THROW(Transform(b, GridSampling{{11}}));
    auto d = SpectralBasis::create(Geometry::dirichlet_box(1), 8);
    EXPECT_THROW(Transform(d, GridSampling{{8}}), AliasingError);
}

TEST(Transform, ProductToSum) {
    // cos(x) * sin(2x) = (sin(3x) + sin(x)) / 2 on the 2 pi torus with sqrt(1/pi) normalization.
    auto b = SpectralBasis::create(Geometry::torus(1), 7);
    Transform tr(b, default_grid(*b));
    auto rank_of = [&](int k, int par) {
        for (const auto& m : b->modes())
            if (m.multi_index[0] == k && m.parity[0] == par) return m.index;
        return std::size_t{0};
    };
    const auto a = tr.synthesize(SpectralField::unit(b, rank_of(1, 0)));
    const auto c = tr.synthesize(SpectralField::unit(b, rank_of(2, 1)));
    std::vector<double> prod(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) prod[j] = a[j] * c[j];
    const auto f = tr.analyze(prod);
    const double amp = 0.5 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto r = i + 1;
        const double expect = (r == rank_of(3, 1) || r == rank_of(1, 1)) ? amp : 0.0;
        EXPECT_NEAR(f[i], expect, 1e-13);
    }
}

TEST(Norms, SobolevExamples) {
    auto b = SpectralBasis::create(Geometry::torus(1), 5);
    EXPECT_EQ(sobolev_norm(SpectralField(b), 0.3), 0.0);
    // neumann interval of length pi/sqrt(3): second mode has lambda^2 = 3
    auto bb = SpectralBasis::create(Geometry{GeometryKind::neumann_box, {std::numbers::pi / std::sqrt(3.0)}}, 2);
    ASSERT_NEAR(bb->eigenvalues_sq()[1], 3.0, 1e-12);
    auto e = SpectralField::unit(bb, 2);
    EXPECT_NEAR(sobolev_norm(e, 0.5), std::sqrt(2.0), 1e-14);
    SpectralField two(bb, {1.0, 1.0});
    EXPECT_NEAR(sobolev_norm(two, 1.0), std::sqrt(5.0), 1e-14);
}

TEST(Norms, SobolevMonotoneInS) {
    auto b = SpectralBasis::create(Geometry::torus(2), 40);
    SpectralField f(b, random_coeffs(b->size(), 3));
    double prev = 0;
    for (double s = -1; s <= 2; s += 0.25) {
        const double v = sobolev_norm(f, s);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Norms, BesselPower) {
    auto bb = SpectralBasis::create(Geometry{GeometryKind::neumann_box, {std::numbers::pi / std::sqrt(3.0)}}, 2);
    auto e = SpectralField::unit(bb, 2);
    EXPECT_NEAR(bessel_power(e, 1.0)[1], 2.0, 1e-14);
    auto b = SpectralBasis::create(Geometry::torus(3), 50);
    SpectralField f(b, random_coeffs(b->size(), 9));
    const auto g = bessel_power(bessel_power(f, -1.0), 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(g[i], f[i], 1e-12 * std::abs(f[i]) + 1e-15);
    const auto id = bessel_power(f, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(id[i], f[i]);
}

TEST(Norms, LpConstantAndDirichletL4) {
    auto b = SpectralBasis::create(Geometry::torus(2), 5);
    const auto grid = default_grid(*b);
    std::vector<double> c(grid.size(), -2.5);
    EXPECT_NEAR(lp_norm(c, 3.0, b->geometry(), grid), 2.5 * std::pow(b->geometry().volume(), 1.0 / 3), 1e-12);
    const auto r = sogge_ratios(SpectralBasis::create(Geometry::dirichlet_box(1), 40), 4.0, 0.0);
    for (double x : r) EXPECT_NEAR(x, std::pow(3.0 / (2 * std::numbers::pi), 0.25), 1e-12);
    EXPECT_THROW(lp_norm(c, 0.5, 1.0), DomainError);
}

TEST(Norms, L5TorusModeMatchesFineQuadrature) {
    auto b = SpectralBasis::create(Geometry::torus(1), 9);
    const double got = sogge_ratio(Geometry::torus(1), 9, 5.0, 0.0);
    const int k = b->mode(9).multi_index[0];
    // fine midpoint rule on |sqrt(1/pi) sin(kx)|^5
    const int M = 200000;
    double acc = 0;
    for (int j = 0; j < M; ++j) {
        const double x = (j + 0.5) * 2 * std::numbers::pi / M;
        acc += std::pow(std::abs(std::sin(k * x) / std::sqrt(std::numbers::pi)), 5);
    }
    const double ref = std::pow(acc * 2 * std::numbers::pi / M, 0.2);
    EXPECT_NEAR(got / ref, 1.0, 1e-8);
}

TEST(Norms, SoggeL2IsOne) {
    for (const auto& g : all_geometries()) {
        const auto r = sogge_ratios(SpectralBasis::create(g, 15), 2.0, 0.0);
        for (double x : r) EXPECT_NEAR(x, 1.0, 1e-12);
    }
}
