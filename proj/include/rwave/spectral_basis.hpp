#pragma once

// Geometries with explicit Laplace spectra and the coefficient <-> grid
// transforms built on them.
//
// Every geometry uses a real, L2-normalized, tensor-product eigenbasis:
//   torus          1/sqrt(L), sqrt(2/L) cos(2 pi k x / L), sqrt(2/L) sin(2 pi k x / L)
//   dirichlet_box  sqrt(2/L) sin(k pi x / L),  k >= 1
//   neumann_box    1/sqrt(L), sqrt(2/L) cos(k pi x / L)
// Torus grids are x_j = j L / G, box grids are cell midpoints (j + 1/2) L / G,
// so the periodic (resp. even/odd reflected) trapezoid rule is exact for every
// trigonometric product of degree below the number of samples per period.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwave/errors.hpp"
#include "rwave/fft.hpp"

namespace rwave {

enum class GeometryKind { torus, dirichlet_box, neumann_box };

inline std::string_view to_string(GeometryKind k) {
    switch (k) {
    case GeometryKind::torus: return "torus";
    case GeometryKind::dirichlet_box: return "dirichlet_box";
    case GeometryKind::neumann_box: return "neumann_box";
    }
    return "?";
}

inline GeometryKind parse_geometry_kind(std::string_view s) {
    if (s == "torus") return GeometryKind::torus;
    if (s == "dirichlet_box" || s == "dirichlet") return GeometryKind::dirichlet_box;
    if (s == "neumann_box" || s == "neumann") return GeometryKind::neumann_box;
    throw DomainError("unknown geometry kind '" + std::string(s) + "'");
}

struct Geometry {
    GeometryKind kind = GeometryKind::torus;
    std::vector<double> side_lengths{2.0 * std::numbers::pi};

    static Geometry torus(int dim, double side = 2.0 * std::numbers::pi) {
        return make(GeometryKind::torus, dim, side);
    }
    static Geometry dirichlet_box(int dim, double side = std::numbers::pi) {
        return make(GeometryKind::dirichlet_box, dim, side);
    }
    static Geometry neumann_box(int dim, double side = std::numbers::pi) {
        return make(GeometryKind::neumann_box, dim, side);
    }
    static Geometry make(GeometryKind kind, int dim, double side) {
        Geometry g{kind, std::vector<double>(static_cast<std::size_t>(std::max(dim, 0)), side)};
        g.validate();
        return g;
    }

    int dimension() const { return static_cast<int>(side_lengths.size()); }
    bool has_boundary() const { return kind != GeometryKind::torus; }
    bool has_zero_mode() const { return kind != GeometryKind::dirichlet_box; }

    double volume() const {
        return std::accumulate(side_lengths.begin(), side_lengths.end(), 1.0, std::multiplies<>());
    }

    // Frequency unit per axis: eigenvalue is sum_a (k_a * unit_a)^2.
    double frequency_unit(int axis) const {
        const double L = side_lengths[static_cast<std::size_t>(axis)];
        return kind == GeometryKind::torus ? 2.0 * std::numbers::pi / L : std::numbers::pi / L;
    }

    void validate() const {
        if (dimension() < 1 || dimension() > 3)
            throw DomainError("geometry dimension must be 1, 2 or 3");
        for (double L : side_lengths)
            if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("side lengths must be positive");
    }

    bool operator==(const Geometry&) const = default;
};

struct Mode {
    std::size_t index = 0;          // 1-based rank in the global ordering
    std::vector<int> multi_index;   // per-axis frequency k_a >= 0
    std::vector<int> parity;        // torus: 0 = cos/constant, 1 = sin; boxes: all 0
    double eigenvalue_sq = 0.0;

    double lambda() const { return std::sqrt(eigenvalue_sq); }
};

inline constexpr std::size_t default_mode_cap = std::size_t{1} << 22;

namespace detail {

inline void collect_modes(const Geometry& g, double radius_sq, std::vector<Mode>& out) {
    const int d = g.dimension();
    std::vector<int> kmax(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
        kmax[static_cast<std::size_t>(a)] =
            static_cast<int>(std::floor(std::sqrt(radius_sq) / g.frequency_unit(a) + 1e-9));
    const int kmin = g.kind == GeometryKind::dirichlet_box ? 1 : 0;
    std::vector<int> k(static_cast<std::size_t>(d), kmin);
    for (int a = 0; a < d; ++a)
        if (kmax[static_cast<std::size_t>(a)] < kmin) return;

    while (true) {
        double ev = 0.0;
        for (int a = 0; a < d; ++a) {
            const double w = k[static_cast<std::size_t>(a)] * g.frequency_unit(a);
            ev += w * w;
        }
        if (ev <= radius_sq * (1.0 + 1e-12)) {
            if (g.kind == GeometryKind::torus) {
                // one real mode per choice of cos/sin on every non-constant axis
                std::vector<int> nz;
                for (int a = 0; a < d; ++a)
                    if (k[static_cast<std::size_t>(a)] > 0) nz.push_back(a);
                const int combos = 1 << nz.size();
                for (int mask = 0; mask < combos; ++mask) {
                    Mode m{0, k, std::vector<int>(static_cast<std::size_t>(d), 0), ev};
                    for (std::size_t b = 0; b < nz.size(); ++b)
                        m.parity[static_cast<std::size_t>(nz[b])] = (mask >> (nz.size() - 1 - b)) & 1;
                    out.push_back(std::move(m));
                }
            } else {
                out.push_back(Mode{0, k, std::vector<int>(static_cast<std::size_t>(d), 0), ev});
            }
        }
        int a = d - 1;
        while (a >= 0) {
            auto& ka = k[static_cast<std::size_t>(a)];
            if (ka < kmax[static_cast<std::size_t>(a)]) {
                ++ka;
                break;
            }
            ka = kmin;
            --a;
        }
        if (a < 0) break;
    }
}

} // namespace detail

// Modes sorted by eigenvalue, ties broken lexicographically on
// (multi_index, parity). The cutoff is rounded up so that a degenerate
// eigenspace is never split.
inline std::vector<Mode> enumerate_modes(const Geometry& g, std::size_t n, std::size_t cap = default_mode_cap) {
    g.validate();
    if (n < 1) throw DomainError("enumerate_modes: N must be >= 1");
    if (n > cap) throw CapacityError("requested " + std::to_string(n) + " modes, cap is " + std::to_string(cap));

    double unit_min = g.frequency_unit(0);
    for (int a = 1; a < g.dimension(); ++a) unit_min = std::min(unit_min, g.frequency_unit(a));
    // Weyl-style first guess, doubled until enough modes are inside the ball.
    double radius = unit_min * (std::pow(static_cast<double>(n), 1.0 / g.dimension()) + 2.0);
    std::vector<Mode> modes;
    while (true) {
        modes.clear();
        detail::collect_modes(g, radius * radius, modes);
        if (modes.size() >= n) break;
        radius *= 1.6;
    }

    // Snap numerically equal eigenvalues so that degenerate spaces compare equal.
    std::sort(modes.begin(), modes.end(),
              [](const Mode& a, const Mode& b) { return a.eigenvalue_sq < b.eigenvalue_sq; });
    for (std::size_t i = 1; i < modes.size(); ++i) {
        const double prev = modes[i - 1].eigenvalue_sq;
        if (std::abs(modes[i].eigenvalue_sq - prev) <= 1e-12 * std::max(1.0, prev))
            modes[i].eigenvalue_sq = prev;
    }
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.eigenvalue_sq != b.eigenvalue_sq) return a.eigenvalue_sq < b.eigenvalue_sq;
        if (a.multi_index != b.multi_index) return a.multi_index < b.multi_index;
        return a.parity < b.parity;
    });

    std::size_t keep = n;
    while (keep < modes.size() && modes[keep].eigenvalue_sq == modes[n - 1].eigenvalue_sq) ++keep;
    if (keep > cap) throw CapacityError("eigenspace boundary pushes cutoff past cap");
    modes.resize(keep);
    for (std::size_t i = 0; i < modes.size(); ++i) modes[i].index = i + 1;
    return modes;
}

class SpectralBasis;
using BasisPtr = std::shared_ptr<const SpectralBasis>;

// Immutable ordered mode list; shared between all fields built on it.
class SpectralBasis {
public:
    SpectralBasis(Geometry g, std::size_t n, std::size_t cap = default_mode_cap)
        : geometry_(std::move(g)), modes_(enumerate_modes(geometry_, n, cap)) {
        eig_.reserve(modes_.size());
        for (const auto& m : modes_) eig_.push_back(m.eigenvalue_sq);
        max_freq_.assign(static_cast<std::size_t>(geometry_.dimension()), 0);
        for (const auto& m : modes_)
            for (std::size_t a = 0; a < max_freq_.size(); ++a)
                max_freq_[a] = std::max(max_freq_[a], m.multi_index[a]);
    }

    static BasisPtr create(Geometry g, std::size_t n, std::size_t cap = default_mode_cap) {
        return std::make_shared<const SpectralBasis>(std::move(g), n, cap);
    }

    const Geometry& geometry() const { return geometry_; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<Mode>& modes() const { return modes_; }
    const Mode& mode(std::size_t rank) const { return modes_.at(rank - 1); }
    std::span<const double> eigenvalues_sq() const { return eig_; }
    const std::vector<int>& max_frequency() const { return max_freq_; }
    double max_lambda() const { return std::sqrt(eig_.back()); }

    bool same_as(const SpectralBasis& o) const {
        return this == &o || (geometry_ == o.geometry_ && size() == o.size());
    }

private:
    Geometry geometry_;
    std::vector<Mode> modes_;
    std::vector<double> eig_;
    std::vector<int> max_freq_;
};

// Real function as coefficients over a SpectralBasis.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(BasisPtr basis) : basis_(std::move(basis)), coeffs_(basis_->size(), 0.0) {}
    SpectralField(BasisPtr basis, std::vector<double> coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != basis_->size())
            throw LengthMismatch("coefficient vector has length " + std::to_string(coeffs_.size()) +
                                 ", basis has " + std::to_string(basis_->size()));
        for (double c : coeffs_)
            if (!std::isfinite(c)) throw DomainError("non-finite coefficient");
    }

    // Field with a single unit coefficient at 1-based rank n.
    static SpectralField unit(BasisPtr basis, std::size_t rank) {
        SpectralField f(std::move(basis));
        f.coeffs_.at(rank - 1) = 1.0;
        return f;
    }

    const SpectralBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    std::size_t size() const { return coeffs_.size(); }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    SpectralField& operator+=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (double& c : coeffs_) c *= a;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

    void check_compatible(const SpectralField& o) const {
        if (!basis_ || !o.basis_ || !basis_->same_as(*o.basis_))
            throw LengthMismatch("fields live on different bases");
    }

private:
    BasisPtr basis_;
    std::vector<double> coeffs_;
};

// Points per axis of a uniform sampling grid.
struct GridSampling {
    std::vector<int> points;

    std::size_t size() const {
        std::size_t n = 1;
        for (int p : points) n *= static_cast<std::size_t>(p);
        return n;
    }
    bool operator==(const GridSampling&) const = default;
};

// Uniform grid with `factor` times the points needed to hold the retained span.
inline GridSampling oversampled_grid(const SpectralBasis& b, double factor = 3.0) {
    GridSampling g;
    const bool torus = b.geometry().kind == GeometryKind::torus;
    for (int k : b.max_frequency()) {
        const double base = torus ? 2.0 * k + 1.0 : k + 1.0;
        g.points.push_back(fft::good_size(static_cast<int>(std::ceil(factor * base))));
    }
    return g;
}

// Grid on which cubic products of retained modes are projected back exactly.
inline GridSampling dealiased_grid(const SpectralBasis& b, double factor = 2.0) {
    if (factor < 2.0) throw DomainError("dealias factor must be >= 2 for a cubic nonlinearity");
    return oversampled_grid(b, factor);
}

inline GridSampling default_grid(const SpectralBasis& b) { return oversampled_grid(b, 3.0); }

inline std::vector<double> grid_coordinates(const Geometry& g, const GridSampling& grid, int axis) {
    const auto n = grid.points.at(static_cast<std::size_t>(axis));
    const double L = g.side_lengths.at(static_cast<std::size_t>(axis));
    const double shift = g.kind == GeometryKind::torus ? 0.0 : 0.5;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = (j + shift) * L / n;
    return x;
}

// Precomputed coefficient <-> grid map for one (basis, grid) pair. Immutable
// after construction and safe to share across threads.
class Transform {
public:
    Transform(BasisPtr basis, GridSampling grid) : basis_(std::move(basis)), grid_(std::move(grid)) {
        const Geometry& geo = basis_->geometry();
        const int d = geo.dimension();
        if (static_cast<int>(grid_.points.size()) != d) throw DomainError("grid dimension mismatch");

        std::vector<fftw_r2r_kind> fwd, inv;
        for (int a = 0; a < d; ++a) {
            const int G = grid_.points[static_cast<std::size_t>(a)];
            const int K = basis_->max_frequency()[static_cast<std::size_t>(a)];
            switch (geo.kind) {
            case GeometryKind::torus:
                if (G < 2 * K + 1)
                    throw AliasingError("axis " + std::to_string(a) + ": " + std::to_string(G) +
                                        " points cannot resolve frequency " + std::to_string(K) +
                                        " (need >= " + std::to_string(2 * K + 1) + ")");
                fwd.push_back(FFTW_R2HC);
                inv.push_back(FFTW_HC2R);
                break;
            case GeometryKind::dirichlet_box:
            case GeometryKind::neumann_box:
                if (G < K + 1)
                    throw AliasingError("axis " + std::to_string(a) + ": " + std::to_string(G) +
                                        " points cannot resolve frequency " + std::to_string(K) +
                                        " (need >= " + std::to_string(K + 1) + ")");
                fwd.push_back(geo.kind == GeometryKind::dirichlet_box ? FFTW_RODFT10 : FFTW_REDFT10);
                inv.push_back(geo.kind == GeometryKind::dirichlet_box ? FFTW_RODFT01 : FFTW_REDFT01);
                break;
            }
        }
        forward_ = fft::cached_plan(grid_.points, fwd);
        inverse_ = fft::cached_plan(grid_.points, inv);

        const std::size_t n = basis_->size();
        slot_.resize(n);
        synth_scale_.resize(n);
        analysis_scale_.resize(n);
        for (std::size_t m = 0; m < n; ++m) {
            const Mode& mode = basis_->modes()[m];
            std::size_t flat = 0;
            double s = 1.0, t = 1.0;
            for (int a = 0; a < d; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const int G = grid_.points[ua];
                const int k = mode.multi_index[ua];
                const double L = geo.side_lengths[ua];
                const double h = L / G;
                const double c0 = 1.0 / std::sqrt(L), c1 = std::sqrt(2.0 / L);
                int pos = 0;
                switch (geo.kind) {
                case GeometryKind::torus:
                    if (k == 0) {
                        pos = 0, s *= c0, t *= h * c0;
                    } else if (mode.parity[ua] == 0) {
                        pos = k, s *= 0.5 * c1, t *= h * c1;
                    } else {
                        pos = G - k, s *= -0.5 * c1, t *= -h * c1;
                    }
                    break;
                case GeometryKind::dirichlet_box:
                    pos = k - 1, s *= 0.5 * c1, t *= 0.5 * h * c1;
                    break;
                case GeometryKind::neumann_box:
                    pos = k;
                    if (k == 0)
                        s *= c0, t *= 0.5 * h * c0;
                    else
                        s *= 0.5 * c1, t *= 0.5 * h * c1;
                    break;
                }
                flat = flat * static_cast<std::size_t>(G) + static_cast<std::size_t>(pos);
            }
            slot_[m] = flat;
            synth_scale_[m] = s;
            analysis_scale_[m] = t;
        }
    }

    const SpectralBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const GridSampling& grid() const { return grid_; }
    std::size_t point_count() const { return forward_->size(); }
    double cell_volume() const { return basis_->geometry().volume() / static_cast<double>(point_count()); }

    std::vector<double> synthesize(std::span<const double> coeffs) const {
        if (coeffs.size() != basis_->size()) throw LengthMismatch("synthesize: coefficient length");
        std::vector<double> spectrum(point_count(), 0.0), out(point_count());
        for (std::size_t m = 0; m < coeffs.size(); ++m) spectrum[slot_[m]] = coeffs[m] * synth_scale_[m];
        inverse_->execute(spectrum, out);
        return out;
    }
    std::vector<double> synthesize(const SpectralField& f) const {
        check_basis(f.basis());
        return synthesize(f.coeffs());
    }

    std::vector<double> analyze_coeffs(std::span<const double> values) const {
        if (values.size() != point_count()) throw LengthMismatch("analyze: value count");
        std::vector<double> in(values.begin(), values.end()), spectrum(point_count());
        forward_->execute(in, spectrum);
        std::vector<double> c(basis_->size());
        for (std::size_t m = 0; m < c.size(); ++m) c[m] = spectrum[slot_[m]] * analysis_scale_[m];
        return c;
    }
    SpectralField analyze(std::span<const double> values) const {
        return SpectralField(basis_, analyze_coeffs(values));
    }

    void check_basis(const SpectralBasis& b) const {
        if (!basis_->same_as(b)) throw LengthMismatch("field basis differs from transform basis");
    }

private:
    BasisPtr basis_;
    GridSampling grid_;
    std::shared_ptr<const fft::R2RPlan> forward_, inverse_;
    std::vector<std::size_t> slot_;
    std::vector<double> synth_scale_, analysis_scale_;
};

inline std::vector<double> synthesize(const SpectralField& f, const GridSampling& grid) {
    return Transform(f.basis_ptr(), grid).synthesize(f);
}

inline SpectralField analyze(std::span<const double> values, const BasisPtr& basis, const GridSampling& grid) {
    return Transform(basis, grid).analyze(values);
}

// (sum_n (1 + lambda_n^2)^s alpha_n^2)^{1/2}; s may be negative.
inline double sobolev_norm(const SpectralField& f, double s) {
    const auto ev = f.basis().eigenvalues_sq();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::pow(1.0 + ev[i], s) * f[i] * f[i];
    return std::sqrt(acc);
}

// Multiplies alpha_n by (1 + lambda_n^2)^{sigma/2}.
inline SpectralField bessel_power(SpectralField f, double sigma) {
    if (sigma == 0.0) return f;
    const auto ev = f.basis().eigenvalues_sq();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::pow(1.0 + ev[i], 0.5 * sigma);
    return f;
}

// Coefficients of -Delta f.
inline SpectralField neg_laplacian(SpectralField f) {
    const auto ev = f.basis().eigenvalues_sq();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= ev[i];
    return f;
}

// Uniform-weight quadrature of (int |u|^p)^{1/p}; p = inf gives the max norm.
inline double lp_norm(std::span<const double> values, double p, double cell_volume) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 2.0) {
        for (double v : values) acc += v * v;
    } else if (p == 4.0) {
        for (double v : values) acc += (v * v) * (v * v);
    } else {
        for (double v : values) acc += std::pow(std::abs(v), p);
    }
    return std::pow(acc * cell_volume, 1.0 / p);
}

inline double lp_norm(std::span<const double> values, double p, const Geometry& g, const GridSampling& grid) {
    if (values.size() != grid.size()) throw LengthMismatch("lp_norm: value count vs grid");
    return lp_norm(values, p, g.volume() / static_cast<double>(grid.size()));
}

// ||e_n||_{L^p} / (1 + lambda_n^2)^exponent for every rank 1..N of one basis.
inline std::vector<double> sogge_ratios(const BasisPtr& basis, double p, double exponent, double oversampling = 3.0) {
    Transform tr(basis, oversampled_grid(*basis, oversampling));
    std::vector<double> out(basis->size());
    std::vector<double> c(basis->size(), 0.0);
    for (std::size_t n = 0; n < basis->size(); ++n) {
        c[n] = 1.0;
        const auto vals = tr.synthesize(c);
        c[n] = 0.0;
        out[n] = lp_norm(vals, p, tr.cell_volume()) / std::pow(1.0 + basis->eigenvalues_sq()[n], exponent);
    }
    return out;
}

inline double sogge_ratio(const Geometry& g, std::size_t n, double p, double exponent, double oversampling = 3.0) {
    auto basis = SpectralBasis::create(g, n);
    Transform tr(basis, oversampled_grid(*basis, oversampling));
    const auto vals = tr.synthesize(SpectralField::unit(basis, n));
    return lp_norm(vals, p, tr.cell_volume()) / std::pow(1.0 + basis->eigenvalues_sq()[n - 1], exponent);
}

} // namespace rwave
