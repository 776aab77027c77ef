#pragma once

#include <cmath>
#include <utility>

#include "rwave/spectral_basis.hpp"

namespace rwave {

// Phase-space point (u, du/dt) of the wave equation.
struct StatePair {
    SpectralField u;
    SpectralField ut;

    StatePair() = default;
    StatePair(SpectralField u0, SpectralField u1) : u(std::move(u0)), ut(std::move(u1)) { u.check_compatible(ut); }

    static StatePair zero(const BasisPtr& b) { return {SpectralField(b), SpectralField(b)}; }

    const SpectralBasis& basis() const { return u.basis(); }
    const BasisPtr& basis_ptr() const { return u.basis_ptr(); }

    StatePair& operator+=(const StatePair& o) {
        u += o.u;
        ut += o.ut;
        return *this;
    }
    StatePair& operator-=(const StatePair& o) {
        u -= o.u;
        ut -= o.ut;
        return *this;
    }
    StatePair& operator*=(double a) {
        u *= a;
        ut *= a;
        return *this;
    }
    friend StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
    friend StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
    friend StatePair operator*(double a, StatePair p) { return p *= a; }
};

// H^s x H^{s-1} norm, combined in l2.
inline double pair_norm(const StatePair& f, double s) {
    const double a = sobolev_norm(f.u, s), b = sobolev_norm(f.ut, s - 1.0);
    return std::sqrt(a * a + b * b);
}

// sum_n lambda_n^2 u_n^2 + ut_n^2, conserved by the free flow.
inline double linear_energy(const StatePair& f) {
    const auto ev = f.basis().eigenvalues_sq();
    double e = 0.0;
    for (std::size_t i = 0; i < ev.size(); ++i) e += ev[i] * f.u[i] * f.u[i] + f.ut[i] * f.ut[i];
    return e;
}

} // namespace rwave
