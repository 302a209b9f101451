#include "apfv/aniso_elliptic.hpp"
#include "apfv/errors.hpp"
#include "apfv/euler_lorentz.hpp"
#include "dense_oracles.hpp"
#include "profiles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace apfv;

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> N01;
    Vec3 v{N01(rng), N01(rng), N01(rng)};
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

LorentzFields uniform_fields(const Grid3D& g, Vec3 B) {
    LorentzFields f;
    f.B.assign(g.size(), B);
    f.E.assign(g.size(), Vec3{});
    return f;
}

LorentzState uniform_state(const Grid3D& g, double n) {
    LorentzState s;
    s.n.assign(g.size(), n);
    s.q.assign(g.size(), Vec3{});
    return s;
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST(ParPerp, Examples) {
    std::mt19937_64 rng(1);
    const Vec3 b = random_unit(rng);
    auto s = par_perp_split(b, b);
    EXPECT_NEAR(s.par, 1.0, 1e-15);
    for (double c : s.perp) EXPECT_NEAR(c, 0.0, 1e-15);
    const Vec3 w = cross(b, random_unit(rng));
    s = par_perp_split(w, b);
    EXPECT_NEAR(s.par, 0.0, 1e-15);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.perp[i], w[i], 1e-15);
    for (int t = 0; t < 100; ++t) {
        const Vec3 bb = random_unit(rng), v = random_unit(rng);
        const auto d = par_perp_split({3 * v[0], 3 * v[1], 3 * v[2]}, bb);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(d.par * bb[i] + d.perp[i], 3 * v[i], 1e-14);
        EXPECT_NEAR(dot(d.perp, bb), 0.0, 1e-14);
    }
    EXPECT_THROW(par_perp_split({1, 0, 0}, {1, 1, 0}), PreconditionError);
}

TEST(ClosedForm, SatisfiesDefiningSystem) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const Vec3 b = random_unit(rng), y0 = random_unit(rng);
        const Vec3 Y{2 * y0[0], 2 * y0[1], 2 * y0[2]};
        const double tau = std::pow(10.0, -8.0 * U(rng)), delta = 0.01 + U(rng), Bm = 0.2 + 2 * U(rng);
        const Vec3 q = perp_update_closed_form(Y, b, tau, delta, Bm);
        const Vec3 bq = cross(b, q), bY = cross(b, Y);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i] - tau / (delta * Bm) * bq[i], bY[i], 1e-12);
        EXPECT_NEAR(dot(q, b), 0.0, 1e-14);
    }
}

// At tau = 0 the update is the drift relation b x Y; the |B| factor is
// already carried by Y.
TEST(ClosedForm, DriftLimitAndZeroInput) {
    const Vec3 b{0.0, 0.6, 0.8}, Y{1.0, -2.0, 0.5};
    const Vec3 q = perp_update_closed_form(Y, b, 0.0, 0.1, 2.5);
    const Vec3 bY = cross(b, Y);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i], bY[i], 1e-15);
    for (double c : perp_update_closed_form({0, 0, 0}, b, 0.3, 0.1, 2.5)) EXPECT_EQ(c, 0.0);
    EXPECT_THROW(perp_update_closed_form(Y, b, 0.1, 0.1, 0.0), PreconditionError);
}

TEST(EulerLorentz, RestStateIsFixedPoint) {
    for (bool periodic : {false, true}) {
        const auto g = profiles::box(5, periodic);
        const auto f = uniform_fields(g, {0.3, -0.2, 1.1});
        const auto s = uniform_state(g, 1.3);
        for (double tau : {1.0, 1e-6}) {
            LorentzParams p;
            p.tau = tau;
            p.delta = 0.05;
            // Round-off in n reaches q through the delta / tau force factor.
            const double qtol = 1e-13 * std::max(1.0, p.delta / tau);
            for (auto step : {step_fdap1, step_fdap2}) {
                const auto r = step(s, f, p, g);
                for (std::size_t id = 0; id < g.size(); ++id) {
                    EXPECT_NEAR(r.n[id], 1.3, 1e-13);
                    for (double c : r.q[id]) EXPECT_NEAR(c, 0.0, qtol);
                }
            }
        }
    }
}

TEST(EulerLorentz, MassConservation) {
    for (bool periodic : {false, true}) {
        const auto g = profiles::box(6, periodic);
        const auto f = profiles::lorentz_fields(g);
        const auto s = profiles::lorentz_state(g);
        LorentzParams p;
        p.delta = 0.01;
        for (double tau : {1.0, 1e-3}) {
            p.tau = tau;
            EXPECT_NEAR(sum(step_fdap2(s, f, p, g).n), sum(s.n), 1e-12 * sum(s.n));
            EXPECT_NEAR(sum(step_fdap1(s, f, p, g).n), sum(s.n), 1e-12 * sum(s.n));
        }
        p.tau = 1e-9;
        EXPECT_NEAR(sum(step_fdap2(s, f, p, g).n), sum(s.n), 1e-12 * sum(s.n));
    }
}

TEST(EulerLorentz, WallDivergenceSumsToZero) {
    const auto g = profiles::box(5, false);
    std::vector<Vec3> w(g.size());
    for (std::size_t id = 0; id < g.size(); ++id) w[id] = {std::sin(double(id)), 0.3 * double(id % 7), 1.0};
    EXPECT_NEAR(sum(wall_divergence(w, g)), 0.0, 1e-10);
}

TEST(EulerLorentz, WellPreparedDataSatisfiesDriftBalance) {
    const auto g = profiles::box(6, true);
    const auto f = profiles::lorentz_fields(g);
    LorentzParams p;
    p.tau = 1e-8;
    p.delta = 0.01;
    LorentzState s = uniform_state(g, 1.0);
    s.n = drift_equilibrium_density(std::vector<double>(g.size(), 1.0), f, p.pressure, g);
    EXPECT_LE(drift_balance_residual(s, f, p.pressure, g), 1e-12);
    const auto r = step_fdap2(s, f, p, g);
    EXPECT_LE(drift_balance_residual(r, f, p.pressure, g), 1e-6);
}

TEST(DriftBalance, Examples) {
    const auto g = profiles::box(5, true);
    EXPECT_EQ(drift_balance_residual(uniform_state(g, 2.0), uniform_fields(g, {0, 0, 1}), Pressure{}, g), 0.0);
    const auto s = profiles::lorentz_state(g);
    EXPECT_GT(drift_balance_residual(s, profiles::lorentz_fields(g), Pressure{}, g), 0.0);
}

// n = exp(-phi) along straight lines with E = -grad phi balances to O(h^2).
TEST(DriftBalance, ConstructedEquilibriumConverges) {
    double prev = 0.0;
    for (std::size_t n3 : {16u, 32u, 64u}) {
        const double h3 = 1.0 / double(n3);
        const auto g = make_grid3d({4, 4, n3}, {0.25, 0.25, h3}, true);
        LorentzFields f = uniform_fields(g, {0, 0, 2});
        LorentzState s = uniform_state(g, 1.0);
        for (std::size_t id = 0; id < g.size(); ++id) {
            const double z = (double(g.multi(id)[2]) + 0.5) * h3;
            const double phi = 0.3 * std::sin(2 * std::numbers::pi * z);
            s.n[id] = std::exp(-phi);
            f.E[id] = {0.0, 0.0, -0.6 * std::numbers::pi * std::cos(2 * std::numbers::pi * z)};
        }
        const double r = drift_balance_residual(s, f, Pressure{}, g);
        if (prev > 0.0) EXPECT_NEAR(prev / r, 4.0, 0.4);
        prev = r;
    }
}

TEST(EulerLorentz, MicroMacroSparsityIndependentOfTau) {
    const auto g = profiles::box(5, false);
    const auto f = profiles::lorentz_fields(g);
    AnisoProblem3D a;
    a.grid = g;
    a.b.resize(g.size());
    a.E = f.E;
    a.F.assign(g.size(), 1.0);
    a.g_lo.assign(25, 0.0);
    a.g_hi.assign(25, 0.0);
    for (std::size_t id = 0; id < g.size(); ++id) {
        const double m = std::sqrt(dot(f.B[id], f.B[id]));
        a.b[id] = {f.B[id][0] / m, f.B[id][1] / m, f.B[id][2] / m};
    }
    a.tau = 1.0;
    const auto s1 = assemble_micromacro_3d(a);
    a.tau = 1e-10;
    const auto s2 = assemble_micromacro_3d(a);
    ASSERT_EQ(s1.entries().size(), s2.entries().size());
    for (std::size_t i = 0; i < s1.entries().size(); ++i) {
        EXPECT_EQ(s1.entries()[i].row, s2.entries()[i].row);
        EXPECT_EQ(s1.entries()[i].col, s2.entries()[i].col);
    }
}

// The tau = 0 step reproduces the coupled limit system assembled densely.
TEST(EulerLorentz, ZeroTauMatchesLimitSystem) {
    const auto g = profiles::box(4, true);
    const auto f = profiles::lorentz_fields(g);
    const auto s = profiles::lorentz_state(g);
    LorentzParams p;
    p.tau = 0.0;
    p.delta = 0.01;
    const auto a = step_fdap2(s, f, p, g);
    const auto b = oracle::fdap2(s, f, p, g);
    EXPECT_LE(oracle::rel_diff(a.n, b.n), 1e-8);
    p.tau = 1e-12;
    EXPECT_LE(oracle::rel_diff(step_fdap2(s, f, p, g).n, a.n), 1e-8);
}

TEST(EulerLorentz, Rejections) {
    const auto g = profiles::box(4, true);
    const auto f = profiles::lorentz_fields(g);
    const auto s = profiles::lorentz_state(g);
    LorentzParams p;
    p.pressure.gamma = 5.0 / 3.0;
    EXPECT_THROW(step_fdap2(s, f, p, g), PreconditionError);
    p.pressure.gamma = 1.0;
    p.tau = 0.0;
    EXPECT_THROW(step_fdap1(s, f, p, g), SolverError);
    p.tau = 1.0;
    auto bad = s;
    bad.n[3] = 0.0;
    EXPECT_THROW(step_fdap2(bad, f, p, g), PreconditionError);
    auto flat = f;
    flat.B[5] = {1.0, 0.0, 0.0};
    p.tau = 1e-6;
    EXPECT_THROW(step_fdap2(s, flat, p, g), PreconditionError);
}
