#include "apfv/errors.hpp"
#include "apfv/euler_poisson.hpp"
#include "profiles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace apfv;

namespace {

Grid1D grid(std::size_t N) { return make_grid1d(N, 1.0 / double(N), Boundary::periodic); }

EpState rest(const Grid1D& g, const EpParams& p) {
    return init_well_prepared(std::vector<double>(g.n_cells, 1.0), std::vector<double>(g.n_cells, 0.0), p, g);
}

double max_dev_from_one(const std::vector<double>& n) {
    double m = 0.0;
    for (double v : n) m = std::max(m, std::abs(v - 1.0));
    return m;
}

}  // namespace

TEST(EulerPoisson, RestStateIsFixedPoint) {
    const auto g = grid(16);
    EpParams p;
    p.lambda = 0.5;
    p.delta = 0.01;
    const auto s = rest(g, p);
    for (auto step : {step_classical, step_ap}) {
        const auto t = step(s, p, g);
        EXPECT_EQ(t.n, s.n);
        for (double v : t.q) EXPECT_EQ(v, 0.0);
        for (double v : t.E) EXPECT_EQ(v, 0.0);
    }
}

TEST(EulerPoisson, MassConservation) {
    const auto g = grid(64);
    for (double lambda : {1.0, 1e-2}) {
        EpParams p;
        p.lambda = lambda;
        auto s = profiles::ep_state(g, p);
        p.delta = hydro_time_step(s.n, s.q, p.pressure, g.h);
        const double m0 = total(s.n, g.h);
        auto a = s, c = s;
        for (int i = 0; i < 20; ++i) {
            a = step_ap(a, p, g);
            if (lambda == 1.0) c = step_classical(c, p, g);
        }
        EXPECT_NEAR(total(a.n, g.h), m0, 1e-14);
        EXPECT_NEAR(total(c.n, g.h), m0, 1e-14);
    }
}

TEST(EulerPoisson, InitialGaussResidualVanishes) {
    const auto g = grid(32);
    EpParams p;
    p.lambda = 0.1;
    const auto s = profiles::ep_state(g, p, 0.2);
    EXPECT_LE(gauss_residual(s, p, g), 1e-12);
}

TEST(EulerPoisson, GaussLawPreservedByApStepper) {
    const auto g = grid(48);
    for (double lambda : {1.0, 1e-2, 1e-4}) {
        EpParams p;
        p.lambda = lambda;
        auto s = profiles::ep_state(g, p);
        p.delta = hydro_time_step(s.n, s.q, p.pressure, g.h);
        for (int i = 0; i < 200; ++i) s = step_ap(s, p, g);
        EXPECT_LE(gauss_residual(s, p, g), 1e-12) << "lambda " << lambda;
    }
}

TEST(EulerPoisson, GaussLawPreservedByClassicalStepper) {
    const auto g = grid(48);
    EpParams p;
    p.lambda = 1.0;
    auto s = profiles::ep_state(g, p);
    p.delta = hydro_time_step(s.n, s.q, p.pressure, g.h);
    for (int i = 0; i < 100; ++i) s = step_classical(s, p, g);
    EXPECT_LE(gauss_residual(s, p, g), 1e-12);
}

TEST(EulerPoisson, FacePerturbationResidual) {
    const auto g = grid(20);
    EpParams p;
    p.lambda = 0.3;
    auto s = profiles::ep_state(g, p);
    const double eps = 1e-3;
    s.E[7] += eps;
    EXPECT_NEAR(gauss_residual(s, p, g), p.lambda * p.lambda * eps / g.h, 1e-12);
}

TEST(EulerPoisson, LambdaZeroForcesUnitDensity) {
    const auto g = grid(32);
    EpParams p;
    p.lambda = 0.0;
    p.delta = 0.01;
    const auto s = init_well_prepared(std::vector<double>(32, 1.0), profiles::velocity_1d(32, 0.3), p, g);
    const auto t = step_ap(s, p, g);
    EXPECT_LE(max_dev_from_one(t.n), 1e-14);
    EXPECT_THROW(step_classical(s, p, g), PreconditionError);
}

TEST(EulerPoisson, QuasineutralLimitStaysNearOne) {
    const auto g = grid(64);
    EpParams p;
    p.lambda = 1e-8;
    auto s = init_well_prepared(std::vector<double>(64, 1.0), profiles::velocity_1d(64, 0.3), p, g, true);
    p.delta = hydro_time_step(s.n, s.q, p.pressure, g.h);
    for (int i = 0; i < 100; ++i) s = step_ap(s, p, g);
    EXPECT_LE(max_dev_from_one(s.n), 10 * std::max(p.lambda * p.lambda, 1e-13));
}

TEST(EulerPoisson, InitRestState) {
    const auto g = grid(12);
    EpParams p;
    const auto s = rest(g, p);
    for (double v : s.E) EXPECT_EQ(v, 0.0);
    for (double v : s.phi) EXPECT_EQ(v, 0.0);
}

TEST(EulerPoisson, InitRejectsBadInput) {
    const auto g = grid(12);
    EpParams p;
    std::vector<double> n(12, 1.0), u(12, 0.0);
    n[3] = 0.0;
    EXPECT_THROW(init_well_prepared(n, u, p, g), PreconditionError);
    n[3] = 1.0;
    const auto b = make_grid1d(12, 1.0 / 12, Boundary::neumann_ghost);
    EXPECT_THROW(init_well_prepared(n, u, p, b, true), PreconditionError);
    p.lambda = 0.0;
    n[3] = 1.1;
    EXPECT_THROW(init_well_prepared(n, u, p, g), PreconditionError);
}

TEST(EulerPoisson, PotentialHasZeroMean) {
    const auto g = grid(24);
    EpParams p;
    p.lambda = 0.2;
    const auto s = profiles::ep_state(g, p, 0.3);
    double m = 0.0;
    for (double v : s.phi) m += v;
    EXPECT_NEAR(m, 0.0, 1e-12);
    const auto E = field_from_potential(s.phi, g.h);
    for (std::size_t k = 0; k < E.size(); ++k) EXPECT_EQ(E[k], s.E[k]);
}

TEST(DivergenceProjection, KernelAndIdempotence) {
    for (std::size_t N : {16u, 17u}) {
        const auto q0 = profiles::velocity_1d(N, 0.7);
        const auto q = project_centered_divergence_free(q0);
        double sum = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double d = q[(k + 1) % N] - q[(k + N - 1) % N];
            EXPECT_NEAR(d, 0.0, 1e-14);
            sum += d;
        }
        EXPECT_NEAR(sum, 0.0, 1e-14);
        const auto qq = project_centered_divergence_free(q);
        for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(qq[k], q[k], 1e-15);
        // Orthogonality of the discarded part.
        double dot = 0.0;
        for (std::size_t k = 0; k < N; ++k) dot += (q0[k] - q[k]) * q[k];
        EXPECT_NEAR(dot, 0.0, 1e-14);
    }
}

TEST(EulerPoisson, ClassicalRejectsZeroLambda) {
    const auto g = grid(12);
    EpParams p;
    const auto s = rest(g, p);
    p.lambda = 0.0;
    EXPECT_THROW(step_classical(s, p, g), PreconditionError);
    p.lambda = -1.0;
    EXPECT_THROW(step_ap(s, p, g), PreconditionError);
}

TEST(EulerPoisson, TimeStepHelper) {
    const std::vector<double> n{1.0, 4.0}, q{0.5, -4.0};
    Pressure pr{1.0, 1.0};
    EXPECT_DOUBLE_EQ(hydro_time_step(n, q, pr, 0.1), 0.45 * 0.1 / 2.0);
}
