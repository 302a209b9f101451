#include "apfv/euler_poisson.hpp"

#include "apfv/errors.hpp"
#include "apfv/linsolve.hpp"
#include "periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace apfv {

using detail::wrap;

namespace {

void require_periodic(const Grid1D& g, const char* who) {
    if (g.bc != Boundary::periodic)
        throw PreconditionError(std::string(who) + ": only periodic grids are supported");
}

void check_state(const EpState& s, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    if (s.n.size() != N || s.q.size() != N || s.phi.size() != N || s.E.size() != N)
        throw PreconditionError("EpState: array sizes do not match the grid");
    for (double v : s.n)
        if (!(v > 0.0)) throw PreconditionError("EpState: density must be positive");
}

// Solves -h^-2 [a_{k+1/2}(phi_{k+1}-phi_k) - a_{k-1/2}(phi_k-phi_{k-1})] = rhs_k
// with a[k] = a_{k+1/2}, periodic, zero-mean gauge.
std::vector<double> solve_face_weighted(const std::vector<double>& a,
                                        const std::vector<double>& rhs, double h) {
    const std::size_t N = a.size();
    const double ih2 = 1.0 / (h * h);
    std::vector<double> lo(N), di(N), up(N);
    for (std::size_t k = 0; k < N; ++k) {
        const double am = a[wrap(long(k) - 1, N)];
        lo[k] = -ih2 * am;
        up[k] = -ih2 * a[k];
        di[k] = ih2 * (a[k] + am);
    }
    return solve_tridiagonal(lo, di, up, rhs, true, Gauge::zero_mean);
}

}  // namespace

EpFluxes ep_fluxes(const EpState& s, const EpParams& p, const Grid1D& g) {
    Field n = Field::cells(g), q = Field::cells(g);
    for (std::size_t k = 0; k < g.n_cells; ++k) {
        cell(n, k) = s.n[k];
        cell(q, k) = s.q[k];
    }
    apply_bc_inplace(n, g);
    apply_bc_inplace(q, g);
    EpFluxes f;
    f.f_n.resize(g.n_cells);
    f.f_u.resize(g.n_cells);
    for (std::size_t k = 0; k < g.n_cells; ++k) {
        const auto fl = flux_ep_explicit({n[k + 1], q[k + 1]}, {n[k + 2], q[k + 2]}, p.pressure, p.visc);
        f.f_n[k] = fl.f_n;
        f.f_u[k] = fl.f_u;
    }
    return f;
}

std::vector<double> field_from_potential(std::span<const double> phi, double h) {
    const std::size_t N = phi.size();
    std::vector<double> E(N);
    for (std::size_t k = 0; k < N; ++k) E[k] = -(phi[wrap(long(k) + 1, N)] - phi[k]) / h;
    return E;
}

EpState step_classical(const EpState& s, const EpParams& p, const Grid1D& g) {
    require_periodic(g, "step_classical");
    check_state(s, g);
    if (!(p.lambda > 0.0)) throw PreconditionError("step_classical: lambda must be positive");
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta;
    const auto f = ep_fluxes(s, p, g);

    EpState r;
    r.n.resize(N);
    for (std::size_t k = 0; k < N; ++k)
        r.n[k] = s.n[k] - dt / h * (f.f_n[k] - f.f_n[wrap(long(k) - 1, N)]);

    std::vector<double> a(N, p.lambda * p.lambda), rhs(N);
    for (std::size_t k = 0; k < N; ++k) rhs[k] = 1.0 - r.n[k];
    r.phi = solve_face_weighted(a, rhs, h);
    r.E = field_from_potential(r.phi, h);

    r.q.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = wrap(long(k) - 1, N);
        const double Et = 0.5 * (r.E[k] + r.E[km]);
        r.q[k] = s.q[k] - dt / h * (f.f_u[k] - f.f_u[km]) - dt * r.n[k] * Et;
    }
    return r;
}

EpState step_ap(const EpState& s, const EpParams& p, const Grid1D& g) {
    require_periodic(g, "step_ap");
    check_state(s, g);
    if (!(p.lambda >= 0.0)) throw PreconditionError("step_ap: lambda must be non-negative");
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const auto f = ep_fluxes(s, p, g);
    auto at = [N](const std::vector<double>& v, long k) { return v[wrap(k, N)]; };

    std::vector<double> a(N), rhs(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        a[k] = l2 + 0.5 * dt * dt * (s.n[k] + at(s.n, K + 1));
        rhs[k] = 1.0 - s.n[k] + dt / h * (f.f_n[k] - at(f.f_n, K - 1)) -
                 0.5 * dt * dt / (h * h) *
                     (at(f.f_u, K + 1) - f.f_u[k] - at(f.f_u, K - 1) + at(f.f_u, K - 2));
    }

    EpState r;
    r.phi = solve_face_weighted(a, rhs, h);
    r.E = field_from_potential(r.phi, h);
    r.q.resize(N);
    r.n.resize(N);
    std::vector<double> fn_ap(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        fn_ap[k] = mass_flux_ap(f.f_n[k], s.n[k], at(s.n, K + 1), r.E[k], at(f.f_u, K + 1),
                                at(f.f_u, K - 1), dt, h);
    }
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        const double Et = 0.5 * (r.E[k] + at(r.E, K - 1));
        r.q[k] = s.q[k] - dt / h * (f.f_u[k] - at(f.f_u, K - 1)) - dt * s.n[k] * Et;
        r.n[k] = s.n[k] - dt / h * (fn_ap[k] - at(fn_ap, K - 1));
    }
    return r;
}

double gauss_residual(const EpState& s, const EpParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double l2 = p.lambda * p.lambda;
    double r = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double div = (s.E[k] - s.E[wrap(long(k) - 1, N)]) / g.h;
        r = std::max(r, std::abs(l2 * div - (1.0 - s.n[k])));
    }
    return r;
}

std::vector<double> project_centered_divergence_free(std::span<const double> q) {
    // ker(D) is spanned by the constants, plus (-1)^k when N is even. Both
    // basis vectors are orthogonal, so the projection is two inner products.
    const std::size_t N = q.size();
    const double mean = std::accumulate(q.begin(), q.end(), 0.0) / double(N);
    double alt = 0.0;
    if (N % 2 == 0) {
        for (std::size_t k = 0; k < N; ++k) alt += (k % 2 ? -1.0 : 1.0) * q[k];
        alt /= double(N);
    }
    std::vector<double> r(N);
    for (std::size_t k = 0; k < N; ++k) r[k] = mean + (k % 2 ? -alt : alt);
    return r;
}

EpState init_well_prepared(std::span<const double> n_profile, std::span<const double> u_profile,
                           const EpParams& p, const Grid1D& g, bool project_momentum) {
    if (g.bc != Boundary::periodic)
        throw PreconditionError(project_momentum
                                    ? "init_well_prepared: divergence projection is infeasible on a bounded grid"
                                    : "init_well_prepared: only periodic grids are supported");
    const std::size_t N = g.n_cells;
    if (n_profile.size() != N || u_profile.size() != N)
        throw PreconditionError("init_well_prepared: profile size mismatch");
    EpState s;
    s.n.assign(n_profile.begin(), n_profile.end());
    for (double v : s.n)
        if (!(v > 0.0)) throw PreconditionError("init_well_prepared: density must be positive");
    s.q.resize(N);
    for (std::size_t k = 0; k < N; ++k) s.q[k] = s.n[k] * u_profile[k];
    if (project_momentum) s.q = project_centered_divergence_free(s.q);

    if (p.lambda > 0.0) {
        std::vector<double> a(N, p.lambda * p.lambda), rhs(N);
        for (std::size_t k = 0; k < N; ++k) rhs[k] = 1.0 - s.n[k];
        s.phi = solve_face_weighted(a, rhs, g.h);
    } else {
        for (double v : s.n)
            if (std::abs(v - 1.0) > 1e-14)
                throw PreconditionError("init_well_prepared: lambda = 0 requires n = 1");
        s.phi.assign(N, 0.0);
    }
    s.E = field_from_potential(s.phi, g.h);
    return s;
}

double hydro_time_step(std::span<const double> n, std::span<const double> q,
                       const Pressure& pressure, double h, double cfl) {
    double smax = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k)
        smax = std::max(smax, std::abs(q[k] / n[k]) + pressure.sound_speed(n[k]));
    if (!(smax > 0.0)) throw PreconditionError("hydro_time_step: zero wave speed");
    return cfl * h / smax;
}

double total(std::span<const double> v, double h) {
    return h * std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace apfv
