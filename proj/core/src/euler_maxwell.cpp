#include "apfv/euler_maxwell.hpp"

#include "apfv/errors.hpp"
#include "apfv/linsolve.hpp"
#include "periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace apfv {

using detail::wrap;

namespace {

void check_state(const EmState& s, const Grid1D& g, const char* who) {
    if (g.bc != Boundary::periodic)
        throw PreconditionError(std::string(who) + ": only periodic grids are supported");
    const std::size_t N = g.n_cells;
    if (s.n.size() != N || s.qx.size() != N || s.qy.size() != N || s.Ex.size() != N ||
        s.Ey.size() != N || s.Bz.size() != N)
        throw PreconditionError(std::string(who) + ": array sizes do not match the grid");
    for (double v : s.n)
        if (!(v > 0.0)) throw PreconditionError(std::string(who) + ": density must be positive");
}

}  // namespace

EmFluxes em_fluxes(const EmState& s, const EmParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    EmFluxes f;
    f.f_n.resize(N);
    f.f_ux.resize(N);
    f.f_uy.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t kp = wrap(long(k) + 1, N);
        const auto fl = flux_em_explicit({s.n[k], s.qx[k], s.qy[k]}, {s.n[kp], s.qx[kp], s.qy[kp]},
                                         p.pressure, p.visc);
        f.f_n[k] = fl.f_n;
        f.f_ux[k] = fl.f_ux;
        f.f_uy[k] = fl.f_uy;
    }
    return f;
}

EmState step_classical_em(const EmState& s, const EmParams& p, const Grid1D& g) {
    check_state(s, g, "step_classical_em");
    if (!(p.lambda > 0.0)) throw PreconditionError("step_classical_em: lambda must be positive");
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, il2 = 1.0 / (p.lambda * p.lambda);
    const auto f = em_fluxes(s, p, g);
    auto at = [N](const std::vector<double>& v, long k) { return v[wrap(k, N)]; };

    EmState r;
    r.n.resize(N);
    r.Ex.resize(N);
    r.Bz.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        r.n[k] = s.n[k] - dt / h * (f.f_n[k] - at(f.f_n, K - 1));
        r.Ex[k] = s.Ex[k] + dt * il2 * f.f_n[k];
        r.Bz[k] = s.Bz[k] - dt / h * (at(s.Ey, K + 1) - s.Ey[k]);
    }
    r.Ey.resize(N);
    r.qx.resize(N);
    r.qy.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        r.Ey[k] = s.Ey[k] + dt * il2 * (s.qy[k] - (r.Bz[k] - at(r.Bz, K - 1)) / h);
        const double Bt = 0.5 * (s.Bz[k] + at(s.Bz, K - 1));
        const double Ext = 0.5 * (r.Ex[k] + at(r.Ex, K - 1));
        r.qx[k] = s.qx[k] - dt / h * (f.f_ux[k] - at(f.f_ux, K - 1)) -
                  dt * (r.n[k] * Ext + s.qy[k] * Bt);
        r.qy[k] = s.qy[k] - dt / h * (f.f_uy[k] - at(f.f_uy, K - 1)) -
                  dt * (r.n[k] * r.Ey[k] - s.qx[k] * Bt);
    }
    return r;
}

EmState step_ap_em(const EmState& s, const EmParams& p, const Grid1D& g) {
    check_state(s, g, "step_ap_em");
    if (!(p.lambda >= 0.0)) throw PreconditionError("step_ap_em: lambda must be non-negative");
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda, d2 = dt * dt;
    const auto f = em_fluxes(s, p, g);
    auto at = [N](const std::vector<double>& v, long k) { return v[wrap(k, N)]; };

    std::vector<double> Bt(N);
    for (std::size_t k = 0; k < N; ++k) Bt[k] = 0.5 * (s.Bz[k] + at(s.Bz, long(k) - 1));

    // Transverse field: (l2 + d2 n) Ey - d2 h^-2 Lap(Ey) = rhs, cyclic.
    std::vector<double> lo(N, -d2 / (h * h)), di(N), up(N, -d2 / (h * h)), rhs(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        di[k] = l2 + d2 * s.n[k] + 2.0 * d2 / (h * h);
        rhs[k] = l2 * s.Ey[k] + dt * s.qy[k] - dt / h * (s.Bz[k] - at(s.Bz, K - 1)) -
                 d2 / h * (f.f_uy[k] - at(f.f_uy, K - 1)) + d2 * s.qx[k] * Bt[k];
    }
    EmState r;
    r.Ey = solve_tridiagonal(lo, di, up, rhs, true);

    r.Ex.resize(N);
    r.Bz.resize(N);
    std::vector<double> fn_ap(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        const double nf = s.n[k] + at(s.n, K + 1);
        const double qyf = s.qy[k] + at(s.qy, K + 1);
        r.Ex[k] = (l2 * s.Ex[k] + dt * f.f_n[k] -
                   0.5 * d2 / h * (at(f.f_ux, K + 1) - at(f.f_ux, K - 1)) -
                   0.5 * d2 * qyf * s.Bz[k]) /
                  (l2 + 0.5 * d2 * nf);
        r.Bz[k] = s.Bz[k] - dt / h * (at(r.Ey, K + 1) - r.Ey[k]);
        fn_ap[k] = mass_flux_ap_em(f.f_n[k], s.n[k], at(s.n, K + 1), r.Ex[k], at(f.f_ux, K + 1),
                                   at(f.f_ux, K - 1), s.qy[k], at(s.qy, K + 1), s.Bz[k], dt, h);
    }

    r.n.resize(N);
    r.qx.resize(N);
    r.qy.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        const double Ext = 0.5 * (r.Ex[k] + at(r.Ex, K - 1));
        r.qx[k] = s.qx[k] - dt / h * (f.f_ux[k] - at(f.f_ux, K - 1)) -
                  dt * (s.n[k] * Ext + s.qy[k] * Bt[k]);
        r.qy[k] = s.qy[k] - dt / h * (f.f_uy[k] - at(f.f_uy, K - 1)) -
                  dt * (s.n[k] * r.Ey[k] - s.qx[k] * Bt[k]);
        r.n[k] = s.n[k] - dt / h * (fn_ap[k] - at(fn_ap, K - 1));
    }
    return r;
}

double gauss_residual_em(const EmState& s, const EmParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double l2 = p.lambda * p.lambda;
    double r = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double div = (s.Ex[k] - s.Ex[wrap(long(k) - 1, N)]) / g.h;
        r = std::max(r, std::abs(l2 * div - (1.0 - s.n[k])));
    }
    return r;
}

double curl_b_residual(const EmState& s, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    double r = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double curl = (s.Bz[k] - s.Bz[wrap(long(k) - 1, N)]) / g.h;
        r = std::max(r, std::abs(s.qy[k] / s.n[k] - curl));
    }
    return r;
}

std::vector<double> gauss_field(std::span<const double> n, double lambda, double h) {
    const std::size_t N = n.size();
    std::vector<double> E(N, 0.0);
    if (lambda == 0.0) {
        for (double v : n)
            if (std::abs(v - 1.0) > 1e-14)
                throw PreconditionError("gauss_field: lambda = 0 requires n = 1");
        return E;
    }
    // E_{k+1/2} = E_{k-1/2} + h lambda^-2 (1 - n_k). A net charge cannot be
    // carried by a periodic field, so the mean of 1 - n is dropped as in the
    // Poisson gauge.
    const double mean_n = std::accumulate(n.begin(), n.end(), 0.0) / double(N);
    const double c = h / (lambda * lambda);
    double acc = 0.0;
    for (std::size_t k = 1; k < N; ++k) {
        acc += c * (mean_n - n[k]);
        E[k] = acc;
    }
    const double m = std::accumulate(E.begin(), E.end(), 0.0) / double(N);
    for (double& v : E) v -= m;
    return E;
}

EmState init_well_prepared_em(std::span<const double> n_profile, std::span<const double> ux,
                              std::span<const double> uy, double B0, const EmParams& p,
                              const Grid1D& g, bool magnetic_from_current) {
    if (g.bc != Boundary::periodic)
        throw PreconditionError("init_well_prepared_em: only periodic grids are supported");
    const std::size_t N = g.n_cells;
    if (n_profile.size() != N || ux.size() != N || uy.size() != N)
        throw PreconditionError("init_well_prepared_em: profile size mismatch");
    EmState s;
    s.n.assign(n_profile.begin(), n_profile.end());
    for (double v : s.n)
        if (!(v > 0.0)) throw PreconditionError("init_well_prepared_em: density must be positive");
    s.qx.resize(N);
    s.qy.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        s.qx[k] = s.n[k] * ux[k];
        s.qy[k] = s.n[k] * uy[k];
    }
    s.Ex = gauss_field(s.n, p.lambda, g.h);
    s.Ey.assign(N, 0.0);
    s.Bz.assign(N, B0);
    if (magnetic_from_current) {
        const double mean_uy = std::accumulate(uy.begin(), uy.end(), 0.0) / double(N);
        const double scale = std::max(1.0, std::abs(*std::max_element(
                                               uy.begin(), uy.end(), [](double a, double b) {
                                                   return std::abs(a) < std::abs(b);
                                               })));
        if (std::abs(mean_uy) > 1e-12 * scale)
            throw PreconditionError("init_well_prepared_em: u_y must have zero mean");
        // Bz_{k+1/2} - Bz_{k-1/2} = h u_y,k
        double acc = B0;
        for (std::size_t k = 0; k < N; ++k) {
            acc += g.h * uy[k];
            s.Bz[k] = acc;
        }
    }
    return s;
}

}  // namespace apfv
