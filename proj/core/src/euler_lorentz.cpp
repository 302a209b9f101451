#include "apfv/euler_lorentz.hpp"

#include "apfv/aniso_elliptic.hpp"
#include "apfv/errors.hpp"
#include "apfv/linsolve.hpp"

#include <algorithm>
#include <cmath>

namespace apfv {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

void check_inputs(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                  const Grid3D& g, const char* who) {
    const std::size_t N = g.size();
    if (s.n.size() != N || s.q.size() != N || f.E.size() != N || f.B.size() != N)
        throw PreconditionError(std::string(who) + ": array sizes do not match the grid");
    if (!(p.tau >= 0.0) || !(p.delta > 0.0))
        throw PreconditionError(std::string(who) + ": need tau >= 0 and delta > 0");
    for (std::size_t id = 0; id < N; ++id) {
        if (!(s.n[id] > 0.0))
            throw PreconditionError(std::string(who) + ": density must be positive");
        if (!(norm(f.B[id]) > 0.0))
            throw PreconditionError(std::string(who) + ": |B| must be positive");
        for (double c : s.q[id])
            if (!std::isfinite(c)) throw PreconditionError(std::string(who) + ": non-finite momentum");
    }
}

double viscosity(const ViscosityChoice& v, double uL, double uR) {
    switch (v.kind) {
        case ViscosityKind::rusanov:
        case ViscosityKind::rusanov_explicit:
            return std::max(uL, uR);
        case ViscosityKind::constant:
            return v.coefficient;
        case ViscosityKind::none:
            break;
    }
    return 0.0;
}

// Centred differences (h_i^-1/2)(v_{K+e_i} - v_{K-e_i}) with ghost copies.
Vec3 grad_ghost(std::span<const double> v, std::size_t id, const Grid3D& g) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
        r[i] = (v[g.neighbor_or_self(id, i, +1)] - v[g.neighbor_or_self(id, i, -1)]) /
               (2.0 * g.h[i]);
    return r;
}

// tau Delta~_q = (h_i^-1/2)(P_{K+e_i} - P_{K-e_i}) + tau Delta_q, written without
// tau^-1 so that tau = 0 is admissible.
std::vector<Vec3> tau_delta_q_tilde(std::span<const double> P, const LorentzExplicit& ex,
                                    double tau, const Grid3D& g) {
    std::vector<Vec3> r(g.size());
    for (std::size_t id = 0; id < g.size(); ++id) {
        const Vec3 gp = grad_ghost(P, id, g);
        for (int i = 0; i < 3; ++i) r[id][i] = gp[i] + tau * ex.delta_q[id][i];
    }
    return r;
}

void assemble_perp(LorentzState& r, const std::vector<Vec3>& G, const LorentzState& s,
                   const LorentzFields& f, const LorentzExplicit& ex, const LorentzParams& p,
                   const std::vector<double>& q_par, const Grid3D& g) {
    r.q.resize(g.size());
    for (std::size_t id = 0; id < g.size(); ++id) {
        const Vec3& b = ex.b[id];
        const double Bm = ex.B_mag[id];
        Vec3 qp{};
        if (g.is_interior(id)) {
            Vec3 Y;
            for (int i = 0; i < 3; ++i)
                Y[i] = (G[id][i] - r.n[id] * f.E[id][i] - p.tau / p.delta * s.q[id][i]) / Bm;
            qp = perp_update_closed_form(Y, b, p.tau, p.delta, Bm);
        } else {
            // Drift relation on the boundary layer.
            Vec3 Y;
            for (int i = 0; i < 3; ++i) Y[i] = (G[id][i] - r.n[id] * f.E[id][i]) / Bm;
            qp = cross(b, Y);
        }
        for (int i = 0; i < 3; ++i) r.q[id][i] = q_par[id] * b[i] + qp[i];
    }
}

}  // namespace

ParPerp par_perp_split(const Vec3& v, const Vec3& b) {
    if (std::abs(norm(b) - 1.0) > 1e-12) throw PreconditionError("par_perp_split: b must be a unit vector");
    const double par = dot(v, b);
    return {par, {v[0] - par * b[0], v[1] - par * b[1], v[2] - par * b[2]}};
}

Vec3 perp_update_closed_form(const Vec3& Y, const Vec3& b, double tau, double delta, double B_mag) {
    if (!(B_mag > 0.0)) throw PreconditionError("perp_update_closed_form: |B| must be positive");
    const double par = dot(Y, b);
    const Vec3 bxY = cross(b, Y);
    const double db = delta * B_mag;
    const double c = db / (tau * tau + db * db);
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = c * (-tau * (Y[i] - par * b[i]) + db * bxY[i]);
    return r;
}

std::vector<double> wall_divergence(std::span<const Vec3> w, const Grid3D& g) {
    std::vector<double> d(g.size(), 0.0);
    for (std::size_t id = 0; id < g.size(); ++id) {
        for (int j = 0; j < 3; ++j) {
            std::size_t nb = 0;
            if (!g.neighbor(id, j, +1, nb)) continue;
            const double W = 0.5 * (w[id][j] + w[nb][j]) / g.h[j];
            d[id] += W;
            d[nb] -= W;
        }
    }
    return d;
}

LorentzExplicit lorentz_explicit_terms(const LorentzState& s, const LorentzFields& f,
                                       const LorentzParams& p, const Grid3D& g) {
    const std::size_t N = g.size();
    LorentzExplicit ex;
    ex.b.resize(N);
    ex.B_mag.resize(N);
    std::vector<Vec3> qperp(N), u(N);
    std::vector<double> umag(N);
    for (std::size_t id = 0; id < N; ++id) {
        ex.B_mag[id] = norm(f.B[id]);
        for (int i = 0; i < 3; ++i) ex.b[id][i] = f.B[id][i] / ex.B_mag[id];
        qperp[id] = par_perp_split(s.q[id], ex.b[id]).perp;
        for (int i = 0; i < 3; ++i) u[id][i] = s.q[id][i] / s.n[id];
        umag[id] = norm(u[id]);
    }
    ex.delta_n.assign(N, 0.0);
    ex.delta_q.assign(N, Vec3{});
    // Loop over faces K + e_j/2. Wall faces carry no mass flux; the momentum
    // flux there uses the ghost copy U_R = U_K, so its viscosity vanishes.
    for (std::size_t id = 0; id < N; ++id) {
        for (int j = 0; j < 3; ++j) {
            const double ih = 1.0 / g.h[j];
            std::size_t nb = 0;
            const bool interior = g.neighbor(id, j, +1, nb);
            if (interior) {
                const double mu = viscosity(p.visc, umag[id], umag[nb]);
                const double Dn = p.visc.density_row ? mu * (s.n[id] - s.n[nb]) : 0.0;
                const double Dt = 0.5 * (qperp[id][j] + qperp[nb][j]) + 0.5 * Dn;
                ex.delta_n[id] += ih * Dt;
                ex.delta_n[nb] -= ih * Dt;
                for (int i = 0; i < 3; ++i) {
                    const double F = 0.5 * (s.q[id][i] * u[id][j] + s.q[nb][i] * u[nb][j] +
                                            mu * (s.q[id][i] - s.q[nb][i]));
                    ex.delta_q[id][i] += ih * F;
                    ex.delta_q[nb][i] -= ih * F;
                }
            } else {
                for (int i = 0; i < 3; ++i) ex.delta_q[id][i] += ih * s.q[id][i] * u[id][j];
            }
            std::size_t lb = 0;
            if (!g.neighbor(id, j, -1, lb))
                for (int i = 0; i < 3; ++i) ex.delta_q[id][i] -= ih * s.q[id][i] * u[id][j];
        }
    }
    return ex;
}

LorentzState step_fdap2(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                        const Grid3D& g) {
    check_inputs(s, f, p, g, "step_fdap2");
    if (!p.pressure.isothermal())
        throw PreconditionError("step_fdap2: only the isothermal closure p = T n is supported");
    const std::size_t N = g.size();
    const double T = p.pressure.T, dt = p.delta;
    const auto ex = lorentz_explicit_terms(s, f, p, g);

    // Q = b . (q^m - delta Delta_q); Delta~~ = Delta~_n - n^m/delta + div_w(Q b).
    std::vector<double> Q(N);
    std::vector<Vec3> Qb(N);
    for (std::size_t id = 0; id < N; ++id) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) v += ex.b[id][i] * (s.q[id][i] - dt * ex.delta_q[id][i]);
        Q[id] = v;
        for (int i = 0; i < 3; ++i) Qb[id][i] = v * ex.b[id][i];
    }
    const auto divQ = wall_divergence(Qb, g);

    AnisoProblem3D prob;
    prob.grid = g;
    prob.tau = p.tau / (dt * dt * T);
    prob.b = ex.b;
    prob.E.resize(N);
    prob.F.resize(N);
    for (std::size_t id = 0; id < N; ++id) {
        for (int i = 0; i < 3; ++i) prob.E[id][i] = f.E[id][i] / T;
        prob.F[id] = -dt * (ex.delta_n[id] - s.n[id] / dt + divQ[id]);
    }
    const std::size_t cols = g.n[0] * g.n[1];
    prob.g_lo.assign(cols, 0.0);
    prob.g_hi.assign(cols, 0.0);

    LorentzState r;
    // delta tau^-1 gamma(n) on K_int, split so that tau = 0 stays finite.
    std::vector<double> force(N, 0.0);
    auto gamma_ae = [&](std::span<const double> v, std::size_t id) {
        double s3 = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = (v[g.neighbor_or_self(id, i, +1)] - v[g.neighbor_or_self(id, i, -1)]) /
                             (2.0 * g.h[i]);
            s3 += prob.b[id][i] * (d - v[id] * prob.E[id][i]);
        }
        return s3;
    };
    if (prob.tau < p.micromacro_threshold) {
        const auto mm = solve_micromacro_3d(prob, false);
        r.n = mm.n;
        for (std::size_t id = 0; id < N; ++id) {
            if (!g.is_interior(id)) continue;
            force[id] = gamma_ae(mm.q, id) / dt;
            if (p.tau > 0.0) force[id] += dt * T / p.tau * gamma_ae(mm.p, id);
        }
    } else {
        r.n = solve_naive_3d(prob, false).n;
        for (std::size_t id = 0; id < N; ++id)
            if (g.is_interior(id)) force[id] = dt * T / p.tau * gamma_ae(r.n, id);
    }
    for (double v : r.n)
        if (!(v > 0.0)) throw SolverError("step_fdap2: density solve produced a non-positive value");

    std::vector<double> q_par(N);
    for (std::size_t id = 0; id < N; ++id) q_par[id] = Q[id] - force[id];

    std::vector<double> pn(N);
    for (std::size_t id = 0; id < N; ++id) pn[id] = p.pressure.p(r.n[id]);
    const auto G = tau_delta_q_tilde(pn, ex, p.tau, g);
    assemble_perp(r, G, s, f, ex, p, q_par, g);
    return r;
}

LorentzState step_fdap1(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                        const Grid3D& g) {
    check_inputs(s, f, p, g, "step_fdap1");
    if (p.tau == 0.0)
        throw SolverError("step_fdap1: the parallel momentum system is singular at tau = 0");
    const std::size_t N = g.size();
    const double dt = p.delta, d2 = dt * dt;
    const auto ex = lorentz_explicit_terms(s, f, p, g);

    std::vector<double> P(N), dp(N), Epar(N);
    for (std::size_t id = 0; id < N; ++id) {
        dp[id] = p.pressure.dp(s.n[id]);
        P[id] = p.pressure.p(s.n[id]) - dt * dp[id] * ex.delta_n[id];
        Epar[id] = dot(ex.b[id], f.E[id]);
    }
    const auto tdq = tau_delta_q_tilde(P, ex, p.tau, g);

    // Linear maps acting on q_par: centred divergence d (zero off K_int) and
    // wall divergence dw, both as stencils on the unknown.
    using Stencil = std::vector<std::pair<std::size_t, double>>;
    std::vector<Stencil> d(N), dw(N);
    for (std::size_t id = 0; id < N; ++id) {
        if (g.is_interior(id)) {
            for (int j = 0; j < 3; ++j) {
                const std::size_t up = g.neighbor_or_self(id, j, +1);
                const std::size_t dn = g.neighbor_or_self(id, j, -1);
                d[id].push_back({up, ex.b[up][j] / (2.0 * g.h[j])});
                d[id].push_back({dn, -ex.b[dn][j] / (2.0 * g.h[j])});
            }
        }
        for (int j = 0; j < 3; ++j) {
            std::size_t nb = 0;
            if (!g.neighbor(id, j, +1, nb)) continue;
            const double c = 0.5 / g.h[j];
            dw[id].push_back({id, c * ex.b[id][j]});
            dw[id].push_back({nb, c * ex.b[nb][j]});
            dw[nb].push_back({id, -c * ex.b[id][j]});
            dw[nb].push_back({nb, -c * ex.b[nb][j]});
        }
    }

    SparseSystem sys(N);
    for (std::size_t id = 0; id < N; ++id) {
        sys.add(id, id, p.tau);
        for (int i = 0; i < 3; ++i) {
            const double c = -d2 * ex.b[id][i] / (2.0 * g.h[i]);
            std::size_t up = 0, dn = 0;
            if (g.neighbor(id, i, +1, up))
                for (const auto& [col, v] : d[up]) sys.add(id, col, c * dp[up] * v);
            if (g.neighbor(id, i, -1, dn))
                for (const auto& [col, v] : d[dn]) sys.add(id, col, -c * dp[dn] * v);
        }
        for (const auto& [col, v] : dw[id]) sys.add(id, col, d2 * Epar[id] * v);
        double R = p.tau * dot(ex.b[id], s.q[id]) - dt * dot(ex.b[id], tdq[id]);
        R += dt * Epar[id] * (s.n[id] - dt * ex.delta_n[id]);
        sys.rhs()[id] = R;
    }
    sys.finalize();
    const auto q_par = solve_sparse(sys);

    std::vector<Vec3> qb(N);
    for (std::size_t id = 0; id < N; ++id)
        for (int i = 0; i < 3; ++i) qb[id][i] = q_par[id] * ex.b[id][i];
    const auto divw = wall_divergence(qb, g);

    LorentzState r;
    r.n.resize(N);
    for (std::size_t id = 0; id < N; ++id) r.n[id] = s.n[id] - dt * (divw[id] + ex.delta_n[id]);
    for (double v : r.n)
        if (!(v > 0.0)) throw SolverError("step_fdap1: update produced a non-positive density");

    // G = tau Delta~_q - delta (h_i^-1/2)(p' d|_{K+e_i} - p' d|_{K-e_i}).
    std::vector<double> pd(N, 0.0);
    for (std::size_t id = 0; id < N; ++id) {
        double v = 0.0;
        for (const auto& [col, c] : d[id]) v += c * q_par[col];
        pd[id] = dp[id] * v;
    }
    std::vector<Vec3> G(N);
    for (std::size_t id = 0; id < N; ++id)
        for (int i = 0; i < 3; ++i) {
            std::size_t up = 0, dn = 0;
            const double a = g.neighbor(id, i, +1, up) ? pd[up] : 0.0;
            const double b = g.neighbor(id, i, -1, dn) ? pd[dn] : 0.0;
            G[id][i] = tdq[id][i] - dt * (a - b) / (2.0 * g.h[i]);
        }
    assemble_perp(r, G, s, f, ex, p, q_par, g);
    return r;
}

double drift_balance_residual(const LorentzState& s, const LorentzFields& f,
                              const Pressure& pressure, const Grid3D& g) {
    double r = 0.0;
    std::vector<double> pn(g.size());
    for (std::size_t id = 0; id < g.size(); ++id) pn[id] = pressure.p(s.n[id]);
    for (std::size_t id = 0; id < g.size(); ++id) {
        if (!g.is_interior(id)) continue;
        const double Bm = norm(f.B[id]);
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
            std::size_t up = 0, dn = 0;
            g.neighbor(id, i, +1, up);
            g.neighbor(id, i, -1, dn);
            v += f.B[id][i] / Bm * ((pn[up] - pn[dn]) / (2.0 * g.h[i]) - s.n[id] * f.E[id][i]);
        }
        r = std::max(r, std::abs(v));
    }
    return r;
}

std::vector<double> drift_equilibrium_density(std::span<const double> seed, const LorentzFields& f,
                                              const Pressure& pressure, const Grid3D& g) {
    if (!pressure.isothermal())
        throw PreconditionError("drift_equilibrium_density: isothermal closure required");
    const std::size_t N = g.size();
    if (seed.size() != N || f.E.size() != N || f.B.size() != N)
        throw PreconditionError("drift_equilibrium_density: size mismatch");
    AnisoProblem3D prob;
    prob.grid = g;
    prob.b.resize(N);
    prob.E.resize(N);
    prob.F.assign(N, 0.0);
    for (std::size_t id = 0; id < N; ++id) {
        const double Bm = norm(f.B[id]);
        for (int i = 0; i < 3; ++i) {
            prob.b[id][i] = f.B[id][i] / Bm;
            prob.E[id][i] = f.E[id][i] / pressure.T;
        }
    }
    for (std::size_t id = 0; id < N; ++id)
        if (prob.b[id][2] == 0.0)
            throw PreconditionError("drift_equilibrium_density: b_3 = 0 somewhere in the box");
    return extend_ge_3d(prob, seed);
}

}  // namespace apfv
