#include "dense_oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace oracle {

using namespace apfv;

namespace {

std::size_t per(long k, std::size_t N) { return std::size_t(((k % long(N)) + long(N)) % long(N)); }

struct Flux1 {
    double fn, fu, fv;
};

// Rusanov flux with the full wave speed, written out from the definition.
Flux1 rusanov(double nL, double qL, double vL, double nR, double qR, double vR, const Pressure& pr) {
    const double uL = qL / nL, uR = qR / nR;
    const double cL = std::sqrt(pr.dp(nL)), cR = std::sqrt(pr.dp(nR));
    const double mu = std::max(std::abs(uL) + cL, std::abs(uR) + cR);
    Flux1 f;
    f.fn = 0.5 * (qL + qR + mu * (nL - nR));
    f.fu = 0.5 * (qL * uL + pr.p(nL) + qR * uR + pr.p(nR) + mu * (qL - qR));
    f.fv = 0.5 * (vL * uL + vR * uR + mu * (vL - vR));
    return f;
}

std::vector<Flux1> fluxes_1d(const std::vector<double>& n, const std::vector<double>& q,
                             const std::vector<double>& v, const Pressure& pr) {
    const std::size_t N = n.size();
    std::vector<Flux1> f(N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t r = per(long(k) + 1, N);
        f[k] = rusanov(n[k], q[k], v[k], n[r], q[r], v[r], pr);
    }
    return f;
}

Eigen::VectorXd lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    return A.colPivHouseholderQr().solve(b);
}

double scaled(double res, double scale) { return std::abs(res) / std::max(scale, 1e-300); }

}  // namespace

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
    }
    return d / std::max(m, 1e-300);
}

// ---------------------------------------------------------------------------
// Euler-Poisson. Unknowns [n | q | phi]; E_{k+1/2} = -(phi_{k+1} - phi_k)/h.

EpState ep_classical(const EpState& s, const EpParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const std::vector<double> zero(N, 0.0);
    const auto f = fluxes_1d(s.n, s.q, zero, p.pressure);

    // Stage 1: mass balance and Poisson for (n, phi), plus the gauge row.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * N + 1, 2 * N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * N + 1);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N), kp = per(long(k) + 1, N);
        A(k, k) = 1.0;
        b(k) = s.n[k] - dt / h * (f[k].fn - f[km].fn);
        const std::size_t r = N + k;
        // lambda^2 h^-1 (E_{k+1/2} - E_{k-1/2}) = -lambda^2 h^-2 (phi_{k+1} - 2 phi_k + phi_{k-1})
        A(r, N + kp) += -l2 / (h * h);
        A(r, N + k) += 2.0 * l2 / (h * h);
        A(r, N + km) += -l2 / (h * h);
        A(r, k) += 1.0;
        b(r) = 1.0;
        A(2 * N, N + k) = 1.0;
    }
    const Eigen::VectorXd x = lsq(A, b);

    EpState r;
    r.n.resize(N);
    r.phi.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        r.n[k] = x(k);
        r.phi[k] = x(N + k);
    }
    r.E.resize(N);
    for (std::size_t k = 0; k < N; ++k) r.E[k] = -(r.phi[per(long(k) + 1, N)] - r.phi[k]) / h;

    // Stage 2: momentum, linear in q once n^{m+1} and E^{m+1} are known.
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
    Eigen::VectorXd c(N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N);
        const double Et = 0.5 * (r.E[k] + r.E[km]);
        c(k) = s.q[k] - dt / h * (f[k].fu - f[km].fu) - dt * r.n[k] * Et;
    }
    const Eigen::VectorXd qv = M.partialPivLu().solve(c);
    r.q.assign(qv.data(), qv.data() + N);
    return r;
}

EpState ep_ap(const EpState& s, const EpParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const std::vector<double> zero(N, 0.0);
    const auto f = fluxes_1d(s.n, s.q, zero, p.pressure);
    const std::size_t P = 2 * N;  // phi offset

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * N + 1, 3 * N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * N + 1);
    // Coefficients of E_{k+1/2} in terms of phi.
    auto addE = [&](std::size_t row, std::size_t face, double c) {
        A(row, P + per(long(face) + 1, N)) += -c / h;
        A(row, P + face) += c / h;
    };
    for (std::size_t k = 0; k < N; ++k) {
        const long K = long(k);
        const std::size_t km = per(K - 1, N);
        // Mass: n_k + dt/h (ft_{k+1/2} - ft_{k-1/2}) = n^m_k with
        // ft_{j+1/2} = f_n - dt/2 (n_j + n_{j+1}) E_{j+1/2} - dt/(2h) (f_u,j+3/2 - f_u,j-1/2).
        A(k, k) = 1.0;
        double rhs = s.n[k];
        for (int side = 0; side < 2; ++side) {
            const std::size_t j = side == 0 ? k : km;
            const double sg = side == 0 ? 1.0 : -1.0;
            const std::size_t jp = per(long(j) + 1, N);
            const double expl = f[j].fn - 0.5 * dt / h * (f[per(long(j) + 1, N)].fu - f[per(long(j) - 1, N)].fu);
            rhs -= sg * dt / h * expl;
            addE(k, j, -sg * dt / h * 0.5 * dt * (s.n[j] + s.n[jp]));
        }
        b(k) = rhs;
        // Momentum with explicit density in front of the field.
        const std::size_t rq = N + k;
        A(rq, N + k) = 1.0;
        addE(rq, k, 0.5 * dt * s.n[k]);
        addE(rq, km, 0.5 * dt * s.n[k]);
        b(rq) = s.q[k] - dt / h * (f[k].fu - f[km].fu);
        // Gauss law.
        const std::size_t rg = 2 * N + k;
        addE(rg, k, l2 / h);
        addE(rg, km, -l2 / h);
        A(rg, k) += 1.0;
        b(rg) = 1.0;
        A(3 * N, P + k) = 1.0;
    }
    const Eigen::VectorXd x = lsq(A, b);
    EpState r;
    r.n.assign(x.data(), x.data() + N);
    r.q.assign(x.data() + N, x.data() + 2 * N);
    r.phi.assign(x.data() + 2 * N, x.data() + 3 * N);
    r.E.resize(N);
    for (std::size_t k = 0; k < N; ++k) r.E[k] = -(r.phi[per(long(k) + 1, N)] - r.phi[k]) / h;
    return r;
}

double fdep_residual(const EpState& s, const EpState& r, const EpParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const std::vector<double> zero(N, 0.0);
    const auto f = fluxes_1d(s.n, s.q, zero, p.pressure);
    std::vector<double> ft(N);
    for (std::size_t j = 0; j < N; ++j)
        ft[j] = f[j].fn - 0.5 * dt * (s.n[j] + s.n[per(long(j) + 1, N)]) * r.E[j] -
                0.5 * dt / h * (f[per(long(j) + 1, N)].fu - f[per(long(j) - 1, N)].fu);
    double worst = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N);
        const double a1 = (r.n[k] - s.n[k]) / dt, a2 = (ft[k] - ft[km]) / h;
        worst = std::max(worst, scaled(a1 + a2, std::max({std::abs(r.n[k] / dt), std::abs(ft[k] / h), 1.0})));
        const double Et = 0.5 * (r.E[k] + r.E[km]);
        const double m1 = (r.q[k] - s.q[k]) / dt, m2 = (f[k].fu - f[km].fu) / h, m3 = s.n[k] * Et;
        worst = std::max(worst, scaled(m1 + m2 + m3, std::max({std::abs(r.q[k] / dt), std::abs(f[k].fu / h), std::abs(m3), 1.0})));
        const double gl = l2 / h * (r.E[k] - r.E[km]) - (1.0 - r.n[k]);
        worst = std::max(worst, scaled(gl, std::max({l2 / h * std::abs(r.E[k]), std::abs(r.n[k])})));
        const double el = r.E[k] + (r.phi[per(long(k) + 1, N)] - r.phi[k]) / h;
        worst = std::max(worst, scaled(el, std::max({std::abs(r.E[k]), std::abs(r.phi[k] / h), 1e-300})));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Euler-Maxwell. Unknowns [n | qx | qy | Ex | Ey | Bz].

namespace {

struct EmBlocks {
    std::size_t N;
    std::size_t n(std::size_t k) const { return k; }
    std::size_t qx(std::size_t k) const { return N + k; }
    std::size_t qy(std::size_t k) const { return 2 * N + k; }
    std::size_t Ex(std::size_t k) const { return 3 * N + k; }
    std::size_t Ey(std::size_t k) const { return 4 * N + k; }
    std::size_t Bz(std::size_t k) const { return 5 * N + k; }
};

EmState unpack_em(const Eigen::VectorXd& x, std::size_t N) {
    EmState r;
    auto seg = [&](int b) { return std::vector<double>(x.data() + b * N, x.data() + (b + 1) * N); };
    r.n = seg(0);
    r.qx = seg(1);
    r.qy = seg(2);
    r.Ex = seg(3);
    r.Ey = seg(4);
    r.Bz = seg(5);
    return r;
}

}  // namespace

EmState em_classical(const EmState& s, const EmParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const auto f = fluxes_1d(s.n, s.qx, s.qy, p.pressure);
    const EmBlocks B{N};

    // Field and density block: all linear, solved together.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6 * N, 6 * N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(6 * N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N), kp = per(long(k) + 1, N);
        A(B.n(k), B.n(k)) = 1.0;
        b(B.n(k)) = s.n[k] - dt / h * (f[k].fn - f[km].fn);
        A(B.Ex(k), B.Ex(k)) = l2 / dt;
        b(B.Ex(k)) = l2 / dt * s.Ex[k] + f[k].fn;
        A(B.Bz(k), B.Bz(k)) = 1.0 / dt;
        b(B.Bz(k)) = s.Bz[k] / dt - (s.Ey[kp] - s.Ey[k]) / h;
        A(B.Ey(k), B.Ey(k)) = l2 / dt;
        A(B.Ey(k), B.Bz(k)) += 1.0 / h;
        A(B.Ey(k), B.Bz(km)) -= 1.0 / h;
        b(B.Ey(k)) = l2 / dt * s.Ey[k] + s.qy[k];
        // Momentum rows are filled in stage 2; identity placeholders here.
        A(B.qx(k), B.qx(k)) = 1.0;
        A(B.qy(k), B.qy(k)) = 1.0;
    }
    Eigen::VectorXd x = A.partialPivLu().solve(b);
    EmState r = unpack_em(x, N);
    // Momentum: products n^{m+1} Ex^{m+1}, n^{m+1} Ey^{m+1} with known factors.
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N);
        const double Bt = 0.5 * (s.Bz[k] + s.Bz[km]);
        const double Ext = 0.5 * (r.Ex[k] + r.Ex[km]);
        r.qx[k] = s.qx[k] + dt * (-(f[k].fu - f[km].fu) / h - r.n[k] * Ext - s.qy[k] * Bt);
        r.qy[k] = s.qy[k] + dt * (-(f[k].fv - f[km].fv) / h - r.n[k] * r.Ey[k] + s.qx[k] * Bt);
    }
    return r;
}

EmState em_ap(const EmState& s, const EmParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const auto f = fluxes_1d(s.n, s.qx, s.qy, p.pressure);
    const EmBlocks B{N};

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6 * N, 6 * N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(6 * N);
    // ft_{j+1/2} = expl_j - dt/2 (n_j + n_{j+1}) Ex_{j+1/2}
    std::vector<double> expl(N), coef(N);
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t jp = per(long(j) + 1, N), jm = per(long(j) - 1, N);
        expl[j] = f[j].fn - 0.5 * dt / h * (f[jp].fu - f[jm].fu) -
                  0.5 * dt * (s.qy[j] + s.qy[jp]) * s.Bz[j];
        coef[j] = -0.5 * dt * (s.n[j] + s.n[jp]);
    }
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N), kp = per(long(k) + 1, N);
        const double Bt = 0.5 * (s.Bz[k] + s.Bz[km]);
        // Mass.
        A(B.n(k), B.n(k)) = 1.0 / dt;
        A(B.n(k), B.Ex(k)) += coef[k] / h;
        A(B.n(k), B.Ex(km)) -= coef[km] / h;
        b(B.n(k)) = s.n[k] / dt - (expl[k] - expl[km]) / h;
        // Momentum x and y, explicit density in front of the fields.
        A(B.qx(k), B.qx(k)) = 1.0 / dt;
        A(B.qx(k), B.Ex(k)) += 0.5 * s.n[k];
        A(B.qx(k), B.Ex(km)) += 0.5 * s.n[k];
        b(B.qx(k)) = s.qx[k] / dt - (f[k].fu - f[km].fu) / h - s.qy[k] * Bt;
        A(B.qy(k), B.qy(k)) = 1.0 / dt;
        A(B.qy(k), B.Ey(k)) += s.n[k];
        b(B.qy(k)) = s.qy[k] / dt - (f[k].fv - f[km].fv) / h + s.qx[k] * Bt;
        // Faraday, implicit E_y.
        A(B.Bz(k), B.Bz(k)) = 1.0 / dt;
        A(B.Bz(k), B.Ey(kp)) += 1.0 / h;
        A(B.Bz(k), B.Ey(k)) -= 1.0 / h;
        b(B.Bz(k)) = s.Bz[k] / dt;
        // Ampere x with the modified mass flux as current.
        A(B.Ex(k), B.Ex(k)) = l2 / dt - coef[k];
        b(B.Ex(k)) = l2 / dt * s.Ex[k] + expl[k];
        // Ampere y with the new current.
        A(B.Ey(k), B.Ey(k)) = l2 / dt;
        A(B.Ey(k), B.Bz(k)) += 1.0 / h;
        A(B.Ey(k), B.Bz(km)) -= 1.0 / h;
        A(B.Ey(k), B.qy(k)) -= 1.0;
        b(B.Ey(k)) = l2 / dt * s.Ey[k];
    }
    return unpack_em(A.partialPivLu().solve(b), N);
}

double fdem_residual(const EmState& s, const EmState& r, const EmParams& p, const Grid1D& g) {
    const std::size_t N = g.n_cells;
    const double h = g.h, dt = p.delta, l2 = p.lambda * p.lambda;
    const auto f = fluxes_1d(s.n, s.qx, s.qy, p.pressure);
    std::vector<double> ft(N);
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t jp = per(long(j) + 1, N), jm = per(long(j) - 1, N);
        ft[j] = f[j].fn - 0.5 * dt * (s.n[j] + s.n[jp]) * r.Ex[j] -
                0.5 * dt / h * (f[jp].fu - f[jm].fu) - 0.5 * dt * (s.qy[j] + s.qy[jp]) * s.Bz[j];
    }
    double worst = 0.0;
    auto chk = [&](std::initializer_list<double> terms) {
        double sum = 0.0, sc = 0.0;
        for (double t : terms) {
            sum += t;
            sc = std::max(sc, std::abs(t));
        }
        worst = std::max(worst, scaled(sum, std::max(sc, 1e-300)));
    };
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t km = per(long(k) - 1, N), kp = per(long(k) + 1, N);
        const double Bt = 0.5 * (s.Bz[k] + s.Bz[km]);
        const double Ext = 0.5 * (r.Ex[k] + r.Ex[km]);
        chk({r.n[k] / dt, -s.n[k] / dt, ft[k] / h, -ft[km] / h});
        chk({r.qx[k] / dt, -s.qx[k] / dt, f[k].fu / h, -f[km].fu / h, s.n[k] * Ext, s.qy[k] * Bt});
        chk({r.qy[k] / dt, -s.qy[k] / dt, f[k].fv / h, -f[km].fv / h, s.n[k] * r.Ey[k], -s.qx[k] * Bt});
        chk({r.Bz[k] / dt, -s.Bz[k] / dt, r.Ey[kp] / h, -r.Ey[k] / h});
        chk({l2 / dt * r.Ex[k], -l2 / dt * s.Ex[k], -ft[k]});
        chk({l2 / dt * r.Ey[k], -l2 / dt * s.Ey[k], r.Bz[k] / h, -r.Bz[km] / h, -r.qy[k]});
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Euler-Lorentz. Unknowns [n (N) | q (3N, interleaved)].

namespace {

struct Box {
    const Grid3D& g;
    std::array<long, 3> m(std::size_t id) const {
        return {long(id % g.n[0]), long((id / g.n[0]) % g.n[1]), long(id / (g.n[0] * g.n[1]))};
    }
    // Neighbour id or nullopt when it falls outside a bounded direction.
    std::optional<std::size_t> nb(std::size_t id, int d, int s) const {
        auto c = m(id);
        c[d] += s;
        if (c[d] < 0 || c[d] >= long(g.n[d])) {
            if (!g.periodic[d]) return std::nullopt;
            c[d] = (c[d] + long(g.n[d])) % long(g.n[d]);
        }
        return std::size_t((c[2] * long(g.n[1]) + c[1]) * long(g.n[0]) + c[0]);
    }
    std::size_t ghost(std::size_t id, int d, int s) const { return nb(id, d, s).value_or(id); }
    bool interior(std::size_t id) const {
        const auto c = m(id);
        for (int d = 0; d < 3; ++d)
            if (!g.periodic[d] && (c[d] == 0 || c[d] == long(g.n[d]) - 1)) return false;
        return true;
    }
};

struct Explicit {
    std::vector<Vec3> b;
    std::vector<double> Bm;
    std::vector<double> dn;  // tilde Delta_n
    std::vector<Vec3> dq;    // Delta_q
};

Explicit explicit_terms(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                        const Box& bx) {
    const std::size_t N = s.n.size();
    Explicit e;
    e.b.resize(N);
    e.Bm.resize(N);
    e.dn.assign(N, 0.0);
    e.dq.assign(N, Vec3{});
    std::vector<double> umag(N);
    for (std::size_t id = 0; id < N; ++id) {
        const auto& B = f.B[id];
        e.Bm[id] = std::sqrt(B[0] * B[0] + B[1] * B[1] + B[2] * B[2]);
        for (int i = 0; i < 3; ++i) e.b[id][i] = B[i] / e.Bm[id];
        const auto& q = s.q[id];
        umag[id] = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) / s.n[id];
    }
    auto mu = [&](std::size_t L, std::size_t R) {
        switch (p.visc.kind) {
            case ViscosityKind::rusanov:
            case ViscosityKind::rusanov_explicit: return std::max(umag[L], umag[R]);
            case ViscosityKind::constant: return p.visc.coefficient;
            case ViscosityKind::none: break;
        }
        return 0.0;
    };
    auto qperp_j = [&](std::size_t id, int j) {
        double par = 0.0;
        for (int i = 0; i < 3; ++i) par += e.b[id][i] * s.q[id][i];
        return s.q[id][j] - par * e.b[id][j];
    };
    // Face K + e_j/2 between L and R (R may be the ghost copy of L).
    auto Dt = [&](std::size_t L, std::optional<std::size_t> R, int j) {
        if (!R) return 0.0;
        const double Dn = p.visc.density_row ? mu(L, *R) * (s.n[L] - s.n[*R]) : 0.0;
        return 0.5 * (qperp_j(L, j) + qperp_j(*R, j)) + 0.5 * Dn;
    };
    auto Fij = [&](std::size_t L, std::size_t R, int i, int j) {
        return 0.5 * (s.q[L][i] * s.q[L][j] / s.n[L] + s.q[R][i] * s.q[R][j] / s.n[R] +
                      mu(L, R) * (s.q[L][i] - s.q[R][i]));
    };
    for (std::size_t id = 0; id < N; ++id) {
        for (int j = 0; j < 3; ++j) {
            const double ih = 1.0 / bx.g.h[j];
            const auto up = bx.nb(id, j, +1), dn = bx.nb(id, j, -1);
            e.dn[id] += ih * (Dt(id, up, j) - (dn ? Dt(*dn, id, j) : 0.0));
            const std::size_t upg = up.value_or(id), dng = dn.value_or(id);
            for (int i = 0; i < 3; ++i)
                e.dq[id][i] += ih * (Fij(id, upg, i, j) - Fij(dng, id, i, j));
        }
    }
    return e;
}

// Two unit vectors spanning the plane orthogonal to b.
std::array<Vec3, 2> tangents(const Vec3& b) {
    Vec3 a = std::abs(b[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const double ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    Vec3 t1{a[0] - ab * b[0], a[1] - ab * b[1], a[2] - ab * b[2]};
    const double n1 = std::sqrt(t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]);
    for (double& c : t1) c /= n1;
    Vec3 t2{b[1] * t1[2] - b[2] * t1[1], b[2] * t1[0] - b[0] * t1[2], b[0] * t1[1] - b[1] * t1[0]};
    return {t1, t2};
}

// Row helpers for a linear form over the unknowns.
struct Lin {
    Eigen::MatrixXd& A;
    Eigen::VectorXd& rhs;
    std::size_t N;
    std::size_t nidx(std::size_t id) const { return id; }
    std::size_t qidx(std::size_t id, int i) const { return N + 3 * id + std::size_t(i); }
};

// Coefficients of (b x W)_i where W_k = c_k * x  is linear. Returns the matrix
// (b x .) as rows.
std::array<Vec3, 3> cross_matrix(const Vec3& b) {
    return {{{0.0, -b[2], b[1]}, {b[2], 0.0, -b[0]}, {-b[1], b[0], 0.0}}};
}

// Mass rows: (n - n^m)/dt + sum_j h_j^-1 (W_+ - W_-) + dn = 0 with
// W = (qpar b_j|_K + qpar b_j|_{K+e_j}) / 2 on interior faces.
void mass_rows(Lin& L, const LorentzState& s, const Explicit& e, const Box& bx, double dt) {
    const std::size_t N = L.N;
    for (std::size_t id = 0; id < N; ++id) {
        L.A(id, L.nidx(id)) += 1.0 / dt;
        L.rhs(id) = s.n[id] / dt - e.dn[id];
        for (int j = 0; j < 3; ++j) {
            const double c = 0.5 / bx.g.h[j];
            auto add_face = [&](std::size_t a, std::size_t c2, double sg) {
                for (std::size_t cell : {a, c2})
                    for (int i = 0; i < 3; ++i)
                        L.A(id, L.qidx(cell, i)) += sg * c * e.b[cell][j] * e.b[cell][i];
            };
            if (auto up = bx.nb(id, j, +1)) add_face(id, *up, +1.0);
            if (auto dn = bx.nb(id, j, -1)) add_face(*dn, id, -1.0);
        }
    }
}

LorentzState unpack_el(const Eigen::VectorXd& x, std::size_t N) {
    LorentzState r;
    r.n.assign(x.data(), x.data() + N);
    r.q.resize(N);
    for (std::size_t id = 0; id < N; ++id)
        for (int i = 0; i < 3; ++i) r.q[id][i] = x(N + 3 * id + i);
    return r;
}

}  // namespace

LorentzState fdap2(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                   const Grid3D& g) {
    const std::size_t N = g.size();
    const Box bx{g};
    const auto e = explicit_terms(s, f, p, bx);
    const double dt = p.delta, tau = p.tau, T = p.pressure.T;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * N);
    Lin L{A, rhs, N};
    mass_rows(L, s, e, bx, dt);

    for (std::size_t id = 0; id < N; ++id) {
        const std::size_t r0 = N + 3 * id;
        const auto& b = e.b[id];
        if (bx.interior(id)) {
            // tau (q - q^m)/dt + T grad n + tau Delta_q - n E - q x B = 0
            const auto& B = f.B[id];
            const auto X = cross_matrix(B);  // (B x q) = X q, so q x B = -X q
            for (int i = 0; i < 3; ++i) {
                const std::size_t r = r0 + std::size_t(i);
                A(r, L.qidx(id, i)) += tau / dt;
                A(r, L.nidx(*bx.nb(id, i, +1))) += T / (2.0 * g.h[i]);
                A(r, L.nidx(*bx.nb(id, i, -1))) -= T / (2.0 * g.h[i]);
                A(r, L.nidx(id)) -= f.E[id][i];
                for (int k = 0; k < 3; ++k) A(r, L.qidx(id, k)) += X[i][k];
                rhs(r) = tau / dt * s.q[id][i] - tau * e.dq[id][i];
            }
        } else {
            // b . q = Q
            double Q = 0.0;
            for (int i = 0; i < 3; ++i) Q += b[i] * (s.q[id][i] - dt * e.dq[id][i]);
            for (int i = 0; i < 3; ++i) A(r0, L.qidx(id, i)) = b[i];
            rhs(r0) = Q;
            // t . q = t . (b x (G~ - n E)) / |B|, G~_i = T (2h_i)^-1 (n_+ - n_-) + tau dq_i
            const auto t = tangents(b);
            const auto X = cross_matrix(b);
            for (int a = 0; a < 2; ++a) {
                const std::size_t r = r0 + 1 + std::size_t(a);
                for (int i = 0; i < 3; ++i) A(r, L.qidx(id, i)) += t[a][i];
                // w = t^T X / |B| acts on (G~ - nE)
                Vec3 w{};
                for (int k = 0; k < 3; ++k)
                    for (int i = 0; i < 3; ++i) w[k] += t[a][i] * X[i][k] / e.Bm[id];
                double c = 0.0;
                for (int k = 0; k < 3; ++k) {
                    A(r, L.nidx(bx.ghost(id, k, +1))) -= w[k] * T / (2.0 * g.h[k]);
                    A(r, L.nidx(bx.ghost(id, k, -1))) += w[k] * T / (2.0 * g.h[k]);
                    A(r, L.nidx(id)) += w[k] * f.E[id][k];
                    c += w[k] * tau * e.dq[id][k];
                }
                rhs(r) = c;
            }
        }
    }
    return unpack_el(A.partialPivLu().solve(rhs), N);
}

LorentzState fdap1(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                   const Grid3D& g) {
    const std::size_t N = g.size();
    const Box bx{g};
    const auto e = explicit_terms(s, f, p, bx);
    const double dt = p.delta, tau = p.tau;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * N, 4 * N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * N);
    Lin L{A, rhs, N};
    mass_rows(L, s, e, bx, dt);

    std::vector<double> dp(N), P(N);
    for (std::size_t id = 0; id < N; ++id) {
        dp[id] = p.pressure.dp(s.n[id]);
        P[id] = p.pressure.p(s.n[id]) - dt * dp[id] * e.dn[id];
    }
    // tau Delta~_q_i = (2h_i)^-1 (P_+ - P_-) with ghost copies + tau Delta_q_i
    std::vector<Vec3> tdq(N);
    for (std::size_t id = 0; id < N; ++id)
        for (int i = 0; i < 3; ++i)
            tdq[id][i] = (P[bx.ghost(id, i, +1)] - P[bx.ghost(id, i, -1)]) / (2.0 * g.h[i]) +
                         tau * e.dq[id][i];

    // Adds c * (-dt) (2h_i)^-1 [p' d|_{K+e_i} - p' d|_{K-e_i}] into row r, where
    // d_M = sum_j (2h_j)^-1 (qpar b_j|_{M+e_j} - qpar b_j|_{M-e_j}) on interior M, 0 elsewhere.
    auto add_pressure_corr = [&](std::size_t r, std::size_t id, int i, double c) {
        for (int s2 : {+1, -1}) {
            const auto M = bx.nb(id, i, s2);
            if (!M || !bx.interior(*M)) continue;
            const double w = c * (-dt) * double(s2) / (2.0 * g.h[i]) * dp[*M];
            for (int j = 0; j < 3; ++j)
                for (int s3 : {+1, -1}) {
                    const std::size_t C = *bx.nb(*M, j, s3);
                    const double wj = w * double(s3) / (2.0 * g.h[j]) * e.b[C][j];
                    for (int k = 0; k < 3; ++k) A(r, L.qidx(C, k)) += wj * e.b[C][k];
                }
        }
    };

    for (std::size_t id = 0; id < N; ++id) {
        const std::size_t r0 = N + 3 * id;
        const auto& b = e.b[id];
        if (bx.interior(id)) {
            // tau (q - q^m)/dt + tau Delta~_q - dt (2h_i)^-1 [p'd] - n E - q x B = 0
            const auto X = cross_matrix(f.B[id]);
            for (int i = 0; i < 3; ++i) {
                const std::size_t r = r0 + std::size_t(i);
                A(r, L.qidx(id, i)) += tau / dt;
                add_pressure_corr(r, id, i, 1.0);
                A(r, L.nidx(id)) -= f.E[id][i];
                for (int k = 0; k < 3; ++k) A(r, L.qidx(id, k)) += X[i][k];
                rhs(r) = tau / dt * s.q[id][i] - tdq[id][i];
            }
        } else {
            // Parallel momentum: b . [tau (q - q^m)/dt + G - n E] = 0 where
            // G = tau Delta~_q - dt (2h_i)^-1 [p'd].
            for (int i = 0; i < 3; ++i) {
                A(r0, L.qidx(id, i)) += tau / dt * b[i];
                add_pressure_corr(r0, id, i, b[i]);
                A(r0, L.nidx(id)) -= b[i] * f.E[id][i];
            }
            double c = 0.0;
            for (int i = 0; i < 3; ++i) c += b[i] * (tau / dt * s.q[id][i] - tdq[id][i]);
            rhs(r0) = c;
            // Drift relation for the perpendicular part.
            const auto t = tangents(b);
            const auto X = cross_matrix(b);
            for (int a = 0; a < 2; ++a) {
                const std::size_t r = r0 + 1 + std::size_t(a);
                for (int i = 0; i < 3; ++i) A(r, L.qidx(id, i)) += t[a][i];
                Vec3 w{};
                for (int k = 0; k < 3; ++k)
                    for (int i = 0; i < 3; ++i) w[k] += t[a][i] * X[i][k] / e.Bm[id];
                double cc = 0.0;
                for (int k = 0; k < 3; ++k) {
                    add_pressure_corr(r, id, k, -w[k]);
                    A(r, L.nidx(id)) += w[k] * f.E[id][k];
                    cc += w[k] * tdq[id][k];
                }
                rhs(r) = cc;
            }
        }
    }
    return unpack_el(A.partialPivLu().solve(rhs), N);
}

}  // namespace oracle
