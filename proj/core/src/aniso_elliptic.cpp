#include "apfv/aniso_elliptic.hpp"

#include "apfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace apfv {

namespace {

using Stencil = std::vector<std::pair<std::size_t, double>>;

// One interior row of the operator: gamma_K(u) = sum gam[i].second * u[gam[i].first]
// and the test-side derivative d_K(v) without the E term.
struct Row {
    Stencil gam;
    Stencil der;
};

void add_aE(SparseSystem& sys, const std::vector<Row>& rows, std::size_t col_offset = 0,
            const std::vector<std::ptrdiff_t>* col_map = nullptr) {
    for (const auto& r : rows)
        for (const auto& [tv, dv] : r.der)
            for (const auto& [tu, gu] : r.gam) {
                if (col_map) {
                    const auto c = (*col_map)[tu];
                    if (c < 0) continue;
                    sys.add(tv, col_offset + std::size_t(c), dv * gu);
                } else {
                    sys.add(tv, tu, dv * gu);
                }
            }
}

std::vector<Row> rows_1d(const AnisoProblem1D& p) {
    const std::size_t N = p.size();
    const double c = 0.5 / p.h;
    std::vector<Row> rows;
    rows.reserve(N - 2);
    for (std::size_t k = 1; k + 1 < N; ++k)
        rows.push_back({{{k + 1, c}, {k - 1, -c}, {k, -p.E[k]}}, {{k + 1, c}, {k - 1, -c}}});
    return rows;
}

std::vector<double> gamma_rhs_1d(const AnisoProblem1D& p) {
    const std::size_t N = p.size();
    std::vector<double> r = p.F;
    const double c = 0.5 / p.h;
    r[N - 2] += c * p.g_hi;
    r[N - 1] += c * p.g_hi;
    r[0] -= c * p.g_lo;
    r[1] -= c * p.g_lo;
    return r;
}

void check_1d(const AnisoProblem1D& p) {
    if (p.size() < 6) throw PreconditionError("aniso 1D: need at least 6 cells");
    if (p.F.size() != p.size()) throw PreconditionError("aniso 1D: E and F sizes differ");
    if (!(p.h > 0.0)) throw PreconditionError("aniso 1D: h must be positive");
    if (!(p.tau >= 0.0)) throw PreconditionError("aniso 1D: tau must be non-negative");
}

// Columns of the two G_E basis vectors started from e_0 and e_1.
std::array<std::vector<double>, 2> ge_basis_1d(std::span<const double> E, double h) {
    std::array<std::vector<double>, 2> P;
    for (std::size_t a = 0; a < 2; ++a) {
        std::vector<double> v(E.size(), 0.0);
        v[a] = 1.0;
        P[a] = decompose_1d(v, E, h).p;
    }
    return P;
}

}  // namespace

AnisoProblem1D make_aniso_problem_1d(std::size_t M, double h, double tau, std::vector<double> E,
                                     std::vector<double> F, double g_lo, double g_hi) {
    if (M < 3) throw PreconditionError("make_aniso_problem_1d: M must be at least 3");
    if (E.size() != 2 * M + 1 || F.size() != 2 * M + 1)
        throw PreconditionError("make_aniso_problem_1d: fields must have 2M + 1 entries");
    AnisoProblem1D p{h, tau, std::move(E), std::move(F), g_lo, g_hi};
    check_1d(p);
    return p;
}

SparseSystem assemble_naive_1d(const AnisoProblem1D& prob) {
    check_1d(prob);
    const std::size_t N = prob.size();
    SparseSystem sys(N);
    add_aE(sys, rows_1d(prob));
    for (std::size_t k = 0; k < N; ++k) sys.add(k, k, prob.tau);
    const auto r = gamma_rhs_1d(prob);
    for (std::size_t k = 0; k < N; ++k) sys.rhs()[k] = prob.tau * r[k];
    sys.finalize();
    return sys;
}

SparseSystem assemble_micromacro_1d(const AnisoProblem1D& prob) {
    check_1d(prob);
    const std::size_t N = prob.size();
    // Unknowns: (c0, c1) for p = c0 P0 + c1 P1, then q_2 .. q_{N-1}.
    SparseSystem sys(N);
    const auto P = ge_basis_1d(prob.E, prob.h);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < N; ++k)
            if (P[a][k] != 0.0) sys.add(k, a, P[a][k]);
    std::vector<std::ptrdiff_t> cmap(N, -1);
    for (std::size_t k = 2; k < N; ++k) cmap[k] = std::ptrdiff_t(k);
    add_aE(sys, rows_1d(prob), 0, &cmap);
    for (std::size_t k = 2; k < N; ++k) sys.add(k, k, prob.tau);
    sys.rhs() = gamma_rhs_1d(prob);
    sys.finalize();
    return sys;
}

NaiveSolution solve_naive_1d(const AnisoProblem1D& prob, bool estimate_condition) {
    if (!(prob.tau > 0.0))
        throw PreconditionError("solve_naive_1d: tau = 0 makes the naive system singular");
    const auto sys = assemble_naive_1d(prob);
    Factorization lu(sys);
    Eigen::Map<const Eigen::VectorXd> b(sys.rhs().data(), Eigen::Index(sys.dimension()));
    const Eigen::VectorXd x = lu.solve(b);
    NaiveSolution s;
    s.n.assign(x.data(), x.data() + x.size());
    if (estimate_condition) s.condition_estimate = condition_estimate(sys, lu);
    return s;
}

MicroMacroSolution solve_micromacro_1d(const AnisoProblem1D& prob, bool estimate_condition) {
    const auto sys = assemble_micromacro_1d(prob);
    Factorization lu(sys);
    Eigen::Map<const Eigen::VectorXd> b(sys.rhs().data(), Eigen::Index(sys.dimension()));
    const Eigen::VectorXd x = lu.solve(b);
    const std::size_t N = prob.size();
    const auto P = ge_basis_1d(prob.E, prob.h);
    MicroMacroSolution s;
    s.p.resize(N);
    s.q.assign(N, 0.0);
    s.n.resize(N);
    for (std::size_t k = 0; k < N; ++k) s.p[k] = x(0) * P[0][k] + x(1) * P[1][k];
    for (std::size_t k = 2; k < N; ++k) s.q[k] = x(Eigen::Index(k));
    for (std::size_t k = 0; k < N; ++k) s.n[k] = s.p[k] + prob.tau * s.q[k];
    if (estimate_condition) s.condition_estimate = condition_estimate(sys, lu);
    return s;
}

double a_E_1d(std::span<const double> u, std::span<const double> v, std::span<const double> E,
              double h) {
    double s = 0.0;
    for (std::size_t k = 1; k + 1 < u.size(); ++k) {
        const double g = (u[k + 1] - u[k - 1]) / (2.0 * h) - u[k] * E[k];
        s += g * (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    return s;
}

Decomposition decompose_1d(std::span<const double> v, std::span<const double> E, double h) {
    const std::size_t N = v.size();
    if (N < 3 || E.size() != N) throw PreconditionError("decompose_1d: size mismatch");
    Decomposition d;
    d.p.resize(N);
    d.p[0] = v[0];
    d.p[1] = v[1];
    for (std::size_t k = 1; k + 1 < N; ++k) d.p[k + 1] = d.p[k - 1] + 2.0 * h * d.p[k] * E[k];
    d.q.resize(N);
    for (std::size_t k = 0; k < N; ++k) d.q[k] = v[k] - d.p[k];
    d.q[0] = d.q[1] = 0.0;
    return d;
}

double ge_residual_1d(std::span<const double> p, std::span<const double> E, double h) {
    double r = 0.0;
    for (std::size_t k = 1; k + 1 < p.size(); ++k)
        r = std::max(r, std::abs((p[k + 1] - p[k - 1]) / (2.0 * h) - p[k] * E[k]));
    return r;
}

double LimitOracle1D::n0(double xq) const {
    const double dx = x[1] - x[0];
    const double s = std::clamp(xq / dx, 0.0, double(x.size() - 1));
    const std::size_t i = std::min(std::size_t(s), x.size() - 2);
    const double t = s - double(i);
    return u0 * std::exp(-((1.0 - t) * phi[i] + t * phi[i + 1]));
}

LimitOracle1D limit_oracle_1d(const std::function<double(double)>& E,
                              const std::function<double(double)>& F, double g0, double g1,
                              std::size_t resolution) {
    if (resolution < 64) throw PreconditionError("limit_oracle_1d: resolution must be >= 64");
    LimitOracle1D o;
    const std::size_t m = resolution;
    const double dx = 1.0 / double(m - 1);
    o.x.resize(m);
    o.phi.resize(m);
    std::vector<double> ev(m), fv(m);
    for (std::size_t i = 0; i < m; ++i) {
        o.x[i] = double(i) * dx;
        ev[i] = E(o.x[i]);
        fv[i] = F(o.x[i]);
    }
    o.phi[0] = 0.0;
    for (std::size_t i = 1; i < m; ++i) o.phi[i] = o.phi[i - 1] - 0.5 * dx * (ev[i] + ev[i - 1]);
    double intF = 0.0, intW = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        intF += 0.5 * dx * (fv[i] + fv[i - 1]);
        intW += 0.5 * dx * (std::exp(-o.phi[i]) + std::exp(-o.phi[i - 1]));
    }
    o.u0 = (intF + g1 - g0) / intW;
    return o;
}

// ---------------------------------------------------------------------------

namespace {

void check_3d(const AnisoProblem3D& p) {
    const auto& g = p.grid;
    const std::size_t N = g.size();
    const std::size_t cols = g.n[0] * g.n[1];
    if (p.b.size() != N || p.E.size() != N || p.F.size() != N)
        throw PreconditionError("aniso 3D: per-cell arrays do not match the grid");
    if (p.g_lo.size() != cols || p.g_hi.size() != cols)
        throw PreconditionError("aniso 3D: boundary data must have one entry per column");
    if (!(p.tau >= 0.0)) throw PreconditionError("aniso 3D: tau must be non-negative");
    if (g.periodic[2]) throw PreconditionError("aniso 3D: direction 3 must be bounded");
    for (std::size_t id = 0; id < N; ++id) {
        const auto& b = p.b[id];
        const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        if (std::abs(nb - 1.0) > 1e-12)
            throw PreconditionError("aniso 3D: b must be a unit vector");
        if (b[2] == 0.0) {
            const auto m = g.multi(id);
            throw PreconditionError("aniso 3D: b_3 = 0 at cell (" + std::to_string(m[0]) + ", " +
                                    std::to_string(m[1]) + ", " + std::to_string(m[2]) +
                                    "); field lines must cross the box in x3");
        }
    }
}

std::vector<Row> rows_3d(const AnisoProblem3D& p) {
    const auto& g = p.grid;
    std::vector<Row> rows;
    for (std::size_t id = 0; id < g.size(); ++id) {
        if (!g.is_interior(id)) continue;
        Row r;
        double bE = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double c = p.b[id][i] / (2.0 * g.h[i]);
            std::size_t up = 0, dn = 0;
            g.neighbor(id, i, +1, up);
            g.neighbor(id, i, -1, dn);
            r.gam.push_back({up, c});
            r.gam.push_back({dn, -c});
            r.der.push_back({up, c});
            r.der.push_back({dn, -c});
            bE += p.b[id][i] * p.E[id][i];
        }
        r.gam.push_back({id, -bE});
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<double> gamma_rhs_3d(const AnisoProblem3D& p) {
    const auto& g = p.grid;
    std::vector<double> r = p.F;
    const double c = 0.5 / g.h[2];
    const std::size_t n3 = g.n[2];
    for (std::size_t j = 0; j < g.n[1]; ++j)
        for (std::size_t i = 0; i < g.n[0]; ++i) {
            const std::size_t col = i + g.n[0] * j;
            r[g.index(i, j, n3 - 2)] += c * p.g_hi[col];
            r[g.index(i, j, n3 - 1)] += c * p.g_hi[col];
            r[g.index(i, j, 0)] -= c * p.g_lo[col];
            r[g.index(i, j, 1)] -= c * p.g_lo[col];
        }
    return r;
}

}  // namespace

bool in_KG(const Grid3D& g, std::size_t id) {
    const auto m = g.multi(id);
    if (m[2] < 2) return true;
    for (int i = 0; i < 2; ++i)
        if (!g.periodic[i] && (m[i] == 0 || m[i] + 1 == g.n[i])) return true;
    return false;
}

std::vector<double> extend_ge_3d(const AnisoProblem3D& prob, std::span<const double> v) {
    const auto& g = prob.grid;
    std::vector<double> p(g.size(), 0.0);
    for (std::size_t id = 0; id < g.size(); ++id)
        if (in_KG(g, id)) p[id] = v[id];
    // gamma_{K'} = 0 on layer k3 fixes p on layer k3 + 1.
    for (std::size_t k3 = 1; k3 + 1 < g.n[2]; ++k3)
        for (std::size_t j = 0; j < g.n[1]; ++j)
            for (std::size_t i = 0; i < g.n[0]; ++i) {
                const std::size_t id = g.index(i, j, k3);
                if (!g.is_interior(id)) continue;
                const auto& b = prob.b[id];
                double s = 0.0;
                for (int d = 0; d < 2; ++d) {
                    std::size_t up = 0, dn = 0;
                    g.neighbor(id, d, +1, up);
                    g.neighbor(id, d, -1, dn);
                    s += b[d] / (2.0 * g.h[d]) * (p[up] - p[dn]);
                }
                double bE = 0.0;
                for (int d = 0; d < 3; ++d) bE += b[d] * prob.E[id][d];
                s -= p[id] * bE;
                const std::size_t above = g.index(i, j, k3 + 1);
                const std::size_t below = g.index(i, j, k3 - 1);
                p[above] = p[below] - 2.0 * g.h[2] / b[2] * s;
            }
    return p;
}

double ge_residual_3d(const AnisoProblem3D& prob, std::span<const double> p) {
    const auto& g = prob.grid;
    double r = 0.0;
    for (std::size_t id = 0; id < g.size(); ++id) {
        if (!g.is_interior(id)) continue;
        double s = 0.0;
        for (int d = 0; d < 3; ++d) {
            std::size_t up = 0, dn = 0;
            g.neighbor(id, d, +1, up);
            g.neighbor(id, d, -1, dn);
            s += prob.b[id][d] * ((p[up] - p[dn]) / (2.0 * g.h[d]) - p[id] * prob.E[id][d]);
        }
        r = std::max(r, std::abs(s));
    }
    return r;
}

SparseSystem assemble_naive_3d(const AnisoProblem3D& prob) {
    check_3d(prob);
    const std::size_t N = prob.grid.size();
    SparseSystem sys(N);
    add_aE(sys, rows_3d(prob));
    for (std::size_t k = 0; k < N; ++k) sys.add(k, k, prob.tau);
    const auto r = gamma_rhs_3d(prob);
    for (std::size_t k = 0; k < N; ++k) sys.rhs()[k] = prob.tau * r[k];
    sys.finalize();
    return sys;
}

namespace {

// Unknown layout: K_G cells carry the free entries of p, K_A cells carry q.
// Both use the cell's own index as column, which keeps the system square.
struct MicroMacroLayout {
    std::vector<std::size_t> kg;
    std::vector<std::ptrdiff_t> q_col;
};

MicroMacroLayout layout_3d(const Grid3D& g) {
    MicroMacroLayout L;
    L.q_col.assign(g.size(), -1);
    for (std::size_t id = 0; id < g.size(); ++id) {
        if (in_KG(g, id))
            L.kg.push_back(id);
        else
            L.q_col[id] = std::ptrdiff_t(id);
    }
    return L;
}

}  // namespace

SparseSystem assemble_micromacro_3d(const AnisoProblem3D& prob) {
    check_3d(prob);
    const auto& g = prob.grid;
    const std::size_t N = g.size();
    const auto L = layout_3d(g);
    SparseSystem sys(N);
    std::vector<double> unit(N, 0.0);
    for (std::size_t id : L.kg) {
        unit[id] = 1.0;
        const auto P = extend_ge_3d(prob, unit);
        unit[id] = 0.0;
        for (std::size_t r = 0; r < N; ++r)
            if (P[r] != 0.0) sys.add(r, id, P[r]);
    }
    add_aE(sys, rows_3d(prob), 0, &L.q_col);
    for (std::size_t id = 0; id < N; ++id)
        if (L.q_col[id] >= 0) sys.add(id, id, prob.tau);
    sys.rhs() = gamma_rhs_3d(prob);
    sys.finalize();
    return sys;
}

NaiveSolution solve_naive_3d(const AnisoProblem3D& prob, bool estimate_condition) {
    if (!(prob.tau > 0.0))
        throw PreconditionError("solve_naive_3d: tau = 0 makes the naive system singular");
    const auto sys = assemble_naive_3d(prob);
    Factorization lu(sys);
    Eigen::Map<const Eigen::VectorXd> b(sys.rhs().data(), Eigen::Index(sys.dimension()));
    const Eigen::VectorXd x = lu.solve(b);
    NaiveSolution s;
    s.n.assign(x.data(), x.data() + x.size());
    if (estimate_condition) s.condition_estimate = condition_estimate(sys, lu);
    return s;
}

MicroMacroSolution solve_micromacro_3d(const AnisoProblem3D& prob, bool estimate_condition) {
    const auto sys = assemble_micromacro_3d(prob);
    Factorization lu(sys);
    Eigen::Map<const Eigen::VectorXd> b(sys.rhs().data(), Eigen::Index(sys.dimension()));
    const Eigen::VectorXd x = lu.solve(b);
    const auto& g = prob.grid;
    const std::size_t N = g.size();
    MicroMacroSolution s;
    std::vector<double> free(N, 0.0);
    s.q.assign(N, 0.0);
    for (std::size_t id = 0; id < N; ++id) {
        if (in_KG(g, id))
            free[id] = x(Eigen::Index(id));
        else
            s.q[id] = x(Eigen::Index(id));
    }
    s.p = extend_ge_3d(prob, free);
    s.n.resize(N);
    for (std::size_t id = 0; id < N; ++id) s.n[id] = s.p[id] + prob.tau * s.q[id];
    if (estimate_condition) s.condition_estimate = condition_estimate(sys, lu);
    return s;
}

}  // namespace apfv
