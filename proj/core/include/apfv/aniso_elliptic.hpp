/// @file aniso_elliptic.hpp
/// @brief Strongly anisotropic elliptic problems
///          a_E(n, v) + tau (n, v) = tau <Gamma, v>
///        solved either directly (naive) or through the micro-macro splitting
///        n = p + tau q with p in G_E and q in A.
#pragma once

#include "apfv/grid.hpp"
#include "apfv/linsolve.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace apfv {

/// Cells k = 0..N-1 with spacing h. gamma_k = (n_{k+1} - n_{k-1})/(2h) - n_k E_k on
/// interior cells; g_lo, g_hi are the Neumann data at the two ends.
struct AnisoProblem1D {
    double h = 0.0;
    double tau = 0.0;
    std::vector<double> E;
    std::vector<double> F;
    double g_lo = 0.0;
    double g_hi = 0.0;

    std::size_t size() const noexcept { return E.size(); }
};

/// Symmetric index range [-M, M], i.e. 2M + 1 cells. Requires M >= 3.
AnisoProblem1D make_aniso_problem_1d(std::size_t M, double h, double tau, std::vector<double> E,
                                     std::vector<double> F, double g_lo = 0.0, double g_hi = 0.0);

struct NaiveSolution {
    std::vector<double> n;
    double condition_estimate = 0.0;
};

struct MicroMacroSolution {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> n;
    double condition_estimate = 0.0;
};

/// (A + tau I) n = tau Gamma. Rejects tau <= 0.
NaiveSolution solve_naive_1d(const AnisoProblem1D& prob, bool estimate_condition = true);
MicroMacroSolution solve_micromacro_1d(const AnisoProblem1D& prob, bool estimate_condition = true);

/// Assembled systems, exposed for conditioning studies and cross-checks.
SparseSystem assemble_naive_1d(const AnisoProblem1D& prob);
SparseSystem assemble_micromacro_1d(const AnisoProblem1D& prob);

/// a_E(u, v) for the 1D operator.
double a_E_1d(std::span<const double> u, std::span<const double> v, std::span<const double> E,
              double h);

struct Decomposition {
    std::vector<double> p;
    std::vector<double> q;
};

/// v = p + q with p in G_E sharing the first two entries of v, and q in A.
Decomposition decompose_1d(std::span<const double> v, std::span<const double> E, double h);

/// max over interior k of |(p_{k+1} - p_{k-1})/(2h) - p_k E_k|
double ge_residual_1d(std::span<const double> p, std::span<const double> E, double h);

/// Quadrature solution of the tau -> 0 limit on [0, 1]:
///   phi(x) = -int_0^x E,  u0 = (int F + g1 - g0) / int exp(-phi),  n0 = u0 exp(-phi).
struct LimitOracle1D {
    double u0 = 0.0;
    std::vector<double> x;
    std::vector<double> phi;

    /// Linear interpolation of u0 exp(-phi) at x in [0, 1].
    double n0(double xq) const;
};

LimitOracle1D limit_oracle_1d(const std::function<double(double)>& E,
                              const std::function<double(double)>& F, double g0, double g1,
                              std::size_t resolution);

// ---------------------------------------------------------------------------

/// Box problem. Direction 3 carries the field-line crossing (b_3 != 0). g_lo
/// and g_hi are Neumann data per (i, j) column at the two x3 ends.
struct AnisoProblem3D {
    Grid3D grid;
    double tau = 0.0;
    std::vector<std::array<double, 3>> b;
    std::vector<std::array<double, 3>> E;
    std::vector<double> F;
    std::vector<double> g_lo;
    std::vector<double> g_hi;
};

/// Column index of a cell (i + n0 j).
inline std::size_t column_of(const Grid3D& g, std::size_t id) { return id % (g.n[0] * g.n[1]); }

/// K_G membership: bounded-transverse boundary columns and the first two x3 layers.
bool in_KG(const Grid3D& g, std::size_t id);

SparseSystem assemble_naive_3d(const AnisoProblem3D& prob);
SparseSystem assemble_micromacro_3d(const AnisoProblem3D& prob);

NaiveSolution solve_naive_3d(const AnisoProblem3D& prob, bool estimate_condition = true);
MicroMacroSolution solve_micromacro_3d(const AnisoProblem3D& prob, bool estimate_condition = true);

/// Extends the K_G entries of v to the unique element of G_E, layer by layer in x3.
std::vector<double> extend_ge_3d(const AnisoProblem3D& prob, std::span<const double> v);

/// max over K_int of |sum_i b_i((2h_i)^-1 (p_{K+e_i} - p_{K-e_i}) - p_K E_i)|
double ge_residual_3d(const AnisoProblem3D& prob, std::span<const double> p);

}  // namespace apfv
