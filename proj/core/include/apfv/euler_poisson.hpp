/// @file euler_poisson.hpp
/// @brief 1D Euler-Poisson steppers: classical explicit scheme and the
///        reformulated asymptotic-preserving scheme.
#pragma once

#include "apfv/closure.hpp"
#include "apfv/flux.hpp"
#include "apfv/grid.hpp"

#include <span>
#include <vector>

namespace apfv {

/// Cell arrays n, q, phi have grid.n_cells entries. E[k] is the field on the
/// face x_{k+1/2} (periodic grids only).
struct EpState {
    std::vector<double> n;
    std::vector<double> q;
    std::vector<double> phi;
    std::vector<double> E;
};

struct EpParams {
    double lambda = 1.0;
    double delta = 1e-3;
    Pressure pressure{};
    ViscosityChoice visc{};
};

/// Face fluxes f_n[k], f_u[k] at x_{k+1/2} from the explicit Rusanov flux.
struct EpFluxes {
    std::vector<double> f_n;
    std::vector<double> f_u;
};
EpFluxes ep_fluxes(const EpState& s, const EpParams& p, const Grid1D& g);

EpState step_classical(const EpState& s, const EpParams& p, const Grid1D& g);
EpState step_ap(const EpState& s, const EpParams& p, const Grid1D& g);

/// max_k | lambda^2 h^-1 (E_{k+1/2} - E_{k-1/2}) - (1 - n_k) |
double gauss_residual(const EpState& s, const EpParams& p, const Grid1D& g);

/// Builds (n, q = n u) and solves the discrete Poisson equation for phi, E.
/// With project_momentum the momentum is replaced by its orthogonal
/// projection onto the kernel of the centred divergence.
EpState init_well_prepared(std::span<const double> n_profile, std::span<const double> u_profile,
                           const EpParams& p, const Grid1D& g, bool project_momentum = false);

/// Orthogonal projection of q onto ker(D), (Dq)_k = (q_{k+1} - q_{k-1}) / 2h.
std::vector<double> project_centered_divergence_free(std::span<const double> q);

/// E_{k+1/2} = -(phi_{k+1} - phi_k) / h on a periodic grid.
std::vector<double> field_from_potential(std::span<const double> phi, double h);

/// delta = cfl * h / max_k(|u_k| + c(n_k)).
double hydro_time_step(std::span<const double> n, std::span<const double> q,
                       const Pressure& pressure, double h, double cfl = 0.45);

double total(std::span<const double> v, double h);

}  // namespace apfv
