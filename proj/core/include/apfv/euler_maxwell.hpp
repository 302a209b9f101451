/// @file euler_maxwell.hpp
/// @brief 1D Euler-Maxwell steppers with components (n, q_x, q_y, E_x, E_y, B_z).
#pragma once

#include "apfv/closure.hpp"
#include "apfv/flux.hpp"
#include "apfv/grid.hpp"

#include <span>
#include <vector>

namespace apfv {

/// n, qx, qy, Ey live on cells; Ex[k] and Bz[k] on the face x_{k+1/2}.
struct EmState {
    std::vector<double> n;
    std::vector<double> qx;
    std::vector<double> qy;
    std::vector<double> Ex;
    std::vector<double> Ey;
    std::vector<double> Bz;
};

struct EmParams {
    double lambda = 1.0;
    double delta = 1e-3;
    Pressure pressure{};
    ViscosityChoice visc{};
};

struct EmFluxes {
    std::vector<double> f_n;
    std::vector<double> f_ux;
    std::vector<double> f_uy;
};
EmFluxes em_fluxes(const EmState& s, const EmParams& p, const Grid1D& g);

/// Classical scheme: explicit Faraday with E_y^m, Ampere-y with B_z^{m+1}.
EmState step_classical_em(const EmState& s, const EmParams& p, const Grid1D& g);
EmState step_ap_em(const EmState& s, const EmParams& p, const Grid1D& g);

/// max_k | lambda^2 h^-1 (Ex_{k+1/2} - Ex_{k-1/2}) - (1 - n_k) |
double gauss_residual_em(const EmState& s, const EmParams& p, const Grid1D& g);

/// max_k | u_y,k - h^-1 (Bz_{k+1/2} - Bz_{k-1/2}) |
double curl_b_residual(const EmState& s, const Grid1D& g);

/// Gauss-consistent E_x. With magnetic_from_current, B_z = B0 + h-cumulative
/// sum of u_y so that the discrete curl of B equals u_y (requires mean u_y = 0).
/// Otherwise B_z = B0 everywhere. E_y = 0.
EmState init_well_prepared_em(std::span<const double> n_profile, std::span<const double> ux,
                              std::span<const double> uy, double B0, const EmParams& p,
                              const Grid1D& g, bool magnetic_from_current = false);

/// E_x solving the discrete Gauss law with zero mean.
std::vector<double> gauss_field(std::span<const double> n, double lambda, double h);

}  // namespace apfv
