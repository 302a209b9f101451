/// @file flux.hpp
/// @brief Rusanov-type interface fluxes and the AP-modified mass fluxes.
#pragma once

#include "apfv/closure.hpp"

namespace apfv {

enum class ViscosityKind {
    rusanov,           // mu = max(|u| + c) over both sides
    rusanov_explicit,  // mu = max(|u|) over both sides (explicit subsystem only)
    constant,          // mu = coefficient
    none
};

struct ViscosityChoice {
    ViscosityKind kind = ViscosityKind::rusanov;
    // When false the density row of the viscosity vector is zeroed.
    bool density_row = true;
    double coefficient = 0.0;
};

struct HydroFluxEP {
    double f_n = 0.0;
    double f_u = 0.0;
};

struct HydroFluxEM {
    double f_n = 0.0;
    double f_ux = 0.0;
    double f_uy = 0.0;
};

struct StateEP {
    double n;
    double q;
};

struct StateEM {
    double n;
    double qx;
    double qy;
};

/// Scalar viscosity coefficient for a 1D interface.
double rusanov_speed(double nL, double uL, double nR, double uR, const Pressure& p,
                     const ViscosityChoice& visc);

/// f = 1/2 [F(U_L) + F(U_R) + mu (U_L - U_R)], F(n, q) = (q, q^2/n + p(n)).
HydroFluxEP flux_ep_explicit(StateEP left, StateEP right, const Pressure& p,
                             ViscosityChoice visc = {});

/// Same for (n, q_x, q_y) with third flux component q_x q_y / n.
HydroFluxEM flux_em_explicit(StateEM left, StateEM right, const Pressure& p,
                             ViscosityChoice visc = {});

/// f_n^m - (delta/2)(n_k + n_{k+1}) E^{m+1}_{k+1/2}
///       - (delta/(2h)) (f_u|_{k+3/2} - f_u|_{k-1/2})
double mass_flux_ap(double f_n_expl, double n_left, double n_right, double E_face_new,
                    double f_u_right_neighbor, double f_u_left_neighbor, double delta,
                    double h);

/// mass_flux_ap plus the magnetic term -(delta/2)(q_y,k + q_y,k+1) B_z|_{k+1/2}.
double mass_flux_ap_em(double f_n_expl, double n_left, double n_right, double Ex_face_new,
                       double f_ux_right_neighbor, double f_ux_left_neighbor, double qy_left,
                       double qy_right, double Bz_face, double delta, double h);

}  // namespace apfv
