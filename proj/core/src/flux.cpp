#include "apfv/flux.hpp"

#include "apfv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace apfv {

double rusanov_speed(double nL, double uL, double nR, double uR, const Pressure& p,
                     const ViscosityChoice& visc) {
    switch (visc.kind) {
        case ViscosityKind::rusanov:
            return std::max(std::abs(uL) + p.sound_speed(nL), std::abs(uR) + p.sound_speed(nR));
        case ViscosityKind::rusanov_explicit:
            return std::max(std::abs(uL), std::abs(uR));
        case ViscosityKind::constant:
            return visc.coefficient;
        case ViscosityKind::none:
            break;
    }
    return 0.0;
}

HydroFluxEP flux_ep_explicit(StateEP L, StateEP R, const Pressure& p, ViscosityChoice visc) {
    if (!(L.n > 0.0) || !(R.n > 0.0))
        throw PreconditionError("flux_ep_explicit: density must be positive");
    const double uL = L.q / L.n;
    const double uR = R.q / R.n;
    const double mu = rusanov_speed(L.n, uL, R.n, uR, p, visc);
    const double dn = visc.density_row ? mu * (L.n - R.n) : 0.0;
    HydroFluxEP f;
    f.f_n = 0.5 * (L.q + R.q + dn);
    f.f_u = 0.5 * (L.q * uL + p.p(L.n) + R.q * uR + p.p(R.n) + mu * (L.q - R.q));
    return f;
}

HydroFluxEM flux_em_explicit(StateEM L, StateEM R, const Pressure& p, ViscosityChoice visc) {
    if (!(L.n > 0.0) || !(R.n > 0.0))
        throw PreconditionError("flux_em_explicit: density must be positive");
    const double uL = L.qx / L.n;
    const double uR = R.qx / R.n;
    const double mu = rusanov_speed(L.n, uL, R.n, uR, p, visc);
    const double dn = visc.density_row ? mu * (L.n - R.n) : 0.0;
    HydroFluxEM f;
    f.f_n = 0.5 * (L.qx + R.qx + dn);
    f.f_ux = 0.5 * (L.qx * uL + p.p(L.n) + R.qx * uR + p.p(R.n) + mu * (L.qx - R.qx));
    f.f_uy = 0.5 * (L.qy * uL + R.qy * uR + mu * (L.qy - R.qy));
    return f;
}

double mass_flux_ap(double f_n_expl, double n_left, double n_right, double E_face_new,
                    double f_u_right_neighbor, double f_u_left_neighbor, double delta,
                    double h) {
    return f_n_expl - 0.5 * delta * (n_left + n_right) * E_face_new -
           0.5 * delta / h * (f_u_right_neighbor - f_u_left_neighbor);
}

double mass_flux_ap_em(double f_n_expl, double n_left, double n_right, double Ex_face_new,
                       double f_ux_right_neighbor, double f_ux_left_neighbor, double qy_left,
                       double qy_right, double Bz_face, double delta, double h) {
    return mass_flux_ap(f_n_expl, n_left, n_right, Ex_face_new, f_ux_right_neighbor,
                        f_ux_left_neighbor, delta, h) -
           0.5 * delta * (qy_left + qy_right) * Bz_face;
}

}  // namespace apfv
