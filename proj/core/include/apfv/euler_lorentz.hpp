/// @file euler_lorentz.hpp
/// @brief 3D isentropic Euler-Lorentz steppers FDAP-1 and FDAP-2 with given
///        electromagnetic fields.
#pragma once

#include "apfv/closure.hpp"
#include "apfv/flux.hpp"
#include "apfv/grid.hpp"

#include <array>
#include <span>
#include <vector>

namespace apfv {

using Vec3 = std::array<double, 3>;

struct LorentzState {
    std::vector<double> n;
    std::vector<Vec3> q;
};

/// Cell-centred E and B at the new time level. |B| > 0 everywhere.
struct LorentzFields {
    std::vector<Vec3> E;
    std::vector<Vec3> B;
};

struct LorentzParams {
    double tau = 1.0;
    double delta = 1e-2;
    Pressure pressure{};
    // rusanov and rusanov_explicit both use mu = max |u| here: the pressure
    // flux is implicit, so no sound speed enters the explicit part.
    ViscosityChoice visc{};
    // FDAP-2 switches to the micro-macro density solve below this value of
    // the rescaled anisotropy parameter tau / (delta^2 T).
    double micromacro_threshold = 1e-2;
};

struct ParPerp {
    double par;
    Vec3 perp;
};

/// v = par b + perp with perp . b = 0. Requires |b| = 1 within 1e-12.
ParPerp par_perp_split(const Vec3& v, const Vec3& b);

/// delta|B| / (tau^2 + delta^2 |B|^2) (-tau Y_perp + delta |B| b x Y).
/// Solves (Id - tau/(delta|B|) b x) q = b x Y on the plane orthogonal to b.
Vec3 perp_update_closed_form(const Vec3& Y, const Vec3& b, double tau, double delta, double B_mag);

LorentzState step_fdap1(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                        const Grid3D& g);
LorentzState step_fdap2(const LorentzState& s, const LorentzFields& f, const LorentzParams& p,
                        const Grid3D& g);

/// max over K_int of |sum_i b_i ((2h_i)^-1 (p(n_{K+e_i}) - p(n_{K-e_i})) - n_K E_i)|
double drift_balance_residual(const LorentzState& s, const LorentzFields& f,
                              const Pressure& pressure, const Grid3D& g);

/// Explicit parts shared by both schemes, evaluated from the state at time m
/// and b at m+1.
struct LorentzExplicit {
    std::vector<double> delta_n;    // tilde Delta_n
    std::vector<Vec3> delta_q;      // Delta_{q_i}, convective part only
    std::vector<Vec3> b;            // unit field direction
    std::vector<double> B_mag;
};
LorentzExplicit lorentz_explicit_terms(const LorentzState& s, const LorentzFields& f,
                                       const LorentzParams& p, const Grid3D& g);

/// Wall divergence: sum_j h_j^-1 (W_{K+e_j/2} - W_{K-e_j/2}) with
/// W = (w_j|_K + w_j|_{K+e_j}) / 2 on interior faces and W = 0 on walls.
std::vector<double> wall_divergence(std::span<const Vec3> w, const Grid3D& g);

/// Density in the drift equilibrium: entries on the first two x3 layers (and
/// bounded transverse boundary columns) are taken from seed, the rest follows
/// from a zero parallel force balance. Isothermal closure only.
std::vector<double> drift_equilibrium_density(std::span<const double> seed, const LorentzFields& f,
                                              const Pressure& pressure, const Grid3D& g);

}  // namespace apfv
