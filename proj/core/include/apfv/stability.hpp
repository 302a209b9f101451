/// @file stability.hpp
/// @brief Von Neumann analysis of the linearized viscous Euler-Poisson
///        semi-discretizations.
#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace apfv {

enum class Scheme { classical, ap };

const char* to_string(Scheme s);

struct StabilityQuery {
    Scheme scheme = Scheme::classical;
    double delta = 0.0;
    double lambda = 0.0;
    double h = 0.0;
    double c = 1.0;  // viscosity beta = c h
    double T = 1.0;
    std::size_t xi_samples = 512;
};

struct StabilityVerdict {
    double max_modulus = 0.0;
    double argmax_xi = 0.0;
    bool stable = false;
};

inline constexpr double kUnitTolerance = 1e-12;

using RootPair = std::pair<std::complex<double>, std::complex<double>>;

/// Roots of a q^2 + b q + c = 0 with a != 0, computed without cancellation.
RootPair quadratic_roots(double a, double b, double c);

/// q^2 - 2q(1 - beta xi^2 delta - delta^2/(2 lambda^2)) + (1 - beta xi^2 delta)^2
///     + T xi^2 delta^2 = 0. Requires lambda > 0.
RootPair char_roots_classical(double delta, double lambda, double xi, double beta, double T);

/// (1 + delta^2/lambda^2) q^2 - 2q(1 - beta xi^2 delta - T xi^2 delta^2 / 2)
///     + (1 - beta xi^2 delta)^2 = 0. lambda = 0 uses the rescaled form
/// lambda^2 / (lambda^2 + delta^2) -> 0, which gives the double root q = 0.
/// lambda = +infinity is accepted.
RootPair char_roots_ap(double delta, double lambda, double xi, double beta, double T);

/// Max |q| over xi_k = k pi / (h N), k = 1..N.
StabilityVerdict verdict(const StabilityQuery& q);

struct StabilityMapEntry {
    Scheme scheme;
    double delta;
    double lambda;
    double h;
    double c;
    double T;
    StabilityVerdict v;
};

/// Row-major over (lambda, delta): every delta for the first lambda, then the next.
std::vector<StabilityMapEntry> stability_map(Scheme scheme, const std::vector<double>& deltas,
                                             const std::vector<double>& lambdas, double h,
                                             double c, double T, std::size_t xi_samples = 512,
                                             unsigned threads = 1);

/// s = +/- i (T xi^2 + lambda^-2)
RootPair continuous_dispersion(double xi, double lambda, double T);

struct StabilityBoundary {
    double delta_star = 0.0;
    // True when delta_hi itself is stable, so delta_star is only a lower bound.
    bool saturated = false;
};

/// Largest stable delta in [delta_lo, delta_hi] found by geometric bisection,
/// assuming a single stable-to-unstable transition.
StabilityBoundary find_boundary(Scheme scheme, double lambda, double h, double c, double T,
                                double delta_lo, double delta_hi, std::size_t xi_samples = 512,
                                int iterations = 80);

/// Indices on an increasing delta ladder where a stable verdict follows an
/// unstable one. Empty when the verdicts are monotone.
std::vector<std::size_t> reentry_points(const std::vector<StabilityVerdict>& ladder);

/// C0 = 2c / (T + c^2 pi^2)
double viscous_bound(double c, double T);

}  // namespace apfv
