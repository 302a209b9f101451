#pragma once

#include <cmath>

namespace apfv {

/// Barotropic pressure law p(n) = T n^gamma. gamma = 1 is the isothermal law.
struct Pressure {
    double T = 1.0;
    double gamma = 1.0;

    double p(double n) const { return gamma == 1.0 ? T * n : T * std::pow(n, gamma); }
    double dp(double n) const {
        return gamma == 1.0 ? T : T * gamma * std::pow(n, gamma - 1.0);
    }
    double sound_speed(double n) const { return std::sqrt(dp(n)); }
    bool isothermal() const { return gamma == 1.0; }
};

}  // namespace apfv
