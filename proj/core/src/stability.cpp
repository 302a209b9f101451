#include "apfv/stability.hpp"

#include "apfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace apfv {

const char* to_string(Scheme s) { return s == Scheme::classical ? "classical" : "ap"; }

RootPair quadratic_roots(double a, double b, double c) {
    if (a == 0.0) throw PreconditionError("quadratic_roots: leading coefficient is zero");
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double t = -0.5 * (b + std::copysign(s, b));
        if (t == 0.0) return {0.0, 0.0};
        return {t / a, c / t};
    }
    const double re = -b / (2.0 * a);
    const double im = std::sqrt(-disc) / (2.0 * a);
    return {{re, im}, {re, -im}};
}

RootPair char_roots_classical(double delta, double lambda, double xi, double beta, double T) {
    if (!(lambda > 0.0)) throw PreconditionError("char_roots_classical: lambda must be positive");
    const double v = 1.0 - beta * xi * xi * delta;
    const double r = delta / lambda;
    const double b = -2.0 * (v - 0.5 * r * r);
    const double c = v * v + T * xi * xi * delta * delta;
    return quadratic_roots(1.0, b, c);
}

RootPair char_roots_ap(double delta, double lambda, double xi, double beta, double T) {
    if (!(lambda >= 0.0)) throw PreconditionError("char_roots_ap: lambda must be non-negative");
    const double v = 1.0 - beta * xi * xi * delta;
    const double b = -2.0 * (v - 0.5 * T * xi * xi * delta * delta);
    const double c = v * v;
    if (std::isinf(lambda)) return quadratic_roots(1.0, b, c);
    // Divide through by (1 + delta^2/lambda^2) = (lambda^2 + delta^2)/lambda^2.
    const double w = lambda * lambda / (lambda * lambda + delta * delta);
    if (w == 0.0) return {0.0, 0.0};
    return quadratic_roots(1.0, w * b, w * c);
}

StabilityVerdict verdict(const StabilityQuery& q) {
    if (q.xi_samples < 64) throw PreconditionError("verdict: xi_samples must be at least 64");
    if (!(q.delta > 0.0) || !(q.h > 0.0) || !(q.T > 0.0) || !(q.c >= 0.0))
        throw PreconditionError("verdict: delta, h, T must be positive and c non-negative");
    const double beta = q.c * q.h;
    const double xmax = std::numbers::pi / q.h;
    StabilityVerdict v;
    for (std::size_t k = 1; k <= q.xi_samples; ++k) {
        const double xi = xmax * double(k) / double(q.xi_samples);
        const auto r = q.scheme == Scheme::classical
                           ? char_roots_classical(q.delta, q.lambda, xi, beta, q.T)
                           : char_roots_ap(q.delta, q.lambda, xi, beta, q.T);
        const double m = std::max(std::abs(r.first), std::abs(r.second));
        if (m > v.max_modulus || k == 1) {
            v.max_modulus = m;
            v.argmax_xi = xi;
        }
    }
    v.stable = v.max_modulus <= 1.0 + kUnitTolerance;
    return v;
}

std::vector<StabilityMapEntry> stability_map(Scheme scheme, const std::vector<double>& deltas,
                                             const std::vector<double>& lambdas, double h,
                                             double c, double T, std::size_t xi_samples,
                                             unsigned threads) {
    if (deltas.empty() || lambdas.empty())
        throw PreconditionError("stability_map: delta and lambda grids must be nonempty");
    std::vector<StabilityMapEntry> out(deltas.size() * lambdas.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double l = lambdas[i / deltas.size()];
            const double d = deltas[i % deltas.size()];
            out[i] = {scheme, d, l, h, c, T, verdict({scheme, d, l, h, c, T, xi_samples})};
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(out.size())));
    if (threads == 1) {
        work(0, out.size());
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (out.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(out.size(), b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
    }
    return out;
}

RootPair continuous_dispersion(double xi, double lambda, double T) {
    if (!(lambda > 0.0)) throw PreconditionError("continuous_dispersion: lambda must be positive");
    const double w = T * xi * xi + 1.0 / (lambda * lambda);
    return {{0.0, w}, {0.0, -w}};
}

StabilityBoundary find_boundary(Scheme scheme, double lambda, double h, double c, double T,
                                double delta_lo, double delta_hi, std::size_t xi_samples,
                                int iterations) {
    if (!(delta_lo > 0.0) || !(delta_hi > delta_lo))
        throw PreconditionError("find_boundary: need 0 < delta_lo < delta_hi");
    auto stable = [&](double d) {
        return verdict({scheme, d, lambda, h, c, T, xi_samples}).stable;
    };
    if (stable(delta_hi)) return {delta_hi, true};
    if (!stable(delta_lo)) return {0.0, false};
    double lo = delta_lo, hi = delta_hi;
    for (int i = 0; i < iterations && hi / lo > 1.0 + 1e-12; ++i) {
        const double mid = std::sqrt(lo * hi);
        (stable(mid) ? lo : hi) = mid;
    }
    return {lo, false};
}

std::vector<std::size_t> reentry_points(const std::vector<StabilityVerdict>& ladder) {
    std::vector<std::size_t> out;
    bool seen_unstable = false;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!ladder[i].stable)
            seen_unstable = true;
        else if (seen_unstable)
            out.push_back(i);
    }
    return out;
}

double viscous_bound(double c, double T) {
    return 2.0 * c / (T + c * c * std::numbers::pi * std::numbers::pi);
}

}  // namespace apfv
