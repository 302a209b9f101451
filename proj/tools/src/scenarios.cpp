#include "scenarios.hpp"

#include "apfv/aniso_elliptic.hpp"
#include "apfv/errors.hpp"
#include "apfv/euler_lorentz.hpp"
#include "apfv/euler_maxwell.hpp"
#include "apfv/euler_poisson.hpp"
#include "apfv/stability.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

namespace apfv::cli {

namespace {

using nlohmann::json;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Shortest decimal that reads back to the same double.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

class Csv {
public:
    Csv(const std::filesystem::path& path, std::initializer_list<const char*> header) : f_(path) {
        if (!f_) throw std::runtime_error("cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            f_ << (first ? "" : ",") << h;
            first = false;
        }
        f_ << '\n';
    }
    template <class... T>
    void row(const T&... cells) {
        bool first = true;
        ((f_ << (first ? "" : ",") << cell(cells), first = false), ...);
        f_ << '\n';
    }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    std::ofstream f_;
};

std::filesystem::path out_path(const Config& cfg, const RunOptions& opt, const std::string& suffix) {
    std::filesystem::create_directories(opt.out_dir);
    const std::string prefix = cfg.text("output", "prefix", cfg.text("scenario", "name", "scenario"));
    return std::filesystem::path(opt.out_dir) / (prefix + suffix);
}

void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream f(p);
    f << j.dump(2) << '\n';
}

ViscosityChoice viscosity(const Config& cfg) {
    ViscosityChoice v;
    const std::string kind = cfg.text("params", "viscosity", "rusanov");
    if (kind == "rusanov_explicit") v.kind = ViscosityKind::rusanov_explicit;
    else if (kind == "constant") v.kind = ViscosityKind::constant;
    else if (kind == "none") v.kind = ViscosityKind::none;
    v.coefficient = cfg.real("params", "viscosity_coefficient", 0.0);
    v.density_row = cfg.boolean("params", "density_viscosity", true);
    return v;
}

Pressure pressure(const Config& cfg) {
    return {cfg.real("params", "T", 1.0), cfg.real("params", "gamma", 1.0)};
}

long seed_of(const Config& cfg, const RunOptions& opt) {
    return opt.seed ? *opt.seed : cfg.integer("scenario", "seed", 1);
}

// Initial density and velocity on N points of a unit-normalised period.
struct Profile1D {
    std::vector<double> n, u, v;
};

Profile1D profile_1d(const Config& cfg, const RunOptions& opt, std::size_t N) {
    const std::string kind = cfg.text("initial", "profile", "rest");
    const double a = cfg.real("initial", "amplitude", 0.0);
    const double k = double(cfg.integer("initial", "wavenumber", 1));
    const double u0 = cfg.real("initial", "velocity", 0.0);
    const double ua = cfg.real("initial", "velocity_amplitude", 0.0);
    const double va = cfg.real("initial", "transverse_velocity", 0.0);
    Profile1D p{std::vector<double>(N, 1.0), std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    if (kind == "rest") return p;
    std::mt19937_64 rng(std::uint64_t(seed_of(cfg, opt)));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = double(i) / double(N);
        if (kind == "sine") {
            p.n[i] = 1.0 + a * std::sin(kTwoPi * k * x);
            p.u[i] = u0 + ua * std::cos(kTwoPi * k * x);
            p.v[i] = va * std::sin(kTwoPi * k * x + 0.5);
        } else {
            p.n[i] = 1.0 + a * U(rng);
            p.u[i] = u0 + ua * U(rng);
            p.v[i] = va * U(rng);
        }
    }
    // A periodic Gauss law needs a neutral mean.
    double mean = 0.0;
    for (double n : p.n) mean += n;
    mean /= double(N);
    for (double& n : p.n) {
        n += 1.0 - mean;
        if (!(n > 0.0)) throw PreconditionError("[initial] amplitude makes the density non-positive");
    }
    return p;
}

double max_dev(const std::vector<double>& n) {
    double m = 0.0;
    for (double x : n) m = std::max(m, std::abs(x - 1.0));
    return m;
}

template <class V>
void require_finite(const V& v, long step) {
    for (double x : v)
        if (!std::isfinite(x)) throw SolverError("non-finite state at step " + std::to_string(step));
}

// Threshold bookkeeping for the summary.
class Invariants {
public:
    Invariants(const Config& cfg) : cfg_(cfg) {}

    void declare(const std::string& key, std::optional<double> def) {
        const double lim = cfg_.has("invariants", key) ? cfg_.real("invariants", key, 0.0) : def.value_or(NAN);
        if (!std::isnan(lim)) limits_[key] = {lim, 0.0};
    }
    void observe(const std::string& key, double v) {
        if (auto it = limits_.find(key); it != limits_.end())
            it->second.worst = std::max(it->second.worst, std::isnan(v) ? INFINITY : v);
    }
    bool ok() const {
        return std::all_of(limits_.begin(), limits_.end(), [](const auto& kv) { return kv.second.worst <= kv.second.limit; });
    }
    json report() const {
        json j = json::object();
        for (const auto& [k, v] : limits_)
            j[k] = {{"limit", v.limit}, {"observed", v.worst}, {"pass", v.worst <= v.limit}};
        return j;
    }

private:
    struct Limit {
        double limit, worst;
    };
    const Config& cfg_;
    std::map<std::string, Limit> limits_;
};

json summary_head(const Config& cfg, long steps, double time) {
    return {{"kind", cfg.kind()}, {"name", cfg.text("scenario", "name", "")}, {"steps", steps}, {"final_time", time}};
}

int finish(const Config& cfg, const RunOptions& opt, json summary, const Invariants& inv) {
    summary["invariants"] = inv.report();
    summary["pass"] = inv.ok();
    write_json(out_path(cfg, opt, "_summary.json"), summary);
    return inv.ok() ? kOk : kInvariantFailure;
}

// ---------------------------------------------------------------------------

int run_euler_poisson(const Config& cfg, const RunOptions& opt) {
    const auto N = std::size_t(cfg.integer("grid", "cells", 128));
    const double L = cfg.real("grid", "length", 1.0);
    const auto g = make_grid1d(N, L / double(N), Boundary::periodic);
    EpParams p;
    p.lambda = cfg.real("params", "lambda", 1.0);
    p.pressure = pressure(cfg);
    p.visc = viscosity(cfg);
    const bool classical = cfg.text("params", "scheme", "ap") == "classical";
    const bool fixed_dt = cfg.has("params", "delta");
    const double cfl = cfg.real("params", "cfl", 0.45);
    const long steps = cfg.integer("scenario", "steps", 100);

    const auto prof = profile_1d(cfg, opt, N);
    auto s = init_well_prepared(prof.n, prof.u, p, g, cfg.boolean("initial", "well_prepared", false));

    Invariants inv(cfg);
    inv.declare("gauss_residual_max", 1e-11);
    inv.declare("mass_drift_max", 1e-12);
    inv.declare("max_density_deviation", std::nullopt);

    Csv csv(out_path(cfg, opt, "_steps.csv"), {"step", "time", "mass", "momentum", "gauss_residual", "max_dev_n"});
    const double m0 = total(s.n, g.h);
    double t = 0.0;
    for (long m = 0;; ++m) {
        const double mass = total(s.n, g.h), res = gauss_residual(s, p, g), dev = max_dev(s.n);
        csv.row(m, t, mass, total(s.q, g.h), res, dev);
        inv.observe("gauss_residual_max", res);
        inv.observe("mass_drift_max", std::abs(mass - m0) / std::abs(m0));
        inv.observe("max_density_deviation", dev);
        if (m == steps) break;
        p.delta = fixed_dt ? cfg.real("params", "delta", 0.0) : hydro_time_step(s.n, s.q, p.pressure, g.h, cfl);
        s = classical ? step_classical(s, p, g) : step_ap(s, p, g);
        require_finite(s.n, m + 1);
        require_finite(s.q, m + 1);
        t += p.delta;
    }
    if (cfg.boolean("output", "final_state", true)) {
        Csv fin(out_path(cfg, opt, "_final.csv"), {"k", "x", "n", "q", "phi", "E"});
        for (std::size_t k = 0; k < N; ++k) fin.row(k, g.x_center(k), s.n[k], s.q[k], s.phi[k], s.E[k]);
    }
    auto sum = summary_head(cfg, steps, t);
    sum["scheme"] = classical ? "classical" : "ap";
    sum["lambda"] = p.lambda;
    return finish(cfg, opt, sum, inv);
}

int run_euler_maxwell(const Config& cfg, const RunOptions& opt) {
    const auto N = std::size_t(cfg.integer("grid", "cells", 128));
    const double L = cfg.real("grid", "length", 1.0);
    const auto g = make_grid1d(N, L / double(N), Boundary::periodic);
    EmParams p;
    p.lambda = cfg.real("params", "lambda", 1.0);
    p.pressure = pressure(cfg);
    p.visc = viscosity(cfg);
    const bool classical = cfg.text("params", "scheme", "ap") == "classical";
    const bool fixed_dt = cfg.has("params", "delta");
    const double cfl = cfg.real("params", "cfl", 0.45);
    const long steps = cfg.integer("scenario", "steps", 100);

    const auto prof = profile_1d(cfg, opt, N);
    auto s = init_well_prepared_em(prof.n, prof.u, prof.v, cfg.real("initial", "B0", 0.0), p, g,
                                   cfg.boolean("initial", "well_prepared", false));

    Invariants inv(cfg);
    inv.declare("gauss_residual_max", 1e-11);
    inv.declare("mass_drift_max", 1e-12);
    inv.declare("max_density_deviation", std::nullopt);

    Csv csv(out_path(cfg, opt, "_steps.csv"),
            {"step", "time", "mass", "momentum_x", "momentum_y", "gauss_residual", "max_dev_n"});
    const double m0 = total(s.n, g.h);
    double t = 0.0;
    for (long m = 0;; ++m) {
        const double mass = total(s.n, g.h), res = gauss_residual_em(s, p, g), dev = max_dev(s.n);
        csv.row(m, t, mass, total(s.qx, g.h), total(s.qy, g.h), res, dev);
        inv.observe("gauss_residual_max", res);
        inv.observe("mass_drift_max", std::abs(mass - m0) / std::abs(m0));
        inv.observe("max_density_deviation", dev);
        if (m == steps) break;
        double dt = fixed_dt ? cfg.real("params", "delta", 0.0) : hydro_time_step(s.n, s.qx, p.pressure, g.h, cfl);
        // The classical scheme also carries light waves at speed 1/lambda.
        if (classical && !fixed_dt) dt = std::min(dt, cfl * p.lambda * g.h);
        p.delta = dt;
        s = classical ? step_classical_em(s, p, g) : step_ap_em(s, p, g);
        require_finite(s.n, m + 1);
        require_finite(s.qx, m + 1);
        t += dt;
    }
    if (cfg.boolean("output", "final_state", true)) {
        Csv fin(out_path(cfg, opt, "_final.csv"), {"k", "x", "n", "qx", "qy", "Ex", "Ey", "Bz"});
        for (std::size_t k = 0; k < N; ++k)
            fin.row(k, g.x_center(k), s.n[k], s.qx[k], s.qy[k], s.Ex[k], s.Ey[k], s.Bz[k]);
    }
    auto sum = summary_head(cfg, steps, t);
    sum["scheme"] = classical ? "classical" : "ap";
    sum["lambda"] = p.lambda;
    sum["curl_b_residual"] = curl_b_residual(s, g);
    return finish(cfg, opt, sum, inv);
}

int run_euler_lorentz(const Config& cfg, const RunOptions& opt) {
    const double L = cfg.real("grid", "length", 1.0);
    const std::size_t c = std::size_t(cfg.integer("grid", "cells", 8));
    const std::array<std::size_t, 3> n{std::size_t(cfg.integer("grid", "cells_x", long(c))),
                                       std::size_t(cfg.integer("grid", "cells_y", long(c))),
                                       std::size_t(cfg.integer("grid", "cells_z", long(c)))};
    const auto g = make_grid3d(n, {L / double(n[0]), L / double(n[1]), L / double(n[2])},
                               cfg.boolean("grid", "periodic_transverse", true));
    LorentzParams p;
    p.tau = cfg.real("params", "tau", 1e-6);
    p.delta = cfg.real("params", "delta", 1e-2);
    p.pressure = pressure(cfg);
    p.visc = viscosity(cfg);
    p.micromacro_threshold = cfg.real("params", "micromacro_threshold", p.micromacro_threshold);
    const bool fdap1 = cfg.text("params", "scheme", "fdap2") == "fdap1";
    const long steps = cfg.integer("scenario", "steps", 10);

    const auto Bv = cfg.vec3("fields", "B", {0.5, -0.3, 1.2});
    const double ea = cfg.real("fields", "E_amplitude", 0.0);
    LorentzFields f;
    f.B.assign(g.size(), Vec3{Bv[0], Bv[1], Bv[2]});
    f.E.resize(g.size());
    const auto prof_kind = cfg.text("initial", "profile", "rest");
    const double a = cfg.real("initial", "amplitude", 0.0);
    const double k = double(cfg.integer("initial", "wavenumber", 1));
    std::mt19937_64 rng(std::uint64_t(seed_of(cfg, opt)));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    LorentzState s;
    s.n.resize(g.size());
    s.q.assign(g.size(), Vec3{0.0, 0.0, 0.0});
    const double u_par = cfg.real("initial", "velocity", 0.0);
    const double bnorm = std::hypot(Bv[0], Bv[1], Bv[2]);
    for (std::size_t id = 0; id < g.size(); ++id) {
        const auto mi = g.multi(id);
        const double x = (double(mi[0]) + 0.5) / double(n[0]), y = (double(mi[1]) + 0.5) / double(n[1]),
                     z = (double(mi[2]) + 0.5) / double(n[2]);
        f.E[id] = {ea * std::sin(kTwoPi * z), 0.5 * ea * std::cos(kTwoPi * x), ea * std::cos(kTwoPi * (x + y))};
        s.n[id] = prof_kind == "sine"     ? 1.0 + a * std::sin(kTwoPi * k * (x + 0.5 * z)) * std::cos(kTwoPi * y)
                  : prof_kind == "random" ? 1.0 + a * U(rng)
                                          : 1.0;
        if (!(s.n[id] > 0.0)) throw PreconditionError("[initial] amplitude makes the density non-positive");
    }
    if (cfg.boolean("initial", "well_prepared", false)) s.n = drift_equilibrium_density(s.n, f, p.pressure, g);
    for (std::size_t id = 0; id < g.size(); ++id)
        for (int i = 0; i < 3; ++i) s.q[id][i] = s.n[id] * u_par * Bv[i] / bnorm;

    Invariants inv(cfg);
    inv.declare("mass_drift_max", 1e-12);
    inv.declare("drift_residual_max", std::nullopt);
    inv.declare("max_density_deviation", std::nullopt);

    const double vol = g.h[0] * g.h[1] * g.h[2];
    auto mass_of = [&](const LorentzState& st) {
        double m = 0.0;
        for (double x : st.n) m += x;
        return m * vol;
    };
    Csv csv(out_path(cfg, opt, "_steps.csv"),
            {"step", "time", "mass", "momentum_x", "momentum_y", "momentum_z", "drift_balance_residual", "max_dev_n"});
    const double m0 = mass_of(s);
    double t = 0.0;
    for (long m = 0;; ++m) {
        Vec3 mom{0.0, 0.0, 0.0};
        for (const auto& q : s.q)
            for (int i = 0; i < 3; ++i) mom[i] += q[i] * vol;
        const double mass = mass_of(s), res = drift_balance_residual(s, f, p.pressure, g), dev = max_dev(s.n);
        csv.row(m, t, mass, mom[0], mom[1], mom[2], res, dev);
        inv.observe("mass_drift_max", std::abs(mass - m0) / std::abs(m0));
        inv.observe("drift_residual_max", res);
        inv.observe("max_density_deviation", dev);
        if (m == steps) break;
        s = fdap1 ? step_fdap1(s, f, p, g) : step_fdap2(s, f, p, g);
        require_finite(s.n, m + 1);
        t += p.delta;
    }
    if (cfg.boolean("output", "final_state", true)) {
        Csv fin(out_path(cfg, opt, "_final.csv"), {"i", "j", "k", "n", "q1", "q2", "q3"});
        for (std::size_t id = 0; id < g.size(); ++id) {
            const auto mi = g.multi(id);
            fin.row(mi[0], mi[1], mi[2], s.n[id], s.q[id][0], s.q[id][1], s.q[id][2]);
        }
    }
    auto sum = summary_head(cfg, steps, t);
    sum["scheme"] = fdap1 ? "fdap1" : "fdap2";
    sum["tau"] = p.tau;
    return finish(cfg, opt, sum, inv);
}

std::vector<double> log_ladder(double lo, double hi, long count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        v[std::size_t(i)] = count == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(count - 1));
    return v;
}

}  // namespace

int run_stability_map(const Config& cfg, const RunOptions& opt) {
    const std::string which = cfg.text("stability", "scheme", "both");
    const double h = cfg.real("stability", "h", 0.01), c = cfg.real("stability", "c", 1.0),
                 T = cfg.real("stability", "T", 1.0);
    const auto deltas = log_ladder(cfg.real("stability", "delta_min", 1e-8), cfg.real("stability", "delta_max", 1.0),
                                   cfg.integer("stability", "delta_count", 33));
    const auto lambdas = log_ladder(cfg.real("stability", "lambda_min", 1e-8), cfg.real("stability", "lambda_max", 1.0),
                                    cfg.integer("stability", "lambda_count", 5));
    const auto xi = std::size_t(cfg.integer("stability", "xi_samples", 512));

    Csv csv(out_path(cfg, opt, "_stability.csv"), {"scheme", "delta", "lambda", "h", "c", "T", "max_modulus", "stable"});
    json boundaries = json::array();
    for (Scheme sc : {Scheme::classical, Scheme::ap}) {
        if (which != "both" && which != to_string(sc)) continue;
        for (const auto& e : stability_map(sc, deltas, lambdas, h, c, T, xi, opt.threads))
            csv.row(to_string(e.scheme), e.delta, e.lambda, e.h, e.c, e.T, e.v.max_modulus, e.v.stable);
        for (double lam : lambdas) {
            const auto b = find_boundary(sc, lam, h, c, T, deltas.front(), deltas.back(), xi);
            boundaries.push_back({{"scheme", to_string(sc)}, {"lambda", lam}, {"delta_star", b.delta_star},
                                  {"saturated", b.saturated}});
        }
    }
    json sum = {{"kind", "stability-map"}, {"name", cfg.text("scenario", "name", "")}, {"boundaries", boundaries},
                {"pass", true}};
    write_json(out_path(cfg, opt, "_summary.json"), sum);
    return kOk;
}

int run_aniso_sweep(const Config& cfg, const RunOptions& opt) {
    const auto M = std::size_t(cfg.integer("aniso", "M", 32));
    const std::size_t N = 2 * M + 1;
    const double h = 1.0 / double(N - 1);
    const double e_mean = cfg.real("aniso", "E_mean", 0.0), e_amp = cfg.real("aniso", "E_amplitude", 1.0),
                 f_slope = cfg.real("aniso", "F_slope", 1.0);
    auto Ef = [=](double x) { return e_mean + e_amp * std::sin(kTwoPi * x); };
    auto Ff = [=](double x) { return 1.0 + f_slope * x; };
    std::vector<double> E(N), F(N);
    for (std::size_t k = 0; k < N; ++k) {
        E[k] = Ef(double(k) * h);
        F[k] = Ff(double(k) * h);
    }
    const auto oracle = limit_oracle_1d(Ef, Ff, 0.0, 0.0, std::size_t(cfg.integer("aniso", "oracle_resolution", 4097)));
    auto taus = log_ladder(cfg.real("aniso", "tau_max", 1e-1), cfg.real("aniso", "tau_min", 1e-9),
                           1 + long(std::lround(std::log10(cfg.real("aniso", "tau_max", 1e-1) /
                                                           cfg.real("aniso", "tau_min", 1e-9)))));
    if (cfg.boolean("aniso", "include_zero", false)) taus.push_back(0.0);

    struct Row {
        double cond_naive = NAN, err_naive = NAN, cond_mm = NAN, err_mm = NAN;
        bool naive = false;
        std::string error;
    };
    auto err_vs_oracle = [&](const std::vector<double>& n) {
        double d = 0.0, s = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double r = oracle.n0(double(k) * h);
            d = std::max(d, std::abs(n[k] - r));
            s = std::max(s, std::abs(r));
        }
        return d / s;
    };
    std::vector<Row> rows(taus.size());
    auto work = [&](std::size_t i) {
        const auto prob = make_aniso_problem_1d(M, h, taus[i], E, F);
        try {
            if (taus[i] > 0.0) {
                const auto a = solve_naive_1d(prob);
                rows[i].naive = true;
                rows[i].cond_naive = a.condition_estimate;
                rows[i].err_naive = err_vs_oracle(a.n);
            }
            const auto b = solve_micromacro_1d(prob);
            rows[i].cond_mm = b.condition_estimate;
            rows[i].err_mm = err_vs_oracle(b.n);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    };
    // Parallel over tau, written in ladder order.
    const unsigned T = std::max(1u, std::min<unsigned>(opt.threads, unsigned(taus.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < T; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < taus.size(); i += T) work(i);
        });
    for (auto& th : pool) th.join();

    for (const auto& r : rows)
        if (!r.error.empty()) throw SolverError(r.error);
    Csv csv(out_path(cfg, opt, "_aniso.csv"), {"tau", "solver", "condition_estimate", "max_error_vs_oracle"});
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (rows[i].naive) csv.row(taus[i], "naive", rows[i].cond_naive, rows[i].err_naive);
        csv.row(taus[i], "micromacro", rows[i].cond_mm, rows[i].err_mm);
    }
    json sum = {{"kind", "aniso-sweep"}, {"name", cfg.text("scenario", "name", "")}, {"M", M}, {"oracle_u0", oracle.u0},
                {"pass", true}};
    write_json(out_path(cfg, opt, "_summary.json"), sum);
    return kOk;
}

int run_scenario(const Config& cfg, const RunOptions& opt) {
    const std::string kind = cfg.kind();
    if (kind == "euler-poisson") return run_euler_poisson(cfg, opt);
    if (kind == "euler-maxwell") return run_euler_maxwell(cfg, opt);
    if (kind == "euler-lorentz") return run_euler_lorentz(cfg, opt);
    if (kind == "stability-map") return run_stability_map(cfg, opt);
    if (kind == "aniso-sweep") return run_aniso_sweep(cfg, opt);
    throw ConfigError({{0, "[scenario] kind '" + kind + "' is not runnable"}});
}

}  // namespace apfv::cli
