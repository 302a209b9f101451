// apfv: batch driver for scenario files.
#include "config.hpp"
#include "scenarios.hpp"

#include "apfv/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace apfv::cli;

namespace {

struct Args {
    std::string config;
    RunOptions opt;
    long seed = -1;
};

void common(CLI::App* sub, Args& a, bool needs_out) {
    sub->add_option("--config", a.config, "Scenario file")->required()->check(CLI::ExistingFile);
    if (!needs_out) return;
    sub->add_option("--out", a.opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", a.seed, "Seed for randomized initial data (overrides [scenario] seed)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", a.opt.threads, "Worker threads for sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

// Parse and schema-check; prints diagnostics and returns false on any.
bool load(const std::string& path, Config& cfg) {
    std::vector<Diagnostic> diags;
    cfg = Config::load(path, diags);
    if (diags.empty()) diags = validate(cfg);
    for (const auto& d : diags) std::cerr << path << ": " << to_string(d) << '\n';
    return diags.empty();
}

template <class F>
int guarded(const std::string& path, F&& body) {
    try {
        Config cfg;
        if (!load(path, cfg)) return kConfigError;
        return body(cfg);
    } catch (const ConfigError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << path << ": " << to_string(d) << '\n';
        return kConfigError;
    } catch (const apfv::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << '\n';
        return kConfigError;
    } catch (const apfv::SolverError& e) {
        std::cerr << "solver failure: " << e.what();
        if (e.pivot() >= 0) std::cerr << " (pivot " << e.pivot() << ")";
        std::cerr << '\n';
        return kSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic-preserving plasma fluid schemes: scenario driver"};
    app.require_subcommand(1);
    Args a;
    auto* run = app.add_subcommand("run", "Run the scenario named by [scenario] kind");
    auto* val = app.add_subcommand("validate", "Check a scenario file without running it");
    auto* stab = app.add_subcommand("stability-map", "Evaluate the linearized stability map in [stability]");
    auto* sweep = app.add_subcommand("aniso-sweep", "Sweep tau for the 1D anisotropic problem in [aniso]");
    common(run, a, true);
    common(val, a, false);
    common(stab, a, true);
    common(sweep, a, true);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }
    if (a.seed >= 0) a.opt.seed = a.seed;

    if (*val) {
        Config cfg;
        try {
            if (!load(a.config, cfg)) return kConfigError;
        } catch (const ConfigError& e) {
            for (const auto& d : e.diagnostics()) std::cerr << a.config << ": " << to_string(d) << '\n';
            return kConfigError;
        }
        std::cout << a.config << ": ok\n";
        return kOk;
    }
    int rc = kOk;
    if (*run) rc = guarded(a.config, [&](const Config& c) { return run_scenario(c, a.opt); });
    if (*stab) rc = guarded(a.config, [&](const Config& c) { return run_stability_map(c, a.opt); });
    if (*sweep) rc = guarded(a.config, [&](const Config& c) { return run_aniso_sweep(c, a.opt); });
    if (rc == kInvariantFailure) std::cerr << "invariant threshold exceeded; see the summary JSON\n";
    return rc;
}
