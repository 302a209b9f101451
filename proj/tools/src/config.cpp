#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace apfv::cli {

std::string to_string(const Diagnostic& d) {
    return d.line > 0 ? "line " + std::to_string(d.line) + ": " + d.message : d.message;
}

namespace {

std::string join(const std::vector<Diagnostic>& diags) {
    std::string s;
    for (const auto& d : diags) {
        if (!s.empty()) s += '\n';
        s += to_string(d);
    }
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_real(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long> to_integer(const std::string& s) {
    long v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::optional<bool> to_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    return std::nullopt;
}

std::optional<std::array<double, 3>> to_vec3(const std::string& s) {
    std::array<double, 3> v{};
    std::stringstream ss(s);
    std::string part;
    int i = 0;
    while (std::getline(ss, part, ',')) {
        if (i == 3) return std::nullopt;
        const auto r = to_real(trim(part));
        if (!r) return std::nullopt;
        v[i++] = *r;
    }
    if (i != 3) return std::nullopt;
    return v;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diags)
    : std::runtime_error(join(diags)), diags_(std::move(diags)) {}

Config Config::parse(std::istream& in, std::vector<Diagnostic>& diags) {
    Config c;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                diags.push_back({line, "malformed section header '" + s + "'"});
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            c.sections_[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            diags.push_back({line, "expected 'key = value', got '" + s + "'"});
            continue;
        }
        if (section.empty()) {
            diags.push_back({line, "key outside of any section"});
            continue;
        }
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key.empty()) {
            diags.push_back({line, "empty key"});
            continue;
        }
        auto& sec = c.sections_[section];
        if (auto it = sec.find(key); it != sec.end()) {
            diags.push_back({line, "duplicate key '" + key + "' in [" + section + "] (first set on line " +
                                       std::to_string(it->second.line) + ")"});
            continue;
        }
        sec[key] = {value, line};
    }
    return c;
}

Config Config::load(const std::string& path, std::vector<Diagnostic>& diags) {
    std::ifstream f(path);
    if (!f) throw ConfigError({{0, "cannot open config file '" + path + "'"}});
    return parse(f, diags);
}

const Entry* Config::find(const std::string& sec, const std::string& key) const {
    const auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
}

bool Config::has(const std::string& sec, const std::string& key) const { return find(sec, key) != nullptr; }

namespace {
[[noreturn]] void bad(const Entry& e, const std::string& sec, const std::string& key, const char* what) {
    throw ConfigError({{e.line, "[" + sec + "] " + key + ": expected " + what + ", got '" + e.value + "'"}});
}
}  // namespace

double Config::real(const std::string& sec, const std::string& key, double def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    const auto v = to_real(e->value);
    if (!v) bad(*e, sec, key, "a real number");
    return *v;
}

long Config::integer(const std::string& sec, const std::string& key, long def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    const auto v = to_integer(e->value);
    if (!v) bad(*e, sec, key, "an integer");
    return *v;
}

bool Config::boolean(const std::string& sec, const std::string& key, bool def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    const auto v = to_bool(e->value);
    if (!v) bad(*e, sec, key, "true or false");
    return *v;
}

std::string Config::text(const std::string& sec, const std::string& key, const std::string& def) const {
    const Entry* e = find(sec, key);
    return e ? e->value : def;
}

std::array<double, 3> Config::vec3(const std::string& sec, const std::string& key,
                                   const std::array<double, 3>& def) const {
    const Entry* e = find(sec, key);
    if (!e) return def;
    const auto v = to_vec3(e->value);
    if (!v) bad(*e, sec, key, "three comma-separated reals");
    return *v;
}

// ---------------------------------------------------------------------------

namespace {

enum class Type { real, integer, boolean, text, vec3, choice };

struct KeySpec {
    Type type;
    double min = -INFINITY;
    bool min_exclusive = false;
    std::vector<std::string> choices{};
};

KeySpec real_ge(double m) { return {Type::real, m, false}; }
KeySpec real_gt(double m) { return {Type::real, m, true}; }
KeySpec int_ge(double m) { return {Type::integer, m, false}; }
KeySpec any_real() { return {Type::real}; }
KeySpec flag() { return {Type::boolean}; }
KeySpec choice(std::vector<std::string> c) { return {Type::choice, -INFINITY, false, std::move(c)}; }

const std::map<std::string, std::map<std::string, KeySpec>>& schema() {
    static const std::map<std::string, std::map<std::string, KeySpec>> s = {
        {"scenario",
         {{"kind", choice({"euler-poisson", "euler-maxwell", "euler-lorentz", "stability-map", "aniso-sweep"})},
          {"name", {Type::text}},
          {"steps", int_ge(1)},
          {"seed", int_ge(0)}}},
        {"grid",
         {{"cells", int_ge(4)},
          {"cells_x", int_ge(4)},
          {"cells_y", int_ge(4)},
          {"cells_z", int_ge(4)},
          {"length", real_gt(0)},
          {"periodic_transverse", flag()}}},
        {"params",
         {{"scheme", choice({"ap", "classical", "fdap1", "fdap2"})},
          {"lambda", real_ge(0)},
          {"delta", real_gt(0)},
          {"cfl", real_gt(0)},
          {"tau", real_ge(0)},
          {"T", real_gt(0)},
          {"gamma", real_ge(1)},
          {"viscosity", choice({"rusanov", "rusanov_explicit", "constant", "none"})},
          {"viscosity_coefficient", real_ge(0)},
          {"density_viscosity", flag()},
          {"micromacro_threshold", real_gt(0)}}},
        {"initial",
         {{"profile", choice({"rest", "sine", "random"})},
          {"amplitude", real_ge(0)},
          {"wavenumber", int_ge(1)},
          {"velocity", any_real()},
          {"velocity_amplitude", any_real()},
          {"transverse_velocity", any_real()},
          {"B0", any_real()},
          {"well_prepared", flag()}}},
        {"fields", {{"B", {Type::vec3}}, {"E_amplitude", any_real()}}},
        {"stability",
         {{"scheme", choice({"classical", "ap", "both"})},
          {"h", real_gt(0)},
          {"c", real_ge(0)},
          {"T", real_gt(0)},
          {"delta_min", real_gt(0)},
          {"delta_max", real_gt(0)},
          {"delta_count", int_ge(1)},
          {"lambda_min", real_gt(0)},
          {"lambda_max", real_gt(0)},
          {"lambda_count", int_ge(1)},
          {"xi_samples", int_ge(64)}}},
        {"aniso",
         {{"M", int_ge(3)},
          {"tau_min", real_gt(0)},
          {"tau_max", real_gt(0)},
          {"include_zero", flag()},
          {"E_mean", any_real()},
          {"E_amplitude", any_real()},
          {"F_slope", any_real()},
          {"oracle_resolution", int_ge(64)}}},
        {"invariants",
         {{"gauss_residual_max", real_gt(0)},
          {"mass_drift_max", real_gt(0)},
          {"drift_residual_max", real_gt(0)},
          {"max_density_deviation", real_gt(0)}}},
        {"output", {{"prefix", {Type::text}}, {"final_state", flag()}}},
    };
    return s;
}

void check_value(const std::string& sec, const std::string& key, const Entry& e, const KeySpec& ks,
                 std::vector<Diagnostic>& out) {
    const std::string where = "[" + sec + "] " + key;
    std::optional<double> num;
    switch (ks.type) {
        case Type::real:
            num = to_real(e.value);
            if (!num) return out.push_back({e.line, where + ": expected a real number, got '" + e.value + "'"});
            break;
        case Type::integer: {
            const auto v = to_integer(e.value);
            if (!v) return out.push_back({e.line, where + ": expected an integer, got '" + e.value + "'"});
            num = double(*v);
            break;
        }
        case Type::boolean:
            if (!to_bool(e.value)) out.push_back({e.line, where + ": expected true or false, got '" + e.value + "'"});
            return;
        case Type::vec3:
            if (!to_vec3(e.value))
                out.push_back({e.line, where + ": expected three comma-separated reals, got '" + e.value + "'"});
            return;
        case Type::choice:
            if (std::find(ks.choices.begin(), ks.choices.end(), e.value) == ks.choices.end()) {
                std::string opts;
                for (const auto& c : ks.choices) opts += (opts.empty() ? "" : ", ") + c;
                out.push_back({e.line, where + ": '" + e.value + "' is not one of " + opts});
            }
            return;
        case Type::text:
            return;
    }
    if (num && (ks.min_exclusive ? !(*num > ks.min) : !(*num >= ks.min))) {
        std::ostringstream m;
        m << where << ": value " << e.value << " must be " << (ks.min_exclusive ? "> " : ">= ") << ks.min;
        out.push_back({e.line, m.str()});
    }
}

}  // namespace

std::vector<Diagnostic> validate(const Config& cfg) {
    std::vector<Diagnostic> out;
    const auto& sch = schema();
    for (const auto& [sec, keys] : cfg.sections()) {
        const auto s = sch.find(sec);
        if (s == sch.end()) {
            const int line = keys.empty() ? 0 : keys.begin()->second.line;
            out.push_back({line, "unknown section [" + sec + "]"});
            continue;
        }
        for (const auto& [key, e] : keys) {
            const auto k = s->second.find(key);
            if (k == s->second.end()) {
                out.push_back({e.line, "unknown key '" + key + "' in [" + sec + "]"});
                continue;
            }
            check_value(sec, key, e, k->second, out);
        }
    }
    if (!out.empty()) {
        std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
        return out;
    }

    // Cross-key constraints; values are known to convert here.
    const std::string kind = cfg.kind();
    auto line_of = [&](const std::string& sec, const std::string& key) {
        const auto s = cfg.sections().find(sec);
        if (s == cfg.sections().end()) return 0;
        const auto e = s->second.find(key);
        return e == s->second.end() ? 0 : e->second.line;
    };
    if (kind.empty()) out.push_back({0, "[scenario] kind is required"});
    const std::string scheme = cfg.text("params", "scheme", "");
    if (kind == "euler-poisson" || kind == "euler-maxwell") {
        if (!scheme.empty() && scheme != "ap" && scheme != "classical")
            out.push_back({line_of("params", "scheme"), "[params] scheme: '" + scheme + "' is not valid for " + kind});
        if (scheme == "classical" && !(cfg.real("params", "lambda", 1.0) > 0.0))
            out.push_back({line_of("params", "lambda"), "[params] lambda: the classical scheme needs lambda > 0"});
    }
    if (kind == "euler-lorentz") {
        if (!scheme.empty() && scheme != "fdap1" && scheme != "fdap2")
            out.push_back({line_of("params", "scheme"), "[params] scheme: '" + scheme + "' is not valid for " + kind});
        if (scheme != "fdap1" && cfg.real("params", "gamma", 1.0) != 1.0)
            out.push_back({line_of("params", "gamma"), "[params] gamma: fdap2 supports only the isothermal closure"});
        const auto B = cfg.vec3("fields", "B", {0.5, -0.3, 1.2});
        if (B[2] == 0.0) out.push_back({line_of("fields", "B"), "[fields] B: the x3 component must be nonzero"});
    }
    if (cfg.real("stability", "delta_min", 1e-6) >= cfg.real("stability", "delta_max", 1.0) &&
        cfg.integer("stability", "delta_count", 2) > 1)
        out.push_back({line_of("stability", "delta_min"), "[stability] delta_min must be below delta_max"});
    if (cfg.real("stability", "lambda_min", 1e-8) > cfg.real("stability", "lambda_max", 1.0))
        out.push_back({line_of("stability", "lambda_min"), "[stability] lambda_min must not exceed lambda_max"});
    if (cfg.real("aniso", "tau_min", 1e-9) > cfg.real("aniso", "tau_max", 1e-1))
        out.push_back({line_of("aniso", "tau_min"), "[aniso] tau_min must not exceed tau_max"});
    return out;
}

}  // namespace apfv::cli
