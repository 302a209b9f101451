// Sectioned key = value scenario files.
#pragma once

#include <array>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace apfv::cli {

struct Diagnostic {
    int line = 0;  // 0 when not tied to a line
    std::string message;
};

std::string to_string(const Diagnostic& d);

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Diagnostic> diags);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

struct Entry {
    std::string value;
    int line = 0;
};

class Config {
public:
    using Section = std::map<std::string, Entry>;

    /// Syntax errors are appended to diags; parsing continues past them.
    static Config parse(std::istream& in, std::vector<Diagnostic>& diags);
    static Config load(const std::string& path, std::vector<Diagnostic>& diags);

    bool has(const std::string& sec, const std::string& key) const;
    const std::map<std::string, Section>& sections() const noexcept { return sections_; }

    // Typed getters return the default when the key is absent and throw
    // ConfigError (with the line) when the value does not convert.
    double real(const std::string& sec, const std::string& key, double def) const;
    long integer(const std::string& sec, const std::string& key, long def) const;
    bool boolean(const std::string& sec, const std::string& key, bool def) const;
    std::string text(const std::string& sec, const std::string& key, const std::string& def) const;
    std::array<double, 3> vec3(const std::string& sec, const std::string& key,
                               const std::array<double, 3>& def) const;

    std::string kind() const { return text("scenario", "kind", ""); }

private:
    const Entry* find(const std::string& sec, const std::string& key) const;
    std::map<std::string, Section> sections_;
};

/// Schema check without running: unknown sections and keys, type errors,
/// range violations and cross-key constraints.
std::vector<Diagnostic> validate(const Config& cfg);

}  // namespace apfv::cli
