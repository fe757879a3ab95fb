#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "autores/dopri5.hpp"
#include "autores/model_params.hpp"

namespace autores::cli {

// Bad flags or config files; the CLI exits with status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValueType {
    Number,      // double; also accepts "inf"
    Auto,        // double or the word "auto" (stored as NaN)
    Integer,
    Bool,
    Choice,      // one of OptionSpec::choices
    Range,       // "lo:hi:step", inclusive
    NumberList,  // "a,b,c" on the command line, an array in JSON
    Text,
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> expand() const;
};

using Value = std::variant<double, long long, bool, std::string, Range, std::vector<double>>;

struct OptionSpec {
    std::string key;  // JSON path, "params.lambda"
    ValueType type = ValueType::Number;
    std::string default_text;
    std::string help;
    std::vector<std::string> choices;
    bool positive = false;  // numbers must be > 0

    // "--" + last path component with '_' -> '-'
    std::string flag() const;
};

enum class Subcommand {
    Roots,
    Partition,
    Series,
    Simulate,
    CaptureMap,
    OscillatorDemo,
    Stability,
    Portrait,
    ActionAngle,
    Envelope,
};

std::string_view to_string(Subcommand s) noexcept;
const std::vector<Subcommand>& all_subcommands();
std::string_view describe(Subcommand s) noexcept;

// Every option a subcommand accepts, common ones included, with its
// subcommand-specific default.
std::vector<OptionSpec> option_specs(Subcommand s);

struct RunConfig {
    Subcommand subcommand = Subcommand::Roots;
    std::map<std::string, Value> values;

    double number(const std::string& key) const;
    long long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    const Range& range(const std::string& key) const;
    const std::vector<double>& list(const std::string& key) const;
    bool is_auto(const std::string& key) const;

    ModelParams params() const;
    SolverConfig solver() const;
    std::filesystem::path out_dir() const;
    std::string format() const;
    std::uint64_t seed() const;
    unsigned threads() const;

    // Resolved values as nested JSON; `content_only` drops the keys that do
    // not change file contents (io.out_dir, threads).
    nlohmann::ordered_json to_json(bool content_only = false) const;
};

// Flags (raw text as typed) win over the config file, which wins over
// defaults. `config_path` may be empty. `env_out` is the AUTORES_OUT value.
RunConfig resolve(Subcommand s, const std::map<std::string, std::string>& flags,
                  const std::filesystem::path& config_path, const std::optional<std::string>& env_out);

// Same on config text already in memory; `origin` names it in diagnostics.
RunConfig resolve_text(Subcommand s, const std::map<std::string, std::string>& flags, const std::string& config_text,
                       const std::string& origin, const std::optional<std::string>& env_out);

}  // namespace autores::cli
