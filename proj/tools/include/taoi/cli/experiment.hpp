#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taoi/model.hpp"

namespace taoi::cli {

/// Line-attributed configuration error.
class ConfigParseError : public std::runtime_error {
public:
    enum class Kind { syntax, unknown_key, invalid_value };

    ConfigParseError(Kind kind, std::string source, int line, const std::string& message);

    Kind kind() const { return kind_; }
    int line() const { return line_; }
    const std::string& source() const { return source_; }

private:
    Kind kind_;
    std::string source_;
    int line_;
};

/// One `key = value` pair and where it came from.
struct Assignment {
    std::string key;
    std::string value;
    std::string source;
    int line = 0;
};

struct SweepSpec {
    std::string param;  ///< one of t1u, t2u, t1c, t2c, p_s, q_s, p_l, q_l
    std::vector<double> values;
};

struct PolicySpec {
    enum class Kind { optimal, greedy, random, constant };
    Kind kind = Kind::optimal;
    Action action;  ///< constant only

    /// optimal | greedy | random | constant:<a_u><a_c>, e.g. constant:10
    static std::optional<PolicySpec> parse(std::string_view text);
    std::string name() const;
};

struct ExperimentConfig {
    std::string label = "config";
    std::optional<int> t1u, t2u, t1c, t2c;
    std::optional<double> p_s, q_s, p_l, q_l;
    std::optional<State> delta_hat;  ///< unset: 100 * max L(a) per sweep point
    std::optional<double> epsilon;   ///< unset: min L(a) per sweep point
    std::optional<SweepSpec> sweep;
    std::vector<PolicySpec> policies = {{PolicySpec::Kind::optimal, {}},
                                        {PolicySpec::Kind::greedy, {}},
                                        {PolicySpec::Kind::random, {}}};
    std::uint64_t seed = 42;
    std::int64_t horizon_steps = 1'000'000;
    std::string output_path;

    /// Where each key was last assigned, for error messages.
    std::map<std::string, Assignment> origin;

    /// System at the base point (swept parameter taken from the first sweep
    /// value when the base omits it).
    SystemConfig base_system() const;
    /// System with the swept parameter replaced by `value`.
    SystemConfig system_at(double value) const;
};

/// Splits text into assignments; rejects malformed lines, unknown and
/// duplicate keys.
std::vector<Assignment> parse_assignments(std::string_view text, const std::string& source);

/// Applies one assignment, checking the value's type and range.
void apply_assignment(ExperimentConfig& config, const Assignment& assignment);

/// Required keys present, cross-field invariants hold at the base point and at
/// every sweep value.
void validate(const ExperimentConfig& config);

/// parse_assignments + apply_assignment + validate.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "config");

/// Built-in presets: fig2, fig3a, fig3b, fig4a, fig4b.
const std::vector<std::string>& preset_names();
/// Config text of a preset; throws std::out_of_range for unknown names.
std::string preset_text(const std::string& name);
ExperimentConfig preset(const std::string& name);

/// Layers config file, preset and command-line overrides, in that order.
ExperimentConfig build_experiment(const std::optional<std::string>& config_text,
                                  const std::string& config_source,
                                  const std::optional<std::string>& preset_name,
                                  const std::vector<std::string>& overrides);

}  // namespace taoi::cli
