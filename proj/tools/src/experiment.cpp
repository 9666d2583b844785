#include "taoi/cli/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <set>

namespace taoi::cli {

namespace {

using Kind = ConfigParseError::Kind;

const std::set<std::string, std::less<>> kKnownKeys = {
    "t1u",     "t2u",          "t1c",      "t2c",      "p_s",    "q_s",
    "p_l",     "q_l",          "delta_hat", "epsilon", "sweep_param",
    "sweep_values", "policies", "seed",     "horizon_steps", "out"};

const std::set<std::string, std::less<>> kLatencyKeys = {"t1u", "t2u", "t1c", "t2c"};
const std::set<std::string, std::less<>> kAccuracyKeys = {"p_s", "q_s", "p_l", "q_l"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void fail(Kind kind, const Assignment& a, const std::string& message) {
    throw ConfigParseError(kind, a.source, a.line, message);
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return value;
}

long long parse_integer(const Assignment& a, long long min_value) {
    const auto v = parse_number<long long>(trim(a.value));
    if (!v) {
        fail(Kind::invalid_value, a, "'" + a.key + "' expects an integer, got '" + a.value + "'");
    }
    if (*v < min_value) {
        fail(Kind::invalid_value, a, "'" + a.key + "' must be at least " + std::to_string(min_value));
    }
    return *v;
}

double parse_real(const Assignment& a, std::string_view text) {
    const auto v = parse_number<double>(trim(text));
    if (!v || !std::isfinite(*v)) {
        fail(Kind::invalid_value, a, "'" + a.key + "' expects a number, got '" + std::string(text) + "'");
    }
    return *v;
}

double parse_probability(const Assignment& a, std::string_view text) {
    const double p = parse_real(a, text);
    if (!(p > 0.0 && p <= 1.0)) {
        fail(Kind::invalid_value, a, "'" + a.key + "' must lie in (0, 1], got " + std::string(trim(text)));
    }
    return p;
}

// The assignment a violated invariant is blamed on: the sweep list if it
// touches one of `keys`, otherwise whichever of `keys` was assigned last.
Assignment blame(const ExperimentConfig& config, std::initializer_list<const char*> keys) {
    if (config.sweep) {
        for (const char* k : keys) {
            if (config.sweep->param == k) {
                return config.origin.at("sweep_values");
            }
        }
    }
    Assignment worst;
    for (const char* k : keys) {
        const auto it = config.origin.find(k);
        if (it != config.origin.end() && it->second.line >= worst.line) {
            worst = it->second;
        }
    }
    if (worst.key.empty()) {
        worst.key = *keys.begin();
        worst.source = "config";
    }
    return worst;
}

void set_param(const std::string& key, double value, LatencyConfig& lat, AccuracyConfig& acc) {
    const int as_int = static_cast<int>(std::lround(value));
    if (key == "t1u") lat.t1u = as_int;
    else if (key == "t2u") lat.t2u = as_int;
    else if (key == "t1c") lat.t1c = as_int;
    else if (key == "t2c") lat.t2c = as_int;
    else if (key == "p_s") acc.p_s = value;
    else if (key == "q_s") acc.q_s = value;
    else if (key == "p_l") acc.p_l = value;
    else if (key == "q_l") acc.q_l = value;
}

void check_point(const ExperimentConfig& config, const LatencyConfig& lat,
                 const AccuracyConfig& acc, const std::string& where) {
    if (!(lat.t1u < lat.t2u)) {
        fail(Kind::invalid_value, blame(config, {"t1u", "t2u"}), "t1u < t2u violated" + where);
    }
    if (!(lat.t1c < lat.t2c)) {
        fail(Kind::invalid_value, blame(config, {"t1c", "t2c"}), "t1c < t2c violated" + where);
    }
    const std::pair<const char*, int> latencies[] = {
        {"t1u", lat.t1u}, {"t2u", lat.t2u}, {"t1c", lat.t1c}, {"t2c", lat.t2c}};
    for (const auto& [k, v] : latencies) {
        if (v < 1) {
            fail(Kind::invalid_value, blame(config, {k}), std::string(k) + " must be at least 1" + where);
        }
    }
    const std::pair<const char*, double> accuracies[] = {
        {"p_s", acc.p_s}, {"q_s", acc.q_s}, {"p_l", acc.p_l}, {"q_l", acc.q_l}};
    for (const auto& [k, p] : accuracies) {
        if (!(p > 0.0 && p <= 1.0)) {
            fail(Kind::invalid_value, blame(config, {k}), std::string(k) + " must lie in (0, 1]" + where);
        }
    }
    const int max_l = max_step_duration(lat);
    if (config.delta_hat && *config.delta_hat < 10 * max_l) {
        fail(Kind::invalid_value, blame(config, {"delta_hat"}),
             "delta_hat must be at least 10 * max L(a) = " + std::to_string(10 * max_l) + where);
    }
    const int min_l = min_step_duration(lat);
    if (config.epsilon && *config.epsilon > min_l) {
        fail(Kind::invalid_value, blame(config, {"epsilon"}),
             "epsilon must not exceed min L(a) = " + std::to_string(min_l) + where);
    }
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

ConfigParseError::ConfigParseError(Kind kind, std::string source, int line,
                                   const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         message),
      kind_(kind),
      source_(std::move(source)),
      line_(line) {}

std::optional<PolicySpec> PolicySpec::parse(std::string_view text) {
    text = trim(text);
    if (text == "optimal") return PolicySpec{Kind::optimal, {}};
    if (text == "greedy") return PolicySpec{Kind::greedy, {}};
    if (text == "random") return PolicySpec{Kind::random, {}};
    constexpr std::string_view prefix = "constant:";
    if (text.size() == prefix.size() + 2 && text.substr(0, prefix.size()) == prefix) {
        const char u = text[prefix.size()];
        const char c = text[prefix.size() + 1];
        if ((u == '0' || u == '1') && (c == '0' || c == '1')) {
            return PolicySpec{Kind::constant, Action{static_cast<std::uint8_t>(u - '0'),
                                                     static_cast<std::uint8_t>(c - '0')}};
        }
    }
    return std::nullopt;
}

std::string PolicySpec::name() const {
    switch (kind) {
        case Kind::optimal: return "optimal";
        case Kind::greedy: return "greedy";
        case Kind::random: return "random";
        case Kind::constant:
            return "constant:" + std::to_string(action.resolution) + std::to_string(action.model);
    }
    return "unknown";
}

SystemConfig ExperimentConfig::base_system() const {
    LatencyConfig lat;
    AccuracyConfig acc;
    auto take = [](const auto& opt, auto& field) {
        if (opt) field = *opt;
    };
    take(t1u, lat.t1u);
    take(t2u, lat.t2u);
    take(t1c, lat.t1c);
    take(t2c, lat.t2c);
    take(p_s, acc.p_s);
    take(q_s, acc.q_s);
    take(p_l, acc.p_l);
    take(q_l, acc.q_l);
    if (sweep && !sweep->values.empty()) {
        const std::string& k = sweep->param;
        const bool present = (k == "t1u" && t1u) || (k == "t2u" && t2u) || (k == "t1c" && t1c) ||
                             (k == "t2c" && t2c) || (k == "p_s" && p_s) || (k == "q_s" && q_s) ||
                             (k == "p_l" && p_l) || (k == "q_l" && q_l);
        if (!present) {
            set_param(k, sweep->values.front(), lat, acc);
        }
    }
    return SystemConfig::make(lat, acc, delta_hat, epsilon);
}

SystemConfig ExperimentConfig::system_at(double value) const {
    SystemConfig base = base_system();
    if (!sweep) {
        return base;
    }
    LatencyConfig lat = base.latency;
    AccuracyConfig acc = base.accuracy;
    set_param(sweep->param, value, lat, acc);
    return SystemConfig::make(lat, acc, delta_hat, epsilon);
}

std::vector<Assignment> parse_assignments(std::string_view text, const std::string& source) {
    std::vector<Assignment> out;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string_view line = trim(raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        Assignment a;
        a.source = source;
        a.line = line_no;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(Kind::syntax, a, "expected 'key = value', got '" + std::string(line) + "'");
        }
        a.key = std::string(trim(line.substr(0, eq)));
        a.value = std::string(trim(line.substr(eq + 1)));
        if (a.key.empty() || a.value.empty()) {
            fail(Kind::syntax, a, "expected 'key = value', got '" + std::string(line) + "'");
        }
        if (!kKnownKeys.contains(a.key)) {
            fail(Kind::unknown_key, a, "unknown key '" + a.key + "'");
        }
        if (!seen.insert(a.key).second) {
            fail(Kind::syntax, a, "duplicate key '" + a.key + "'");
        }
        out.push_back(std::move(a));
    }
    return out;
}

void apply_assignment(ExperimentConfig& config, const Assignment& a) {
    const std::string& k = a.key;
    if (kLatencyKeys.contains(k)) {
        const int v = static_cast<int>(parse_integer(a, 1));
        if (k == "t1u") config.t1u = v;
        else if (k == "t2u") config.t2u = v;
        else if (k == "t1c") config.t1c = v;
        else config.t2c = v;
    } else if (kAccuracyKeys.contains(k)) {
        const double v = parse_probability(a, a.value);
        if (k == "p_s") config.p_s = v;
        else if (k == "q_s") config.q_s = v;
        else if (k == "p_l") config.p_l = v;
        else config.q_l = v;
    } else if (k == "delta_hat") {
        config.delta_hat = static_cast<State>(parse_integer(a, 1));
    } else if (k == "epsilon") {
        const double v = parse_real(a, a.value);
        if (!(v > 0)) {
            fail(Kind::invalid_value, a, "'epsilon' must be positive");
        }
        config.epsilon = v;
    } else if (k == "sweep_param") {
        if (!kLatencyKeys.contains(a.value) && !kAccuracyKeys.contains(a.value)) {
            fail(Kind::invalid_value, a, "cannot sweep '" + a.value + "'");
        }
        if (!config.sweep) config.sweep.emplace();
        config.sweep->param = a.value;
    } else if (k == "sweep_values") {
        std::vector<double> values;
        for (std::string_view item : split(a.value, ',')) {
            if (item.empty()) {
                fail(Kind::invalid_value, a, "empty entry in sweep list");
            }
            values.push_back(parse_real(a, item));
        }
        if (!config.sweep) config.sweep.emplace();
        config.sweep->values = std::move(values);
    } else if (k == "policies") {
        std::vector<PolicySpec> policies;
        for (std::string_view item : split(a.value, ',')) {
            const auto spec = PolicySpec::parse(item);
            if (!spec) {
                fail(Kind::invalid_value, a, "unknown policy '" + std::string(item) + "'");
            }
            policies.push_back(*spec);
        }
        config.policies = std::move(policies);
    } else if (k == "seed") {
        config.seed = static_cast<std::uint64_t>(parse_integer(a, 0));
    } else if (k == "horizon_steps") {
        config.horizon_steps = parse_integer(a, 1);
    } else if (k == "out") {
        config.output_path = a.value;
    } else {
        fail(Kind::unknown_key, a, "unknown key '" + k + "'");
    }
    config.origin[k] = a;
}

void validate(const ExperimentConfig& config) {
    if (config.sweep) {
        if (config.sweep->param.empty()) {
            fail(Kind::invalid_value, config.origin.at("sweep_values"),
                 "sweep_values given without sweep_param");
        }
        if (!config.origin.contains("sweep_values")) {
            fail(Kind::invalid_value, config.origin.at("sweep_param"),
                 "sweep_param given without sweep_values");
        }
        if (config.sweep->values.empty()) {
            fail(Kind::invalid_value, config.origin.at("sweep_values"), "empty sweep list");
        }
    }
    const std::string swept = config.sweep ? config.sweep->param : std::string();
    const std::pair<const char*, bool> required[] = {
        {"t1u", config.t1u.has_value()}, {"t2u", config.t2u.has_value()},
        {"t1c", config.t1c.has_value()}, {"t2c", config.t2c.has_value()},
        {"p_s", config.p_s.has_value()}, {"q_s", config.q_s.has_value()},
        {"p_l", config.p_l.has_value()}, {"q_l", config.q_l.has_value()}};
    for (const auto& [key, present] : required) {
        if (!present && swept != key) {
            throw ConfigParseError(Kind::invalid_value, "config", 0,
                                   std::string("missing required key '") + key + "'");
        }
    }

    if (config.sweep && kLatencyKeys.contains(swept)) {
        for (double v : config.sweep->values) {
            if (v != std::floor(v) || v < 1) {
                fail(Kind::invalid_value, config.origin.at("sweep_values"),
                     "sweep over " + swept + " needs positive integers, got " + format_value(v));
            }
        }
    }

    // Base point first, then each sweep value.
    auto point = [&](std::optional<double> sweep_value) {
        LatencyConfig lat;
        AccuracyConfig acc;
        lat.t1u = config.t1u.value_or(0);
        lat.t2u = config.t2u.value_or(0);
        lat.t1c = config.t1c.value_or(0);
        lat.t2c = config.t2c.value_or(0);
        acc.p_s = config.p_s.value_or(0);
        acc.q_s = config.q_s.value_or(0);
        acc.p_l = config.p_l.value_or(0);
        acc.q_l = config.q_l.value_or(0);
        std::string where;
        if (sweep_value) {
            set_param(swept, *sweep_value, lat, acc);
            where = " at " + swept + " = " + format_value(*sweep_value);
        } else if (config.sweep) {
            // The base point may omit the swept key; fill it from the list.
            if (!config.origin.contains(swept)) {
                set_param(swept, config.sweep->values.front(), lat, acc);
            }
        }
        check_point(config, lat, acc, where);
    };
    point(std::nullopt);
    if (config.sweep) {
        for (double v : config.sweep->values) {
            point(v);
        }
    }
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    ExperimentConfig config;
    for (const auto& a : parse_assignments(text, source)) {
        apply_assignment(config, a);
    }
    validate(config);
    return config;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig2", "fig3a", "fig3b", "fig4a", "fig4b"};
    return names;
}

std::string preset_text(const std::string& name) {
    static const std::string kAccuracyGrid =
        "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,0.99";
    static const std::string kCommon =
        "policies = optimal,greedy,random\n"
        "seed = 42\n"
        "horizon_steps = 1000000\n";
    if (name == "fig2") {
        // Policy structure as the high-resolution upload latency grows.
        return "t1u = 4\nt2u = 6\nt1c = 3\nt2c = 4\n"
               "p_s = 0.3\nq_s = 0.7\np_l = 0.5\nq_l = 0.8\n"
               "sweep_param = t2u\nsweep_values = 5,6,7,8,9,10,11,12,13,14\n" +
               kCommon;
    }
    if (name == "fig3a") {
        return "t1u = 1\nt2u = 2\nt1c = 2\nt2c = 11\n"
               "p_s = 0.4\nq_s = 0.5\np_l = 0.6\nq_l = 0.8\n"
               "sweep_param = t2u\nsweep_values = 2,3,4,5,6,7,8,9,10,11,12,13,14\n" +
               kCommon;
    }
    if (name == "fig3b") {
        return "t1u = 1\nt2u = 2\nt1c = 2\nt2c = 11\n"
               "p_s = 0.4\nq_s = 0.5\np_l = 0.6\nq_l = 0.8\n"
               "sweep_param = t1c\nsweep_values = 1,2,3,4,5,6,7,8,9,10\n" +
               kCommon;
    }
    if (name == "fig4a") {
        return "t1u = 3\nt2u = 4\nt1c = 8\nt2c = 10\n"
               "p_s = 0.3\nq_s = 0.5\np_l = 0.6\nq_l = 0.8\n"
               "sweep_param = p_s\nsweep_values = " +
               kAccuracyGrid + "\n" + kCommon;
    }
    if (name == "fig4b") {
        return "t1u = 3\nt2u = 4\nt1c = 8\nt2c = 10\n"
               "p_s = 0.3\nq_s = 0.4\np_l = 0.5\nq_l = 0.8\n"
               "sweep_param = q_l\nsweep_values = " +
               kAccuracyGrid + "\n" + kCommon;
    }
    throw std::out_of_range("unknown preset '" + name + "'");
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig config = parse_config(preset_text(name), "preset " + name);
    config.label = name;
    return config;
}

ExperimentConfig build_experiment(const std::optional<std::string>& config_text,
                                  const std::string& config_source,
                                  const std::optional<std::string>& preset_name,
                                  const std::vector<std::string>& overrides) {
    ExperimentConfig config;
    if (config_text) {
        for (const auto& a : parse_assignments(*config_text, config_source)) {
            apply_assignment(config, a);
        }
        config.label = config_source;
    }
    if (preset_name) {
        std::string text;
        try {
            text = preset_text(*preset_name);
        } catch (const std::out_of_range& e) {
            throw ConfigParseError(Kind::invalid_value, "--preset", 0, e.what());
        }
        for (const auto& a : parse_assignments(text, "preset " + *preset_name)) {
            apply_assignment(config, a);
        }
        config.label = *preset_name;
    }
    for (const auto& item : overrides) {
        for (const auto& a : parse_assignments(item, "--set")) {
            apply_assignment(config, a);
        }
    }
    validate(config);
    return config;
}

}  // namespace taoi::cli
