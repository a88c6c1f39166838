#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "tsl/errors.hpp"
#include "tsl/geometry.hpp"

namespace tsl::cli {

namespace {

std::string trim(const std::string& s)
{
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("bad value for '" + key + "': '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad value for '" + key + "': '" + v + "'");
}

std::vector<int> parse_list(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

std::string list_str(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

struct Key {
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

#define TSL_INT(name)                                                                            \
    {#name, {[](ScenarioConfig& c, const std::string& v) { c.name = parse_number<int>(#name, v); }, \
             [](const ScenarioConfig& c) { return std::to_string(c.name); }}}
#define TSL_REAL(name)                                                                              \
    {#name, {[](ScenarioConfig& c, const std::string& v) { c.name = parse_number<double>(#name, v); }, \
             [](const ScenarioConfig& c) { return format_real(c.name); }}}
#define TSL_LIST(name)                                                                       \
    {#name, {[](ScenarioConfig& c, const std::string& v) { c.name = parse_list(#name, v); }, \
             [](const ScenarioConfig& c) { return list_str(c.name); }}}
#define TSL_STR(name) \
    {#name, {[](ScenarioConfig& c, const std::string& v) { c.name = v; }, [](const ScenarioConfig& c) { return c.name; }}}
#define TSL_BOOL(name)                                                                       \
    {#name, {[](ScenarioConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }, \
             [](const ScenarioConfig& c) { return std::string(c.name ? "true" : "false"); }}}

const std::vector<std::pair<std::string, Key>>& keys()
{
    static const std::vector<std::pair<std::string, Key>> k{
        TSL_STR(scenario),
        TSL_INT(lambda),
        TSL_LIST(q),
        TSL_INT(q_max_truncation),
        TSL_LIST(lambdas),
        TSL_INT(p),
        TSL_INT(k_min),
        TSL_INT(k_max),
        TSL_REAL(window),
        TSL_REAL(slack),
        TSL_STR(w_profile),
        TSL_REAL(w_strength),
        TSL_STR(w_envelope),
        TSL_REAL(w_eps),
        TSL_REAL(w_freq),
        TSL_INT(reflection_sign),
        TSL_STR(orientation),
        TSL_BOOL(time_mollify_b),
        TSL_INT(residual_level),
        TSL_LIST(fv_levels),
        TSL_REAL(cfl),
        TSL_INT(n_samples),
        TSL_INT(lp_ny),
        TSL_INT(lp_nt),
        TSL_INT(points),
        TSL_INT(pairing_n),
        {"seed", {[](ScenarioConfig& c, const std::string& v) { c.seed = parse_number<unsigned>("seed", v); },
                  [](const ScenarioConfig& c) { return std::to_string(c.seed); }}},
        TSL_BOOL(svg),
        TSL_STR(out),
    };
    return k;
}

#undef TSL_INT
#undef TSL_REAL
#undef TSL_LIST
#undef TSL_STR
#undef TSL_BOOL

void validate(const ScenarioConfig& c)
{
    if (c.lambda < 0 || c.lambda > 8) throw ConfigError("lambda must lie in 0..8");
    for (int q : c.q)
        if (q < 1 || q > 8) throw ConfigError("q entries must lie in 1..8");
    if (c.reflection_sign != 1 && c.reflection_sign != -1) throw ConfigError("reflection_sign must be 1 or -1");
    if (c.orientation != "counterclockwise" && c.orientation != "clockwise")
        throw ConfigError("orientation must be counterclockwise or clockwise");
    if (!(c.cfl > 0 && c.cfl < 1)) throw ConfigError("cfl must lie in (0, 1)");
    if (c.p < 1) throw ConfigError("p must be >= 1");
    if (c.k_min < 1 || c.k_max < c.k_min) throw ConfigError("need 1 <= k_min <= k_max");
    parse_profile(c.w_profile);
    parse_envelope(c.w_envelope);
}

}  // namespace

ExactOptions ScenarioConfig::exact() const
{
    ExactOptions o;
    o.reflection_sign = reflection_sign;
    o.orientation = orientation == "clockwise" ? Orientation::Clockwise : Orientation::Counterclockwise;
    return o;
}

SmoothFieldDef ScenarioConfig::w() const
{
    SmoothFieldParams p;
    p.profile = parse_profile(w_profile);
    p.strength = w_strength;
    p.envelope = parse_envelope(w_envelope);
    p.eps = w_eps;
    p.freq = w_freq;
    return builtin_field(p);
}

void set_key(ScenarioConfig& c, const std::string& key, const std::string& value)
{
    for (const auto& [name, k] : keys())
        if (name == key) {
            ScenarioConfig next = c;
            k.set(next, value);
            validate(next);
            c = std::move(next);
            return;
        }
    throw ConfigError("unknown key '" + key + "'");
}

ScenarioConfig parse_config(std::istream& is, const std::string& source)
{
    ScenarioConfig c;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(n) + ": expected key = value");
        try {
            set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    return parse_config(f, path);
}

std::vector<std::pair<std::string, std::string>> manifest(const ScenarioConfig& c)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, k] : keys()) out.emplace_back(name, k.get(c));
    return out;
}

void write_manifest(std::ostream& os, const ScenarioConfig& c)
{
    for (const auto& [k, v] : manifest(c)) os << k << " = " << v << '\n';
}

}  // namespace tsl::cli
