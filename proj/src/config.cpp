#include "dicsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace dicsim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.begin();
    while (b != s.end() && std::isspace(static_cast<unsigned char>(*b))) ++b;
    auto e = s.end();
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
}

double parse_number(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw ConfigError(ctx + ": expected a number, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw ConfigError(ctx + ": expected an integer, got '" + v + "'");
}

// load accepts a unit suffix selecting the form: "92.16 ohm" or "25 W"
LoadSpec parse_load(const std::string& v, const std::string& ctx) {
    std::string s = trim(v);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto ends_with = [&](const std::string& suf) {
        return lower.size() >= suf.size() &&
               lower.compare(lower.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends_with("ohm")) {
        double x = parse_number(trim(s.substr(0, s.size() - 3)), ctx);
        return LoadSpec::resistance(x);
    }
    if (ends_with("w")) {
        double x = parse_number(trim(s.substr(0, s.size() - 1)), ctx);
        return LoadSpec::power(x);
    }
    throw ConfigError(ctx + ": load needs a unit, e.g. '92.16 ohm' or '25 W'");
}

std::vector<double> parse_list(const std::string& v, const std::string& ctx) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number(item, ctx));
    }
    if (out.empty()) throw ConfigError(ctx + ": empty list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"vin1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.vin1 = parse_number(v, x); }},
        {"vin2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.vin2 = parse_number(v, x); }},
        {"l1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.l1 = parse_number(v, x); }},
        {"l2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.l2 = parse_number(v, x); }},
        {"lm", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.lm = parse_number(v, x); }},
        {"c1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.c1 = parse_number(v, x); }},
        {"c2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.c2 = parse_number(v, x); }},
        {"co", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.co = parse_number(v, x); }},
        {"n1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.turns.n1 = parse_int(v, x); }},
        {"n2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.turns.n2 = parse_int(v, x); }},
        {"n3", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.turns.n3 = parse_int(v, x); }},
        {"fsw", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.fsw = parse_number(v, x); }},
        {"r_src1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.r_src1 = parse_number(v, x); }},
        {"r_src2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.r_src2 = parse_number(v, x); }},
        {"esr_l1", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.esr_l1 = parse_number(v, x); }},
        {"esr_l2", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.esr_l2 = parse_number(v, x); }},
        {"esr_lm", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.esr_lm = parse_number(v, x); }},
        {"v_diode", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.v_diode = parse_number(v, x); }},
        {"k_ovl", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.k_ovl = parse_number(v, x); }},
        {"p_gate", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.p_gate = parse_number(v, x); }},
        {"load", [](RunConfig& c, const std::string& v, const std::string& x) { c.spec.load = parse_load(v, x); }},
        {"d_st", [](RunConfig& c, const std::string& v, const std::string& x) { c.d_st = parse_number(v, x); }},
        {"d_boost", [](RunConfig& c, const std::string& v, const std::string& x) { c.d_boost = parse_number(v, x); }},
        {"loads", [](RunConfig& c, const std::string& v, const std::string& x) { c.loads = parse_list(v, x); }},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, _] : setters()) k.push_back(key);
        return k;
    }();
    return keys;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        std::ostringstream ctx;
        ctx << origin << ":" << lineno;
        if (eq == std::string::npos)
            throw ConfigError(ctx.str() + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError(ctx.str() + ": unknown key '" + key + "'");
        it->second(cfg, value, ctx.str() + " (" + key + ")");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = setters().find(trim(key));
    if (it == setters().end())
        throw ConfigError("unknown override key '" + key + "'");
    it->second(cfg, trim(value), "override " + key);
}

}  // namespace dicsim
