#include "safectl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"
#include "safectl/sim.hpp"

namespace safectl {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
    if (k.empty() || !std::islower(static_cast<unsigned char>(k[0]))) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c)) ||
               std::isdigit(static_cast<unsigned char>(c)) || c == '_';
    });
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ParseError("config line " + std::to_string(line) + ": " + msg);
}

double number(const std::string& s, int line) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(line, "expected a number, got '" + s + "'");
    }
}

std::vector<double> number_list(const std::string& s, int line) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(trim(item), line));
    if (out.empty()) fail(line, "expected a comma-separated number list");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::vector<std::string> kRunKeys = {"ctrl_dt", "duration", "sim_substeps",
                                           "seed", "x0", "out"};
const std::vector<std::string> kSweepKeys = {"param", "values"};

[[noreturn]] void unknown_key(int line, const std::string& key,
                              const std::vector<std::string>& valid) {
    std::string msg = "unknown key '" + key + "'";
    const std::string near = nearest_key(key, valid);
    if (!near.empty()) msg += " (did you mean '" + near + "'?)";
    fail(line, msg);
}

}  // namespace

int edit_distance(const std::string& a, const std::string& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates) {
    std::string best;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& c : candidates) {
        const int d = edit_distance(key, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

CliConfig parse_config(const std::string& text) {
    CliConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (const size_t hash = line.find('#'); hash != std::string::npos) {
            line = trim(line.substr(0, hash));
        }
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scenario" && section != "run" && section != "sweep") {
                fail(line_no, "unknown section '" + section +
                                  "' (expected scenario, run, or sweep)");
            }
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) fail(line_no, "bad key '" + key + "' (lowercase snake_case)");
        if (value.empty()) fail(line_no, "empty value for '" + key + "'");
        if (section.empty()) fail(line_no, "key outside any [section]");

        if (section == "scenario") {
            if (key == "name") {
                cfg.scenario = value;
            } else if (key == "controller") {
                cfg.controller = value;
            } else {
                cfg.scenario_params[key] = number(value, line_no);
            }
        } else if (section == "run") {
            if (key == "ctrl_dt") {
                cfg.ctrl_dt = number(value, line_no);
            } else if (key == "duration") {
                cfg.duration = number(value, line_no);
            } else if (key == "sim_substeps") {
                cfg.sim_substeps = static_cast<int>(number(value, line_no));
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(number(value, line_no));
            } else if (key == "x0") {
                cfg.x0 = number_list(value, line_no);
            } else if (key == "out") {
                cfg.out_dir = value;
            } else {
                unknown_key(line_no, key, kRunKeys);
            }
        } else {  // sweep
            if (!cfg.sweep) cfg.sweep.emplace();
            if (key == "param") {
                cfg.sweep->param = value;
            } else if (key == "values") {
                cfg.sweep->values = number_list(value, line_no);
            } else {
                unknown_key(line_no, key, kSweepKeys);
            }
        }
    }
    return cfg;
}

std::string serialize_config(const CliConfig& cfg) {
    std::ostringstream os;
    os << "[scenario]\n";
    os << "name = " << cfg.scenario << "\n";
    os << "controller = " << cfg.controller << "\n";
    for (const auto& [key, value] : cfg.scenario_params) {
        os << key << " = " << fmt(value) << "\n";
    }
    os << "\n[run]\n";
    if (cfg.ctrl_dt) os << "ctrl_dt = " << fmt(*cfg.ctrl_dt) << "\n";
    if (cfg.duration) os << "duration = " << fmt(*cfg.duration) << "\n";
    if (cfg.sim_substeps) os << "sim_substeps = " << *cfg.sim_substeps << "\n";
    if (cfg.seed) os << "seed = " << *cfg.seed << "\n";
    if (cfg.x0) {
        os << "x0 = ";
        for (size_t i = 0; i < cfg.x0->size(); ++i) {
            if (i) os << ", ";
            os << fmt((*cfg.x0)[i]);
        }
        os << "\n";
    }
    os << "out = " << cfg.out_dir << "\n";
    if (cfg.sweep) {
        os << "\n[sweep]\n";
        os << "param = " << cfg.sweep->param << "\n";
        os << "values = ";
        for (size_t i = 0; i < cfg.sweep->values.size(); ++i) {
            if (i) os << ", ";
            os << fmt(cfg.sweep->values[i]);
        }
        os << "\n";
    }
    return os.str();
}

void validate_config(const CliConfig& cfg) {
    if (cfg.scenario.empty()) {
        throw ParseError("no scenario named; use [scenario] name = ... or --scenario");
    }
    controller_from_string(cfg.controller);
    const Scenario sc = make_scenario(cfg.scenario, cfg.scenario_params);
    if (cfg.x0 && static_cast<int>(cfg.x0->size()) != sc.sys.n) {
        throw ParseError("x0 has " + std::to_string(cfg.x0->size()) +
                         " entries, scenario state dimension is " +
                         std::to_string(sc.sys.n));
    }
    if (cfg.ctrl_dt && !(*cfg.ctrl_dt > 0.0)) throw ParseError("ctrl_dt must be positive");
    if (cfg.duration && !(*cfg.duration > 0.0)) throw ParseError("duration must be positive");
    if (cfg.sim_substeps && *cfg.sim_substeps < 1) {
        throw ParseError("sim_substeps must be >= 1");
    }
    if (cfg.sweep) {
        const auto& keys = sc.param_keys;
        if (std::find(keys.begin(), keys.end(), cfg.sweep->param) == keys.end()) {
            std::string msg = "sweep param '" + cfg.sweep->param +
                              "' is not a parameter of " + cfg.scenario;
            const std::string near = nearest_key(cfg.sweep->param, keys);
            if (!near.empty()) msg += " (did you mean '" + near + "'?)";
            throw ParseError(msg);
        }
        if (cfg.sweep->values.empty()) throw ParseError("sweep has no values");
        for (const double v : cfg.sweep->values) {
            if (!std::isfinite(v)) throw ParseError("sweep values must be finite");
        }
    }
}

}  // namespace safectl
