#include <functional>
#include <map>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

namespace safectl {

namespace {

using Builder = std::function<Scenario(const ParamMap&)>;

const std::map<std::string, Builder>& registry() {
    static const std::map<std::string, Builder> reg = {
        {"acc_lk", make_acc_lk},
        {"stones", make_stones},
        {"segway_lite", make_segway_lite},
        {"segway_backup", make_segway_backup},
        {"backup_brake", make_backup_brake},
    };
    return reg;
}

}  // namespace

std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, builder] : registry()) {
        (void)builder;
        names.push_back(name);
    }
    return names;
}

Scenario make_scenario(const std::string& name, const ParamMap& overrides) {
    const auto it = registry().find(name);
    if (it == registry().end()) {
        std::string msg = "unknown scenario '" + name + "'; registered:";
        for (const auto& n : scenario_names()) msg += " " + n;
        throw UnknownScenario(msg);
    }
    return it->second(overrides);
}

std::vector<std::string> scenario_param_keys(const std::string& name) {
    return make_scenario(name).param_keys;
}

}  // namespace safectl
