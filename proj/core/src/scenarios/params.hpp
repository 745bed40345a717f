#pragma once

#include <set>
#include <string>
#include <vector>

#include "safectl/config.hpp"
#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

namespace safectl::detail {

/// Override consumption with unknown-key detection. Every scenario builder
/// reads its keys through one of these and calls finish(), so a misspelled
/// override fails loudly with a suggestion instead of being ignored.
class ParamReader {
public:
    explicit ParamReader(const ParamMap& overrides) : overrides_(overrides) {}

    double get(const std::string& key, double fallback) {
        keys_.push_back(key);
        const auto it = overrides_.find(key);
        if (it == overrides_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    const std::vector<std::string>& keys() const { return keys_; }

    void finish() const {
        for (const auto& [key, value] : overrides_) {
            (void)value;
            if (consumed_.count(key)) continue;
            std::string msg = "unknown scenario parameter '" + key + "'";
            const std::string suggestion = nearest_key(key, keys_);
            if (!suggestion.empty()) msg += " (did you mean '" + suggestion + "'?)";
            throw ParseError(msg);
        }
    }

private:
    const ParamMap& overrides_;
    std::vector<std::string> keys_;
    std::set<std::string> consumed_;
};

}  // namespace safectl::detail
