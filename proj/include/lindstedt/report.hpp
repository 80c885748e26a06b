#pragma once
// Pass/fail records produced by the verification suites.

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

namespace lindstedt {

struct Check {
    std::string name;      // identity being verified
    double deviation = 0;  // worst observed deviation (already scaled if relative)
    double tolerance = 0;
    bool asserted = true;  // false for diagnostics that are logged only
    std::string detail;

    bool pass() const { return !asserted || deviation <= tolerance; }
};

struct Report {
    std::string suite;
    std::vector<Check> checks;

    void add(std::string name, double dev, double tol, std::string detail = {}, bool asserted = true) {
        checks.push_back({std::move(name), dev, tol, asserted, std::move(detail)});
    }
    bool pass() const {
        for (auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
    /// Worst deviation among asserted checks, relative to their tolerance.
    double worst_ratio() const {
        double w = 0;
        for (auto& c : checks)
            if (c.asserted && c.tolerance > 0) w = std::max(w, c.deviation / c.tolerance);
        return w;
    }
    void merge(const Report& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (auto& c : checks)
            arr.push_back({{"name", c.name}, {"deviation", c.deviation}, {"tolerance", c.tolerance},
                           {"asserted", c.asserted}, {"pass", c.pass()}, {"detail", c.detail}});
        return {{"suite", suite}, {"pass", pass()}, {"checks", arr}};
    }
};

}  // namespace lindstedt
