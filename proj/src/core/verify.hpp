#pragma once

#include "json_io.hpp"

#include <string>
#include <vector>

namespace ilab {

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct VerifyReport {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const;
};

/// Suites: dp-oracle, bounds, reduction, concentration. All seeds are fixed.
const std::vector<std::string>& verify_suites();

/// Throws ParseError on an unknown suite name.
VerifyReport verify(const std::string& suite);

Json to_json(const VerifyReport& report);

} // namespace ilab
