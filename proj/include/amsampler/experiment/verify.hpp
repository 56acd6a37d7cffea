#pragma once

#include "amsampler/sde_checks.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace amsampler::experiment {

struct CheckResult {
    std::string name;
    std::string invariant;
    bool passed = false;
    bool gating = true;  // non-gating rows are reported but never fail the run
    double observed = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyOptions {
    // Replaces the spherical (a, b) with (1, 1) inside the constraint check.
    bool corrupt_a_rule = false;
    std::uint64_t seed = 20240601;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    std::vector<DriftConsistencyRow> drift_table;
    bool corrupt_a_rule = false;

    bool passed() const;
    nlohmann::ordered_json to_json() const;
};

VerifyReport run_verify(const VerifyOptions& options = {});

}  // namespace amsampler::experiment
