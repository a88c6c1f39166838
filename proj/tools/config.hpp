#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tsl/building_blocks.hpp"
#include "tsl/smooth_fields.hpp"

namespace tsl::cli {

struct ScenarioConfig {
    std::string scenario = "default";
    int lambda = 0;
    std::vector<int> q{1, 2, 3};
    int q_max_truncation = 4;
    std::vector<int> lambdas{2, 3, 4, 5, 6};  ///< Lp ladder
    int p = 1;
    int k_min = 4;
    int k_max = 256;
    double window = -1;  ///< radius of B in the k selection; negative means 2^q
    double slack = 0.1;
    std::string w_profile = "swirl";
    double w_strength = 1.0;
    std::string w_envelope = "constant";
    double w_eps = 0.0;
    double w_freq = 1.0;
    int reflection_sign = -1;
    std::string orientation = "counterclockwise";
    bool time_mollify_b = true;
    int residual_level = 8;
    std::vector<int> fv_levels{5, 6, 7};
    double cfl = 0.45;
    int n_samples = 8192;
    int lp_ny = 4096;
    int lp_nt = 512;
    int points = 100;
    int pairing_n = 128;
    unsigned seed = 1;
    bool svg = false;
    std::string out;

    ExactOptions exact() const;
    SmoothFieldDef w() const;
};

/// Applies one "key = value" assignment; unknown keys and malformed values throw ConfigError and
/// leave the config unchanged.
void set_key(ScenarioConfig& c, const std::string& key, const std::string& value);

/// Plain-text config: one assignment per line, '#' starts a comment.
ScenarioConfig parse_config(std::istream& is, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

/// Every key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> manifest(const ScenarioConfig& c);
void write_manifest(std::ostream& os, const ScenarioConfig& c);

}  // namespace tsl::cli
