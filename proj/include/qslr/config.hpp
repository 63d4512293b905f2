#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qslr/nss.hpp"
#include "qslr/solvers.hpp"

namespace qslr {

enum class Representation { Quaternion, RgbChannelwise };

struct CropSpec {
    std::size_t row = 0, col = 0, height = 0, width = 0;
};

/// Everything a batch run needs; parsed from JSON (strict: unknown keys are
/// rejected), optionally seeded from a named preset, then overridden by
/// command-line flags.
struct ExperimentConfig {
    std::string preset_name;
    std::string input;
    std::string output = ".";
    std::uint64_t seed = 1;
    Representation representation = Representation::Quaternion;
    bool timing_real = true;
    double noise_tau = -1.0; // <0: inherit solver.tau
    double mask_chi = 0.5;
    std::string mask_path; // when set, wins over mask_chi
    std::optional<CropSpec> crop;
    bool nss_enabled = false;
    NssConfig nss;
    SolverConfig solver;

    double effective_noise_tau() const {
        return noise_tau >= 0.0 ? noise_tau : solver.tau;
    }
};

/// Named parameter bundles covering the experiment grids: denoise-tau{10,30,50},
/// denoise-nss-tau{10,30,50}, inpaint-nf{1,2,3}.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base = {});

} // namespace qslr
