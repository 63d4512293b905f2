#pragma once

#include <string>
#include <vector>

#include "qslr/config.hpp"
#include "qslr/imaging.hpp"

namespace qslr {

/// Exit codes: 0 success, 1 solver failure, 2 config error, 3 I/O error.
enum ExitCode {
    kExitOk = 0,
    kExitSolver = 1,
    kExitConfig = 2,
    kExitIo = 3,
};

/// Entry point behind the qslr binary; usable directly from tests.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

struct RunArtifacts {
    ColorImage restored;
    double psnr_value = 0.0;
    double ssim_value = 0.0;
    int iters = 0;
};

/// Batch pipelines (throw on failure; run_cli maps exceptions to exit codes).
RunArtifacts run_denoise(const ExperimentConfig& cfg);
RunArtifacts run_inpaint(const ExperimentConfig& cfg);

} // namespace qslr
