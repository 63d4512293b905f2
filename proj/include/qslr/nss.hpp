#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qslr/qmatrix.hpp"
#include "qslr/solvers.hpp"

namespace qslr {

/// Patch grouping / aggregation parameters. Anchors sit on a stride grid
/// (clamped to the border); each anchor collects its num_neighbors most
/// similar patches inside a search_window x search_window pixel window.
struct NssConfig {
    int patch_side = 12;
    int stride = 0; // 0 -> patch_side / 2
    int num_neighbors = 80;
    int search_window = 30;
    double relaxation = 0.1; // iterative regularization back-off
    int outer_passes = 4;
    /// Subtract each patch's mean before matching (matching only; off by
    /// default).
    bool mean_removal = false;
    int threads = 0; // 0 -> env QSLR_THREADS or hardware concurrency

    int effective_stride() const { return stride > 0 ? stride : patch_side / 2; }
    void validate(std::size_t rows, std::size_t cols) const;
};

struct PatchGroup {
    QMatrix matrix; // d x s, columns are vectorized patches (column stacking)
    std::pair<int, int> anchor_pos;
    std::vector<std::pair<int, int>> member_positions; // member 0 is the anchor
};

/// Anchor grid positions along one axis: multiples of the stride plus the
/// clamped last position extent - patch.
std::vector<int> anchor_positions(std::size_t extent, int patch, int stride);

std::vector<PatchGroup> extract_and_match(const QMatrix& image,
                                          const NssConfig& cfg);

struct GroupDenoiseReport {
    int diverged = 0; // groups passed through unmodified
};

/// Restore each group with the denoising solver (groups run in parallel;
/// output order matches input order).
std::vector<QMatrix> denoise_groups(const std::vector<PatchGroup>& groups,
                                    const SolverConfig& solver,
                                    const NssConfig& cfg,
                                    GroupDenoiseReport* report = nullptr);

/// Uniform-weight aggregation: every pixel is the mean of all patch
/// contributions covering it. Pixels covered by no patch keep base's value.
QMatrix aggregate(const std::vector<QMatrix>& groups_out,
                  const std::vector<PatchGroup>& groups, const QMatrix& base);

/// Full pipeline with iterative regularization:
/// Y_t = X_{t-1} + relaxation * (Y - X_{t-1}), groups of Y_t restored and
/// aggregated into X_t.
QMatrix nss_denoise(const QMatrix& Y, const SolverConfig& solver,
                    const NssConfig& cfg, GroupDenoiseReport* report = nullptr);

/// Worker count: cfg.threads, else env QSLR_THREADS, else hardware.
int resolve_threads(int requested);

} // namespace qslr
