#include "qslr/nss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "qslr/errors.hpp"
#include "qslr/kernels.hpp"

namespace qslr {

void NssConfig::validate(std::size_t rows, std::size_t cols) const {
    if (patch_side <= 0) throw ConfigError("nss: patch_side must be > 0");
    if (num_neighbors < 1) throw ConfigError("nss: num_neighbors must be >= 1");
    if (search_window < patch_side)
        throw ConfigError("nss: search window smaller than patch");
    if (static_cast<std::size_t>(patch_side) > rows ||
        static_cast<std::size_t>(patch_side) > cols)
        throw ConfigError("nss: image smaller than patch");
    if (outer_passes < 1) throw ConfigError("nss: outer_passes must be >= 1");
    if (effective_stride() <= 0) throw ConfigError("nss: stride must be > 0");
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QSLR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<int> anchor_positions(std::size_t extent, int patch, int stride) {
    const int last = static_cast<int>(extent) - patch;
    std::vector<int> pos;
    for (int p = 0; p <= last; p += stride) pos.push_back(p);
    if (pos.empty() || pos.back() != last) pos.push_back(last);
    return pos;
}

namespace {

// Squared quaternion Frobenius distance between two patches, rows summed via
// the ssd kernel (plane rows are contiguous).
double patch_dist_sq(const QMatrix& img, int r1, int c1, int r2, int c2,
                     int patch) {
    const std::size_t cols = img.cols();
    double total = 0.0;
    for (int p = 0; p < 4; ++p) {
        const double* plane = img.plane(p);
        for (int i = 0; i < patch; ++i) {
            const double* a = plane + (r1 + i) * cols + c1;
            const double* b = plane + (r2 + i) * cols + c2;
            total += kernels::ssd(a, b, static_cast<std::size_t>(patch));
        }
    }
    return total;
}

double patch_mean(const QMatrix& img, int plane, int r, int c, int patch) {
    const std::size_t cols = img.cols();
    const double* pl = img.plane(plane);
    double s = 0.0;
    for (int i = 0; i < patch; ++i)
        for (int j = 0; j < patch; ++j) s += pl[(r + i) * cols + (c + j)];
    return s / (patch * patch);
}

double patch_dist_sq_mean_removed(const QMatrix& img, int r1, int c1, int r2,
                                  int c2, int patch) {
    double total = 0.0;
    const std::size_t cols = img.cols();
    for (int p = 0; p < 4; ++p) {
        const double m1 = patch_mean(img, p, r1, c1, patch);
        const double m2 = patch_mean(img, p, r2, c2, patch);
        const double* pl = img.plane(p);
        for (int i = 0; i < patch; ++i)
            for (int j = 0; j < patch; ++j) {
                const double d = (pl[(r1 + i) * cols + (c1 + j)] - m1) -
                                 (pl[(r2 + i) * cols + (c2 + j)] - m2);
                total += d * d;
            }
    }
    return total;
}

// Column-stacked patch -> column `col` of the group matrix.
void copy_patch_to_column(const QMatrix& img, int r, int c, int patch,
                          QMatrix& group, std::size_t col) {
    const std::size_t cols = img.cols();
    for (int p = 0; p < 4; ++p) {
        const double* src = img.plane(p);
        double* dst = group.plane(p);
        std::size_t row = 0;
        for (int j = 0; j < patch; ++j)
            for (int i = 0; i < patch; ++i, ++row)
                dst[row * group.cols() + col] = src[(r + i) * cols + (c + j)];
    }
}

void add_column_to_patch(const QMatrix& group, std::size_t col, int r, int c,
                         int patch, QMatrix& accum, std::vector<double>& count) {
    const std::size_t cols = accum.cols();
    for (int p = 0; p < 4; ++p) {
        const double* src = group.plane(p);
        double* dst = accum.plane(p);
        std::size_t row = 0;
        for (int j = 0; j < patch; ++j)
            for (int i = 0; i < patch; ++i, ++row)
                dst[(r + i) * cols + (c + j)] += src[row * group.cols() + col];
    }
    for (int j = 0; j < patch; ++j)
        for (int i = 0; i < patch; ++i) count[(r + i) * cols + (c + j)] += 1.0;
}

} // namespace

std::vector<PatchGroup> extract_and_match(const QMatrix& image,
                                          const NssConfig& cfg) {
    cfg.validate(image.rows(), image.cols());
    const int patch = cfg.patch_side;
    const int stride = cfg.effective_stride();
    const int rows_last = static_cast<int>(image.rows()) - patch;
    const int cols_last = static_cast<int>(image.cols()) - patch;
    const int span = cfg.search_window - patch; // candidate offsets per axis
    const int h_lo = span / 2;

    const std::vector<int> anchors_r =
        anchor_positions(image.rows(), patch, stride);
    const std::vector<int> anchors_c =
        anchor_positions(image.cols(), patch, stride);

    std::vector<PatchGroup> groups;
    groups.reserve(anchors_r.size() * anchors_c.size());

    struct Candidate {
        double dist;
        int index; // raster order inside the window, for deterministic ties
        int r, c;
    };
    std::vector<Candidate> cands;

    for (int ar : anchors_r) {
        for (int ac : anchors_c) {
            // Slide the window inside the image so the candidate pool keeps
            // its full size near the borders.
            const int wr = std::clamp(ar - h_lo, 0, std::max(0, rows_last - span));
            const int wc = std::clamp(ac - h_lo, 0, std::max(0, cols_last - span));
            const int wr_end = std::min(wr + span, rows_last);
            const int wc_end = std::min(wc + span, cols_last);

            cands.clear();
            int index = 0;
            for (int r = wr; r <= wr_end; ++r) {
                for (int c = wc; c <= wc_end; ++c, ++index) {
                    if (r == ar && c == ac) continue; // anchor is member 0
                    const double d =
                        cfg.mean_removal
                            ? patch_dist_sq_mean_removed(image, ar, ac, r, c, patch)
                            : patch_dist_sq(image, ar, ac, r, c, patch);
                    cands.push_back({d, index, r, c});
                }
            }
            const int want = cfg.num_neighbors - 1;
            if (static_cast<int>(cands.size()) < want)
                throw ConfigError(
                    "nss: search window holds fewer candidates than "
                    "num_neighbors");
            std::partial_sort(cands.begin(), cands.begin() + want, cands.end(),
                              [](const Candidate& a, const Candidate& b) {
                                  if (a.dist != b.dist) return a.dist < b.dist;
                                  return a.index < b.index;
                              });

            PatchGroup g;
            g.anchor_pos = {ar, ac};
            g.member_positions.reserve(cfg.num_neighbors);
            g.member_positions.emplace_back(ar, ac);
            for (int i = 0; i < want; ++i)
                g.member_positions.emplace_back(cands[i].r, cands[i].c);
            g.matrix = QMatrix(static_cast<std::size_t>(patch) * patch,
                               static_cast<std::size_t>(cfg.num_neighbors));
            for (std::size_t m = 0; m < g.member_positions.size(); ++m)
                copy_patch_to_column(image, g.member_positions[m].first,
                                     g.member_positions[m].second, patch,
                                     g.matrix, m);
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

std::vector<QMatrix> denoise_groups(const std::vector<PatchGroup>& groups,
                                    const SolverConfig& solver,
                                    const NssConfig& cfg,
                                    GroupDenoiseReport* report) {
    if (groups.empty()) throw ConfigError("denoise_groups: no groups");
    std::vector<QMatrix> out(groups.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> diverged{0};
    const int workers = std::min<int>(resolve_threads(cfg.threads),
                                      static_cast<int>(groups.size()));

    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= groups.size()) return;
            try {
                out[i] = pl_admm_denoise(groups[i].matrix, solver).X;
            } catch (const DivergenceError&) {
                out[i] = groups[i].matrix; // pass through, count it
                diverged.fetch_add(1);
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (report) report->diverged = diverged.load();
    return out;
}

QMatrix aggregate(const std::vector<QMatrix>& groups_out,
                  const std::vector<PatchGroup>& groups, const QMatrix& base) {
    if (groups_out.size() != groups.size())
        throw ShapeError("aggregate: group count mismatch");
    QMatrix accum(base.rows(), base.cols());
    std::vector<double> count(base.plane_size(), 0.0);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const PatchGroup& g = groups[gi];
        const int patch = static_cast<int>(std::lround(
            std::sqrt(static_cast<double>(g.matrix.rows()))));
        if (static_cast<std::size_t>(patch) * patch != g.matrix.rows())
            throw ShapeError("aggregate: group rows are not a square patch");
        for (std::size_t m = 0; m < g.member_positions.size(); ++m) {
            const auto [r, c] = g.member_positions[m];
            if (r < 0 || c < 0 ||
                static_cast<std::size_t>(r) + patch > base.rows() ||
                static_cast<std::size_t>(c) + patch > base.cols())
                throw ShapeError("aggregate: member position out of bounds");
            add_column_to_patch(groups_out[gi], m, r, c, patch, accum, count);
        }
    }
    QMatrix result = base;
    for (int p = 0; p < 4; ++p) {
        double* dst = result.plane(p);
        const double* src = accum.plane(p);
        for (std::size_t i = 0; i < result.plane_size(); ++i)
            if (count[i] > 0.0) dst[i] = src[i] / count[i];
    }
    return result;
}

QMatrix nss_denoise(const QMatrix& Y, const SolverConfig& solver,
                    const NssConfig& cfg, GroupDenoiseReport* report) {
    cfg.validate(Y.rows(), Y.cols());
    QMatrix X = Y;
    GroupDenoiseReport total;
    for (int pass = 0; pass < cfg.outer_passes; ++pass) {
        // Iterative regularization: feed back a fraction of the residual
        // noise before re-grouping.
        const QMatrix Yt = lincomb(1.0 - cfg.relaxation, X, cfg.relaxation, Y);
        const auto groups = extract_and_match(Yt, cfg);
        GroupDenoiseReport pass_report;
        const auto restored = denoise_groups(groups, solver, cfg, &pass_report);
        total.diverged += pass_report.diverged;
        X = aggregate(restored, groups, Yt);
    }
    if (report) *report = total;
    return X;
}

} // namespace qslr
