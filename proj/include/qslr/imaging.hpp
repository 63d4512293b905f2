#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qslr/qmatrix.hpp"

namespace qslr {

/// RGB image with channels in [0,1].
struct ColorImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> r, g, b;

    ColorImage() = default;
    ColorImage(std::size_t rows_, std::size_t cols_)
        : rows(rows_), cols(cols_), r(rows_ * cols_, 0.0),
          g(rows_ * cols_, 0.0), b(rows_ * cols_, 0.0) {}

    std::size_t pixels() const { return rows * cols; }
    bool same_shape(const ColorImage& o) const {
        return rows == o.rows && cols == o.cols;
    }
    ColorImage crop(std::size_t r0, std::size_t c0, std::size_t h,
                    std::size_t w) const;
};

/// Set of observed pixel indices; observed[i] is 1 where the pixel is kept.
struct ObservationMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> observed;

    ObservationMask() = default;
    ObservationMask(std::size_t rows_, std::size_t cols_, std::uint8_t fill = 1)
        : rows(rows_), cols(cols_), observed(rows_ * cols_, fill) {}

    double observed_fraction() const;
    /// Mask as a real plane of 0/1 values (used by the solver kernels).
    std::vector<double> as_plane() const;
};

/// Pure-quaternion encoding: (R,G,B) -> (x,y,z) planes, w = 0.
QMatrix encode(const ColorImage& img);

/// Drops the w plane (after checking it is negligible next to the imaginary
/// planes) and clamps the channels to [0,1].
ColorImage decode(const QMatrix& Q);

/// Adds iid Gaussian noise of standard deviation tau/255 to the three
/// imaginary planes (tau is quoted on the 0-255 scale); the w plane stays
/// zero so the matrix remains pure. Deterministic per seed.
QMatrix add_gaussian_noise(const QMatrix& Q, double tau, std::uint64_t seed);

/// Each pixel is observed independently with probability 1-chi (chi is the
/// missing rate). Deterministic per seed.
ObservationMask sample_mask(std::size_t rows, std::size_t cols, double chi,
                            std::uint64_t seed);

/// P_Omega: zero out unobserved entries (all four planes).
QMatrix apply_mask(const QMatrix& Q, const ObservationMask& mask);

/// 10*log10(1/MSE) on [0,1] data over all pixels and channels; +inf for
/// identical images. metrics_psnr_cap clamps it for file output.
double psnr(const ColorImage& a, const ColorImage& b);
constexpr double metrics_psnr_cap = 99.0;

/// PSNR restricted to masked-out (unobserved) pixels.
double psnr_unobserved(const ColorImage& a, const ColorImage& b,
                       const ObservationMask& mask);

/// Single-scale SSIM: 11x11 Gaussian window, sigma 1.5, C1=(0.01)^2,
/// C2=(0.03)^2 on [0,1] data, valid-window sums, averaged over channels.
double ssim(const ColorImage& a, const ColorImage& b);

/// Readers/writers: binary PPM (P6) and 8-bit PNG (16-bit depth rejected).
ColorImage load_image(const std::string& path);
void save_image(const std::string& path, const ColorImage& img);

/// Mask files: 8-bit grayscale PNG (255 = observed) or a run-length text
/// format: "QMASK rows cols" then run lengths alternating observed-first.
ObservationMask load_mask(const std::string& path);
void save_mask_png(const std::string& path, const ObservationMask& mask);
void save_mask_rle(const std::string& path, const ObservationMask& mask);

} // namespace qslr
