#include "qslr/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "qslr/errors.hpp"
#include "qslr/kernels.hpp"
#include "qslr/rng.hpp"

namespace qslr {

ColorImage ColorImage::crop(std::size_t r0, std::size_t c0, std::size_t h,
                            std::size_t w) const {
    if (r0 + h > rows || c0 + w > cols)
        throw ShapeError("ColorImage::crop: region out of bounds");
    ColorImage out(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t src = (r0 + i) * cols + (c0 + j);
            const std::size_t dst = i * w + j;
            out.r[dst] = r[src];
            out.g[dst] = g[src];
            out.b[dst] = b[src];
        }
    }
    return out;
}

double ObservationMask::observed_fraction() const {
    if (observed.empty()) return 0.0;
    std::size_t count = 0;
    for (auto v : observed) count += (v != 0);
    return static_cast<double>(count) / static_cast<double>(observed.size());
}

std::vector<double> ObservationMask::as_plane() const {
    std::vector<double> plane(observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i)
        plane[i] = observed[i] ? 1.0 : 0.0;
    return plane;
}

QMatrix encode(const ColorImage& img) {
    QMatrix Q(img.rows, img.cols);
    std::copy(img.r.begin(), img.r.end(), Q.plane(1));
    std::copy(img.g.begin(), img.g.end(), Q.plane(2));
    std::copy(img.b.begin(), img.b.end(), Q.plane(3));
    return Q;
}

ColorImage decode(const QMatrix& Q) {
    const std::size_t n = Q.plane_size();
    // Restored iterates acquire a small real part through the spectral steps;
    // dropping it is part of the decoding. A real part comparable to the
    // imaginary planes means the input was never an encoded image.
    const double w_norm_sq = kernels::dot(Q.plane(0), Q.plane(0), n);
    double rest_norm_sq = 0.0;
    for (int p = 1; p < 4; ++p)
        rest_norm_sq += kernels::dot(Q.plane(p), Q.plane(p), n);
    if (w_norm_sq > 0.25 * std::max(rest_norm_sq, 1e-300))
        throw DomainError("decode: real plane too large; not an encoded image");
    ColorImage img(Q.rows(), Q.cols());
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    const double* x = Q.plane(1);
    const double* y = Q.plane(2);
    const double* z = Q.plane(3);
    for (std::size_t i = 0; i < n; ++i) {
        img.r[i] = clamp01(x[i]);
        img.g[i] = clamp01(y[i]);
        img.b[i] = clamp01(z[i]);
    }
    return img;
}

QMatrix add_gaussian_noise(const QMatrix& Q, double tau, std::uint64_t seed) {
    if (tau < 0.0) throw DomainError("add_gaussian_noise: tau must be >= 0");
    QMatrix out = Q;
    if (tau == 0.0) return out;
    Rng rng(seed);
    const double sd = tau / 255.0;
    const std::size_t n = out.plane_size();
    for (int p = 1; p < 4; ++p) {
        double* plane = out.plane(p);
        for (std::size_t i = 0; i < n; ++i) plane[i] += sd * rng.normal();
    }
    return out;
}

ObservationMask sample_mask(std::size_t rows, std::size_t cols, double chi,
                            std::uint64_t seed) {
    if (chi < 0.0 || chi > 1.0)
        throw DomainError("sample_mask: chi must lie in [0,1]");
    ObservationMask mask(rows, cols, 0);
    Rng rng(seed);
    for (auto& v : mask.observed) v = (rng.uniform() >= chi) ? 1 : 0;
    return mask;
}

QMatrix apply_mask(const QMatrix& Q, const ObservationMask& mask) {
    if (Q.rows() != mask.rows || Q.cols() != mask.cols)
        throw ShapeError("apply_mask: mask/image shape mismatch");
    QMatrix out = Q;
    const std::vector<double> plane = mask.as_plane();
    for (int p = 0; p < 4; ++p)
        kernels::mask_mul(out.plane(p), plane.data(), out.plane_size());
    return out;
}

namespace {

double mse(const ColorImage& a, const ColorImage& b) {
    const std::size_t n = a.pixels();
    double s = kernels::ssd(a.r.data(), b.r.data(), n) +
               kernels::ssd(a.g.data(), b.g.data(), n) +
               kernels::ssd(a.b.data(), b.b.data(), n);
    return s / (3.0 * static_cast<double>(n));
}

} // namespace

double psnr(const ColorImage& a, const ColorImage& b) {
    if (!a.same_shape(b)) throw ShapeError("psnr: shape mismatch");
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

double psnr_unobserved(const ColorImage& a, const ColorImage& b,
                       const ObservationMask& mask) {
    if (!a.same_shape(b) || a.rows != mask.rows || a.cols != mask.cols)
        throw ShapeError("psnr_unobserved: shape mismatch");
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.pixels(); ++i) {
        if (mask.observed[i]) continue;
        const double dr = a.r[i] - b.r[i];
        const double dg = a.g[i] - b.g[i];
        const double db = a.b[i] - b.b[i];
        s += dr * dr + dg * dg + db * db;
        ++count;
    }
    if (count == 0) return std::numeric_limits<double>::infinity();
    const double m = s / (3.0 * static_cast<double>(count));
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

namespace {

std::vector<double> gaussian_window(int half, double sigma) {
    const int size = 2 * half + 1;
    std::vector<double> w(static_cast<std::size_t>(size) * size);
    double total = 0.0;
    for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
            const double v = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
            w[static_cast<std::size_t>(i + half) * size + (j + half)] = v;
            total += v;
        }
    }
    for (auto& v : w) v /= total;
    return w;
}

double ssim_channel(const std::vector<double>& a, const std::vector<double>& b,
                    std::size_t rows, std::size_t cols) {
    constexpr int kHalf = 5; // 11x11 window
    constexpr double kSigma = 1.5;
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    static const std::vector<double> window = gaussian_window(kHalf, kSigma);
    const int size = 2 * kHalf + 1;
    if (rows < static_cast<std::size_t>(size) ||
        cols < static_cast<std::size_t>(size))
        throw ShapeError("ssim: image smaller than the 11x11 window");

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = kHalf; i + kHalf < rows; ++i) {
        for (std::size_t j = kHalf; j + kHalf < cols; ++j) {
            double ma = 0.0, mb = 0.0;
            std::size_t wi = 0;
            for (int di = -kHalf; di <= kHalf; ++di)
                for (int dj = -kHalf; dj <= kHalf; ++dj, ++wi) {
                    const std::size_t off = (i + di) * cols + (j + dj);
                    ma += window[wi] * a[off];
                    mb += window[wi] * b[off];
                }
            double va = 0.0, vb = 0.0, cov = 0.0;
            wi = 0;
            for (int di = -kHalf; di <= kHalf; ++di)
                for (int dj = -kHalf; dj <= kHalf; ++dj, ++wi) {
                    const std::size_t off = (i + di) * cols + (j + dj);
                    const double da = a[off] - ma;
                    const double db = b[off] - mb;
                    va += window[wi] * da * da;
                    vb += window[wi] * db * db;
                    cov += window[wi] * da * db;
                }
            const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace

double ssim(const ColorImage& a, const ColorImage& b) {
    if (!a.same_shape(b)) throw ShapeError("ssim: shape mismatch");
    const double sr = ssim_channel(a.r, b.r, a.rows, a.cols);
    const double sg = ssim_channel(a.g, b.g, a.rows, a.cols);
    const double sb = ssim_channel(a.b, b.b, a.rows, a.cols);
    return (sr + sg + sb) / 3.0;
}

namespace {

int quantize(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::floor(clamped * 255.0 + 0.5));
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ColorImage load_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_image: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P6") throw IoError("load_image: not a P6 PPM: " + path);
    auto next_token = [&is, &path]() -> long {
        // Skip whitespace and '#' comments between header tokens.
        while (true) {
            const int c = is.peek();
            if (c == '#') {
                std::string line;
                std::getline(is, line);
            } else if (std::isspace(c)) {
                is.get();
            } else {
                break;
            }
        }
        long v = -1;
        is >> v;
        if (!is) throw IoError("load_image: malformed PPM header: " + path);
        return v;
    };
    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width <= 0 || height <= 0)
        throw IoError("load_image: bad PPM dimensions: " + path);
    if (maxval != 255)
        throw IoError("load_image: only 8-bit PPM supported: " + path);
    is.get(); // single whitespace after maxval
    ColorImage img(static_cast<std::size_t>(height),
                   static_cast<std::size_t>(width));
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
    for (long i = 0; i < height; ++i) {
        is.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size()));
        if (!is) throw IoError("load_image: truncated PPM payload: " + path);
        for (long j = 0; j < width; ++j) {
            const std::size_t off = static_cast<std::size_t>(i) * width + j;
            img.r[off] = row[3 * j] / 255.0;
            img.g[off] = row[3 * j + 1] / 255.0;
            img.b[off] = row[3 * j + 2] / 255.0;
        }
    }
    return img;
}

void save_ppm(const std::string& path, const ColorImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_image: cannot open " + path);
    os << "P6\n" << img.cols << " " << img.rows << "\n255\n";
    std::vector<unsigned char> row(img.cols * 3);
    for (std::size_t i = 0; i < img.rows; ++i) {
        for (std::size_t j = 0; j < img.cols; ++j) {
            const std::size_t off = i * img.cols + j;
            row[3 * j] = static_cast<unsigned char>(quantize(img.r[off]));
            row[3 * j + 1] = static_cast<unsigned char>(quantize(img.g[off]));
            row[3 * j + 2] = static_cast<unsigned char>(quantize(img.b[off]));
        }
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("save_image: write failure: " + path);
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

std::vector<std::vector<png_byte>> read_png_rows(const std::string& path,
                                                 std::size_t& rows,
                                                 std::size_t& cols,
                                                 int& channels) {
    PngReadCloser ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError("load_image: cannot open " + path);
    png_byte header[8];
    if (std::fread(header, 1, 8, ctx.fp) != 8 || png_sig_cmp(header, 0, 8))
        throw IoError("load_image: not a PNG file: " + path);
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                     nullptr);
    if (!ctx.png) throw IoError("load_image: libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("load_image: libpng info init failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw IoError("load_image: corrupt PNG: " + path);
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    if (bit_depth == 16)
        throw IoError("load_image: 16-bit PNG unsupported: " + path);
    png_set_expand(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    rows = png_get_image_height(ctx.png, ctx.info);
    cols = png_get_image_width(ctx.png, ctx.info);
    channels = png_get_channels(ctx.png, ctx.info);
    if (channels != 1 && channels != 3)
        throw IoError("load_image: unsupported PNG channel count: " + path);

    std::vector<std::vector<png_byte>> data(rows);
    std::vector<png_bytep> row_ptrs(rows);
    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    for (std::size_t i = 0; i < rows; ++i) {
        data[i].resize(rowbytes);
        row_ptrs[i] = data[i].data();
    }
    png_read_image(ctx.png, row_ptrs.data());
    png_read_end(ctx.png, nullptr);
    return data;
}

ColorImage load_png(const std::string& path) {
    std::size_t rows = 0, cols = 0;
    int channels = 0;
    const auto data = read_png_rows(path, rows, cols, channels);
    ColorImage img(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t off = i * cols + j;
            if (channels == 3) {
                img.r[off] = data[i][3 * j] / 255.0;
                img.g[off] = data[i][3 * j + 1] / 255.0;
                img.b[off] = data[i][3 * j + 2] / 255.0;
            } else {
                const double v = data[i][j] / 255.0;
                img.r[off] = img.g[off] = img.b[off] = v;
            }
        }
    }
    return img;
}

void write_png(const std::string& path, std::size_t rows, std::size_t cols,
               int channels, const std::vector<png_byte>& pixels) {
    PngWriteCloser ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError("save_image: cannot open " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                      nullptr);
    if (!ctx.png) throw IoError("save_image: libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("save_image: libpng info init failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw IoError("save_image: libpng write failure: " + path);
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(cols),
                 static_cast<png_uint_32>(rows), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    std::vector<png_bytep> row_ptrs(rows);
    const std::size_t rowbytes = cols * static_cast<std::size_t>(channels);
    for (std::size_t i = 0; i < rows; ++i)
        row_ptrs[i] = const_cast<png_bytep>(pixels.data() + i * rowbytes);
    png_write_image(ctx.png, row_ptrs.data());
    png_write_end(ctx.png, nullptr);
}

void save_png(const std::string& path, const ColorImage& img) {
    std::vector<png_byte> pixels(img.pixels() * 3);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        pixels[3 * i] = static_cast<png_byte>(quantize(img.r[i]));
        pixels[3 * i + 1] = static_cast<png_byte>(quantize(img.g[i]));
        pixels[3 * i + 2] = static_cast<png_byte>(quantize(img.b[i]));
    }
    write_png(path, img.rows, img.cols, 3, pixels);
}

} // namespace

ColorImage load_image(const std::string& path) {
    if (has_suffix(path, ".ppm")) return load_ppm(path);
    if (has_suffix(path, ".png")) return load_png(path);
    throw IoError("load_image: unsupported format (want .ppm or .png): " + path);
}

void save_image(const std::string& path, const ColorImage& img) {
    if (has_suffix(path, ".ppm")) return save_ppm(path, img);
    if (has_suffix(path, ".png")) return save_png(path, img);
    throw IoError("save_image: unsupported format (want .ppm or .png): " + path);
}

ObservationMask load_mask(const std::string& path) {
    if (has_suffix(path, ".png")) {
        std::size_t rows = 0, cols = 0;
        int channels = 0;
        const auto data = read_png_rows(path, rows, cols, channels);
        ObservationMask mask(rows, cols, 0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                const png_byte v = channels == 3 ? data[i][3 * j] : data[i][j];
                mask.observed[i * cols + j] = (v >= 128) ? 1 : 0;
            }
        return mask;
    }
    std::ifstream is(path);
    if (!is) throw IoError("load_mask: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "QMASK") throw IoError("load_mask: bad header in " + path);
    std::size_t rows = 0, cols = 0;
    is >> rows >> cols;
    if (!is || rows == 0 || cols == 0)
        throw IoError("load_mask: bad dimensions in " + path);
    ObservationMask mask(rows, cols, 0);
    std::size_t pos = 0;
    std::uint8_t value = 1; // runs alternate starting with observed
    std::size_t run = 0;
    while (is >> run) {
        if (pos + run > mask.observed.size())
            throw IoError("load_mask: runs exceed mask size in " + path);
        std::fill_n(mask.observed.begin() + pos, run, value);
        pos += run;
        value = value ? 0 : 1;
    }
    if (pos != mask.observed.size())
        throw IoError("load_mask: runs do not cover mask in " + path);
    return mask;
}

void save_mask_png(const std::string& path, const ObservationMask& mask) {
    std::vector<png_byte> pixels(mask.observed.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = mask.observed[i] ? 255 : 0;
    write_png(path, mask.rows, mask.cols, 1, pixels);
}

void save_mask_rle(const std::string& path, const ObservationMask& mask) {
    std::ofstream os(path);
    if (!os) throw IoError("save_mask_rle: cannot open " + path);
    os << "QMASK " << mask.rows << " " << mask.cols << "\n";
    std::uint8_t value = 1;
    std::size_t run = 0;
    for (std::size_t i = 0; i < mask.observed.size(); ++i) {
        if (mask.observed[i] == value) {
            ++run;
        } else {
            os << run << "\n";
            value = value ? 0 : 1;
            run = 1;
        }
    }
    os << run << "\n";
    if (!os) throw IoError("save_mask_rle: write failure: " + path);
}

} // namespace qslr
