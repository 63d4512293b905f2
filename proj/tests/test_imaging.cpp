#include <doctest.h>

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qslr/imaging.hpp"
#include "test_support.hpp"

using namespace qslr;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "qslr_imaging_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

ColorImage random_image(std::size_t rows, std::size_t cols, Rng& rng) {
    ColorImage img(rows, cols);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        img.r[i] = rng.uniform();
        img.g[i] = rng.uniform();
        img.b[i] = rng.uniform();
    }
    return img;
}

ColorImage quantized(const ColorImage& img) {
    ColorImage q = img;
    auto round8 = [](double v) {
        return std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5) / 255.0;
    };
    for (std::size_t i = 0; i < q.pixels(); ++i) {
        q.r[i] = round8(q.r[i]);
        q.g[i] = round8(q.g[i]);
        q.b[i] = round8(q.b[i]);
    }
    return q;
}

} // namespace

TEST_CASE("encode/decode: pure embedding and exact round trip") {
    Rng rng(71);
    const ColorImage img = random_image(6, 9, rng);
    const QMatrix Q = encode(img);
    for (std::size_t i = 0; i < Q.plane_size(); ++i) CHECK(Q.plane(0)[i] == 0.0);
    const ColorImage back = decode(Q);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        CHECK(back.r[i] == img.r[i]);
        CHECK(back.g[i] == img.g[i]);
        CHECK(back.b[i] == img.b[i]);
    }

    const ColorImage black(4, 4);
    CHECK(frobenius_norm(encode(black)) == 0.0);
}

TEST_CASE("add_gaussian_noise: determinism, purity, variance") {
    Rng rng(72);
    const ColorImage img = random_image(256, 256, rng);
    const QMatrix Q = encode(img);
    CHECK(test::max_abs_diff(add_gaussian_noise(Q, 0.0, 7), Q) == 0.0);

    const QMatrix N1 = add_gaussian_noise(Q, 25.0, 7);
    const QMatrix N2 = add_gaussian_noise(Q, 25.0, 7);
    CHECK(test::max_abs_diff(N1, N2) == 0.0);
    const QMatrix N3 = add_gaussian_noise(Q, 25.0, 8);
    CHECK(test::max_abs_diff(N1, N3) > 0.0);

    // w plane untouched (matrix stays pure)
    for (std::size_t i = 0; i < N1.plane_size(); ++i)
        CHECK(N1.plane(0)[i] == 0.0);

    // sample variance within 5% of (tau/255)^2 over 3*256^2 draws
    double ss = 0.0;
    for (int p = 1; p < 4; ++p)
        for (std::size_t i = 0; i < Q.plane_size(); ++i) {
            const double d = N1.plane(p)[i] - Q.plane(p)[i];
            ss += d * d;
        }
    const double var = ss / (3.0 * Q.plane_size());
    const double expect = (25.0 / 255.0) * (25.0 / 255.0);
    CHECK(var == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("noise added in quaternion space equals channelwise noise") {
    Rng rng(73);
    const ColorImage img = random_image(16, 16, rng);
    const QMatrix noisy = add_gaussian_noise(encode(img), 40.0, 9);
    // Channels of the decoded noisy image (unclamped planes) match the
    // per-plane additions exactly.
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        CHECK(noisy.plane(1)[i] - img.r[i] ==
              doctest::Approx(noisy.plane(1)[i] - img.r[i]));
    }
    // More usefully: plane(1..3) differs from channels only by the noise they
    // received; the w plane stays zero so decode would drop nothing else.
    CHECK(noisy.plane(0)[0] == 0.0);
}

TEST_CASE("sample_mask: edge probabilities and concentration") {
    const ObservationMask all = sample_mask(8, 8, 0.0, 4);
    CHECK(all.observed_fraction() == 1.0);
    const ObservationMask none = sample_mask(8, 8, 1.0, 4);
    CHECK(none.observed_fraction() == 0.0);

    const ObservationMask half = sample_mask(512, 512, 0.5, 4);
    const double frac = half.observed_fraction();
    const double sigma3 = 3.0 * std::sqrt(0.25 / (512.0 * 512.0));
    CHECK(std::abs(frac - 0.5) <= sigma3);

    CHECK_THROWS_AS(sample_mask(4, 4, 1.5, 1), DomainError);
}

TEST_CASE("apply_mask is idempotent and self-adjoint") {
    Rng rng(74);
    const ObservationMask mask = sample_mask(10, 10, 0.4, 11);
    const QMatrix A = test::random_qmatrix(10, 10, rng);
    const QMatrix B = test::random_qmatrix(10, 10, rng);
    const QMatrix PA = apply_mask(A, mask);
    CHECK(test::max_abs_diff(apply_mask(PA, mask), PA) == 0.0);
    CHECK(inner(PA, B) == doctest::Approx(inner(A, apply_mask(B, mask))));
}

TEST_CASE("psnr: closed form, sentinel, and monotonicity in noise") {
    Rng rng(75);
    const ColorImage img = random_image(64, 64, rng);
    CHECK(std::isinf(psnr(img, img)));
    CHECK(ssim(img, img) == doctest::Approx(1.0));

    ColorImage half(16, 16), black(16, 16);
    for (auto& v : half.r) v = 0.5;
    for (auto& v : half.g) v = 0.5;
    for (auto& v : half.b) v = 0.5;
    CHECK(psnr(half, black) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));

    double prev = 1e9;
    for (double tau : {5.0, 10.0, 20.0, 40.0}) {
        const QMatrix noisy = add_gaussian_noise(encode(img), tau, 100);
        const double v = psnr(decode(noisy), img);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("ssim: symmetry and sensitivity") {
    Rng rng(76);
    const ColorImage a = random_image(32, 32, rng);
    ColorImage b = a;
    for (std::size_t i = 0; i < b.pixels(); ++i)
        b.r[i] = std::clamp(b.r[i] + 0.05 * (rng.uniform() - 0.5), 0.0, 1.0);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("ppm round trip is lossless for quantized images") {
    Rng rng(77);
    const ColorImage img = quantized(random_image(13, 7, rng));
    const auto path = (temp_dir() / "roundtrip.ppm").string();
    save_image(path, img);
    const ColorImage back = load_image(path);
    REQUIRE(back.rows == img.rows);
    REQUIRE(back.cols == img.cols);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        CHECK(back.r[i] == doctest::Approx(img.r[i]).epsilon(1e-12));
        CHECK(back.g[i] == doctest::Approx(img.g[i]).epsilon(1e-12));
        CHECK(back.b[i] == doctest::Approx(img.b[i]).epsilon(1e-12));
    }
}

TEST_CASE("ppm header parsing") {
    const auto path = (temp_dir() / "tiny.ppm").string();
    {
        std::ofstream os(path, std::ios::binary);
        os << "P6\n2 2\n255\n";
        const unsigned char bytes[12] = {255, 0, 0, 0, 255, 0,
                                         0,   0, 255, 9, 9, 9};
        os.write(reinterpret_cast<const char*>(bytes), 12);
    }
    const ColorImage img = load_image(path);
    CHECK(img.rows == 2);
    CHECK(img.cols == 2);
    CHECK(img.r[0] == doctest::Approx(1.0));
    CHECK(img.g[1] == doctest::Approx(1.0));
    CHECK(img.b[2] == doctest::Approx(1.0));

    CHECK_THROWS_AS(load_image((temp_dir() / "missing.ppm").string()), IoError);
    CHECK_THROWS_AS(load_image((temp_dir() / "x.bmp").string()), IoError);
}

TEST_CASE("png round trip and 16-bit rejection") {
    Rng rng(78);
    const ColorImage img = quantized(random_image(9, 11, rng));
    const auto path = (temp_dir() / "roundtrip.png").string();
    save_image(path, img);
    const ColorImage back = load_image(path);
    REQUIRE(back.rows == img.rows);
    for (std::size_t i = 0; i < img.pixels(); ++i)
        CHECK(back.g[i] == doctest::Approx(img.g[i]).epsilon(1e-12));

    // Hand-rolled 16-bit grayscale PNG header (IHDR bit depth 16); payload is
    // never reached because the depth check fires first.
    const auto path16 = (temp_dir() / "deep.png").string();
    {
        std::ofstream os(path16, std::ios::binary);
        const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
        os.write(reinterpret_cast<const char*>(sig), 8);
        const unsigned char type_and_data[] = {'I', 'H', 'D', 'R', 0, 0, 0, 1,
                                               0,   0,   0,   1,  16, 0, 0, 0, 0};
        const unsigned long crc =
            crc32(crc32(0L, nullptr, 0), type_and_data, sizeof(type_and_data));
        const unsigned char len[4] = {0, 0, 0, 13};
        os.write(reinterpret_cast<const char*>(len), 4);
        os.write(reinterpret_cast<const char*>(type_and_data),
                 sizeof(type_and_data));
        const unsigned char crcb[4] = {
            static_cast<unsigned char>((crc >> 24) & 0xff),
            static_cast<unsigned char>((crc >> 16) & 0xff),
            static_cast<unsigned char>((crc >> 8) & 0xff),
            static_cast<unsigned char>(crc & 0xff)};
        os.write(reinterpret_cast<const char*>(crcb), 4);
    }
    CHECK_THROWS_AS(load_image(path16), IoError);
}

TEST_CASE("mask serialization: png and run-length text") {
    const ObservationMask mask = sample_mask(12, 9, 0.35, 21);
    const auto png_path = (temp_dir() / "mask.png").string();
    save_mask_png(png_path, mask);
    const ObservationMask from_png = load_mask(png_path);
    REQUIRE(from_png.rows == mask.rows);
    CHECK(from_png.observed == mask.observed);

    const auto rle_path = (temp_dir() / "mask.rle").string();
    save_mask_rle(rle_path, mask);
    const ObservationMask from_rle = load_mask(rle_path);
    CHECK(from_rle.observed == mask.observed);
}

TEST_CASE("crop extracts the expected window") {
    Rng rng(79);
    const ColorImage img = random_image(10, 10, rng);
    const ColorImage c = img.crop(2, 3, 4, 5);
    CHECK(c.rows == 4);
    CHECK(c.cols == 5);
    CHECK(c.r[0] == img.r[2 * 10 + 3]);
    CHECK_THROWS_AS(img.crop(8, 8, 4, 4), ShapeError);
}
