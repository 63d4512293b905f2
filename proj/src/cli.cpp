#include "qslr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qslr/errors.hpp"
#include "qslr/sha256.hpp"
#include "qslr/solvers.hpp"

namespace qslr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double capped_psnr(double v) { return std::min(v, metrics_psnr_cap); }

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string());
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write failure: " + path.string());
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["config"] = config_to_json(cfg);
    json in = json::object();
    for (const auto& p : inputs) in[p] = sha256_file(p);
    j["inputs"] = in;
    j["outputs"] = outputs;
    write_json_file(fs::path(cfg.output) / "manifest.json", j);
}

ColorImage load_clean(const ExperimentConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("an input image is required");
    ColorImage img = load_image(cfg.input);
    if (cfg.crop)
        img = img.crop(cfg.crop->row, cfg.crop->col, cfg.crop->height,
                       cfg.crop->width);
    return img;
}

// Channelwise ablation arm: each channel rides the w plane of its own
// quaternion matrix and the identical solver runs per channel.
QMatrix channel_to_w(const std::vector<double>& channel, std::size_t rows,
                     std::size_t cols, double scale) {
    QMatrix Q(rows, cols);
    double* w = Q.plane(0);
    for (std::size_t i = 0; i < channel.size(); ++i) w[i] = channel[i] * scale;
    return Q;
}

std::vector<double> w_to_channel(const QMatrix& Q, double scale) {
    std::vector<double> channel(Q.plane_size());
    const double* w = Q.plane(0);
    for (std::size_t i = 0; i < channel.size(); ++i)
        channel[i] = std::clamp(w[i] * scale, 0.0, 1.0);
    return channel;
}

std::vector<double>* channel_of(ColorImage& img, int c) {
    return c == 0 ? &img.r : (c == 1 ? &img.g : &img.b);
}

struct SolveOutput {
    QMatrix X;              // restored, solver scale (0-255)
    IterationTrace trace;   // empty for NSS runs
    int iters = 0;
};

// Pixels are carried on the 0-255 scale through the solver so that the
// published parameter grids (tau, lambda, delta tiers) keep their meaning.
constexpr double kSolverScale = 255.0;

SolveOutput solve_denoise_one(const QMatrix& Y255, const ExperimentConfig& cfg) {
    SolveOutput out;
    if (cfg.nss_enabled) {
        NssConfig nss = cfg.nss;
        nss.threads = resolve_threads(nss.threads);
        out.X = nss_denoise(Y255, cfg.solver, nss);
        out.iters = cfg.nss.outer_passes;
    } else {
        DenoiseResult res = pl_admm_denoise(Y255, cfg.solver);
        out.X = std::move(res.X);
        out.trace = std::move(res.trace);
        out.iters = res.iters;
    }
    return out;
}

} // namespace

RunArtifacts run_denoise(const ExperimentConfig& cfg) {
    const ColorImage clean = load_clean(cfg);
    const double tau = cfg.effective_noise_tau();

    const QMatrix Q01 = encode(clean);
    const QMatrix Qn01 =
        tau > 0.0 ? add_gaussian_noise(Q01, tau, cfg.seed) : Q01;
    const ColorImage noisy = decode(Qn01);

    fs::create_directories(cfg.output);
    std::vector<std::string> outputs;

    const auto t0 = std::chrono::steady_clock::now();
    ColorImage restored(clean.rows, clean.cols);
    int iters = 0;
    if (cfg.representation == Representation::Quaternion) {
        SolveOutput s = solve_denoise_one(Qn01 * kSolverScale, cfg);
        restored = decode(s.X * (1.0 / kSolverScale));
        iters = s.iters;
        if (!s.trace.rows.empty()) {
            if (!cfg.timing_real) s.trace.strip_timing();
            s.trace.write_csv((fs::path(cfg.output) / "trace.csv").string());
            outputs.push_back("trace.csv");
        }
    } else {
        ColorImage noisy_unclamped = noisy; // channels from the same noise draw
        const double* planes[3] = {Qn01.plane(1), Qn01.plane(2), Qn01.plane(3)};
        const char* names[3] = {"trace_r.csv", "trace_g.csv", "trace_b.csv"};
        for (int c = 0; c < 3; ++c) {
            std::vector<double> ch(planes[c], planes[c] + Qn01.plane_size());
            const QMatrix Yc =
                channel_to_w(ch, clean.rows, clean.cols, kSolverScale);
            SolveOutput s = solve_denoise_one(Yc, cfg);
            *channel_of(restored, c) = w_to_channel(s.X, 1.0 / kSolverScale);
            iters = std::max(iters, s.iters);
            if (!s.trace.rows.empty()) {
                if (!cfg.timing_real) s.trace.strip_timing();
                s.trace.write_csv((fs::path(cfg.output) / names[c]).string());
                outputs.push_back(names[c]);
            }
        }
        (void)noisy_unclamped;
    }
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    save_image((fs::path(cfg.output) / "restored.png").string(), restored);
    outputs.push_back("restored.png");
    if (tau > 0.0) {
        save_image((fs::path(cfg.output) / "noisy.png").string(), noisy);
        outputs.push_back("noisy.png");
    }

    RunArtifacts art;
    art.restored = restored;
    art.psnr_value = psnr(restored, clean);
    art.ssim_value = ssim(restored, clean);
    art.iters = iters;

    json metrics;
    metrics["psnr"] = capped_psnr(art.psnr_value);
    metrics["ssim"] = art.ssim_value;
    metrics["iters"] = iters;
    metrics["wall_ms"] = cfg.timing_real ? wall_ms : 0.0;
    metrics["psnr_input"] = capped_psnr(psnr(noisy, clean));
    metrics["ssim_input"] = ssim(noisy, clean);
    write_json_file(fs::path(cfg.output) / "metrics.json", metrics);
    outputs.push_back("metrics.json");

    write_manifest(cfg, "denoise", {cfg.input}, outputs);
    return art;
}

RunArtifacts run_inpaint(const ExperimentConfig& cfg) {
    const ColorImage clean = load_clean(cfg);

    ObservationMask mask;
    std::vector<std::string> inputs = {cfg.input};
    if (!cfg.mask_path.empty()) {
        mask = load_mask(cfg.mask_path);
        inputs.push_back(cfg.mask_path);
    } else {
        mask = sample_mask(clean.rows, clean.cols, cfg.mask_chi, cfg.seed);
    }
    if (mask.rows != clean.rows || mask.cols != clean.cols)
        throw ConfigError("inpaint: mask shape does not match the image");

    const QMatrix Q01 = encode(clean);
    const QMatrix masked01 = apply_mask(Q01, mask);
    const ColorImage zero_fill = decode(masked01);

    fs::create_directories(cfg.output);
    std::vector<std::string> outputs;

    const auto t0 = std::chrono::steady_clock::now();
    ColorImage restored(clean.rows, clean.cols);
    int iters = 0;
    double final_gap = 0.0;
    if (cfg.representation == Representation::Quaternion) {
        InpaintResult res =
            pl_admm_nf_inpaint(Q01 * kSolverScale, mask, cfg.solver);
        restored = decode(res.X * (1.0 / kSolverScale));
        iters = res.iters;
        if (!res.trace.rows.empty())
            final_gap = res.trace.rows.back().gap2 / kSolverScale;
        if (!cfg.timing_real) res.trace.strip_timing();
        res.trace.write_csv((fs::path(cfg.output) / "trace.csv").string());
        outputs.push_back("trace.csv");
    } else {
        const double* planes[3] = {Q01.plane(1), Q01.plane(2), Q01.plane(3)};
        const char* names[3] = {"trace_r.csv", "trace_g.csv", "trace_b.csv"};
        for (int c = 0; c < 3; ++c) {
            std::vector<double> ch(planes[c], planes[c] + Q01.plane_size());
            const QMatrix Yc =
                channel_to_w(ch, clean.rows, clean.cols, kSolverScale);
            InpaintResult res = pl_admm_nf_inpaint(Yc, mask, cfg.solver);
            *channel_of(restored, c) = w_to_channel(res.X, 1.0 / kSolverScale);
            iters = std::max(iters, res.iters);
            if (!res.trace.rows.empty())
                final_gap = std::max(final_gap,
                                     res.trace.rows.back().gap2 / kSolverScale);
            if (!cfg.timing_real) res.trace.strip_timing();
            res.trace.write_csv((fs::path(cfg.output) / names[c]).string());
            outputs.push_back(names[c]);
        }
    }
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    save_image((fs::path(cfg.output) / "restored.png").string(), restored);
    save_image((fs::path(cfg.output) / "masked.png").string(), zero_fill);
    save_mask_png((fs::path(cfg.output) / "mask.png").string(), mask);
    outputs.insert(outputs.end(), {"restored.png", "masked.png", "mask.png"});

    RunArtifacts art;
    art.restored = restored;
    art.psnr_value = psnr(restored, clean);
    art.ssim_value = ssim(restored, clean);
    art.iters = iters;

    json metrics;
    metrics["psnr"] = capped_psnr(art.psnr_value);
    metrics["ssim"] = art.ssim_value;
    metrics["psnr_masked"] = capped_psnr(psnr_unobserved(restored, clean, mask));
    metrics["psnr_input"] = capped_psnr(psnr(zero_fill, clean));
    metrics["constraint_gap"] = final_gap;
    metrics["observed_fraction"] = mask.observed_fraction();
    metrics["iters"] = iters;
    metrics["wall_ms"] = cfg.timing_real ? wall_ms : 0.0;
    write_json_file(fs::path(cfg.output) / "metrics.json", metrics);
    outputs.push_back("metrics.json");

    write_manifest(cfg, "inpaint", inputs, outputs);
    return art;
}

namespace {

struct Flags {
    std::string config_path, preset_name, input, output, mask_path;
    std::string surrogate, representation, timing, transform;
    double tau = 0, lambda = 0, gamma = 0, chi = 0, eta = 0, epsilon = 0;
    double beta = 0, mu = 0, Lf = 0;
    std::uint64_t seed = 0;
    int max_outer = 0, threads = 0;
    bool nss = false;
    std::vector<std::size_t> crop;
};

ExperimentConfig assemble_config(const CLI::App* sub, const Flags& f) {
    ExperimentConfig cfg;
    if (!f.preset_name.empty()) cfg = preset(f.preset_name);
    if (!f.config_path.empty()) cfg = load_config_file(f.config_path, cfg);

    auto given = [sub](const std::string& name) {
        return sub->count(name) > 0;
    };
    if (given("--input")) cfg.input = f.input;
    if (given("--output")) cfg.output = f.output;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--tau")) {
        cfg.solver.tau = f.tau;
        cfg.noise_tau = f.tau;
    }
    if (given("--lambda")) cfg.solver.lambda = f.lambda;
    if (given("--gamma")) cfg.solver.surrogate.gamma = f.gamma;
    if (given("--epsilon")) cfg.solver.surrogate.epsilon = f.epsilon;
    if (given("--beta")) cfg.solver.beta = f.beta;
    if (given("--mu")) cfg.solver.mu = f.mu;
    if (given("--eta")) cfg.solver.eta = f.eta;
    if (given("--max-outer")) cfg.solver.max_outer = f.max_outer;
    if (given("--surrogate"))
        cfg.solver.surrogate.kind = surrogate_kind_from_string(f.surrogate);
    if (given("--transform"))
        cfg.solver.transform = transform_kind_from_string(f.transform);
    if (given("--chi")) cfg.mask_chi = f.chi;
    if (given("--mask")) cfg.mask_path = f.mask_path;
    if (given("--nss")) cfg.nss_enabled = f.nss;
    if (given("--threads")) cfg.nss.threads = f.threads;
    if (given("--representation")) {
        if (f.representation == "quaternion")
            cfg.representation = Representation::Quaternion;
        else if (f.representation == "rgb")
            cfg.representation = Representation::RgbChannelwise;
        else
            throw ConfigError("--representation must be quaternion|rgb");
    }
    if (given("--timing")) {
        if (f.timing == "real")
            cfg.timing_real = true;
        else if (f.timing == "none")
            cfg.timing_real = false;
        else
            throw ConfigError("--timing must be real|none");
    }
    if (given("--crop")) {
        if (f.crop.size() != 4)
            throw ConfigError("--crop wants row,col,height,width");
        cfg.crop = CropSpec{f.crop[0], f.crop[1], f.crop[2], f.crop[3]};
    }
    return cfg;
}

void add_common_options(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "JSON config file");
    sub->add_option("--preset", f.preset_name, "named parameter bundle");
    sub->add_option("--input", f.input, "input image (.png or .ppm)");
    sub->add_option("--output", f.output, "output directory");
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--tau", f.tau, "noise level on the 0-255 scale");
    sub->add_option("--lambda", f.lambda, "sparsity weight");
    sub->add_option("--gamma", f.gamma, "surrogate gamma");
    sub->add_option("--epsilon", f.epsilon, "spectral smoothing");
    sub->add_option("--beta", f.beta, "penalty parameter");
    sub->add_option("--mu", f.mu, "multiplier step scale, in (0,2)");
    sub->add_option("--eta", f.eta, "outer stopping tolerance");
    sub->add_option("--max-outer", f.max_outer, "outer iteration cap");
    sub->add_option("--surrogate", f.surrogate,
                    "nuclear|logdet|schatten|logarithm|laplace|weighted-schatten|etp");
    sub->add_option("--transform", f.transform, "qdct|identity");
    sub->add_option("--representation", f.representation, "quaternion|rgb");
    sub->add_option("--timing", f.timing, "real|none (none for replayable output)");
    sub->add_option("--crop", f.crop, "row,col,height,width")->delimiter(',');
    sub->add_option("--threads", f.threads, "worker cap (also QSLR_THREADS)");
}

int dispatch(const std::string& command, const CLI::App* sub, const Flags& f) {
    if (command == "denoise") {
        run_denoise(assemble_config(sub, f));
        return kExitOk;
    }
    if (command == "inpaint") {
        run_inpaint(assemble_config(sub, f));
        return kExitOk;
    }
    if (command == "check") {
        const ExperimentConfig cfg = assemble_config(sub, f);
        AssumptionReport rep1 = check_assumption_1(cfg.solver);
        std::cout << "== descent conditions (denoising family) ==\n";
        rep1.print(std::cout);
        if (sub->count("--chi") > 0 || !cfg.mask_path.empty()) {
            double frac = 1.0 - cfg.mask_chi;
            if (!cfg.mask_path.empty())
                frac = load_mask(cfg.mask_path).observed_fraction();
            std::optional<double> lf;
            if (sub->count("--Lf") > 0) lf = f.Lf;
            AssumptionReport rep2 = check_assumption_2(cfg.solver, frac, lf);
            std::cout << "== descent conditions (constrained family) ==\n";
            rep2.print(std::cout);
        }
        return kExitOk;
    }
    throw ConfigError("unknown command: " + command);
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    // Keep dense-algebra calls single threaded: parallelism lives at the
    // patch-group level and reproducibility is per worker count.
    setenv("OPENBLAS_NUM_THREADS", "1", 0);

    CLI::App app{"sparse low-rank quaternion color-image restoration"};
    app.require_subcommand(1);

    Flags f;
    CLI::App* denoise = app.add_subcommand("denoise", "restore a noisy image");
    add_common_options(denoise, f);
    denoise->add_flag("--nss", f.nss, "group patches before solving");

    CLI::App* inpaint =
        app.add_subcommand("inpaint", "recover missing pixels (noise-free)");
    add_common_options(inpaint, f);

    CLI::App* check =
        app.add_subcommand("check", "evaluate the descent parameter conditions");
    add_common_options(check, f);
    check->add_option("--Lf", f.Lf, "override the spectral-term gradient bound");

    CLI::App* plotdata = app.add_subcommand(
        "plotdata", "reduce a trace CSV to per-iteration error columns");
    std::string trace_in, trace_out;
    plotdata->add_option("trace", trace_in, "trace.csv from a run")->required();
    plotdata->add_option("--output", trace_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (plotdata->parsed()) {
            const IterationTrace trace = IterationTrace::read_csv(trace_in);
            std::ofstream file;
            std::ostream* os = &std::cout;
            if (!trace_out.empty()) {
                file.open(trace_out);
                if (!file) throw IoError("plotdata: cannot open " + trace_out);
                os = &file;
            }
            *os << "k,err\n";
            for (const auto& r : trace.rows) {
                char buf[128];
                std::snprintf(buf, sizeof(buf), "%d,%.17g\n", r.k,
                              r.dX + r.dW + r.dLambda1 + r.dLambda2);
                *os << buf;
            }
            return kExitOk;
        }
        for (CLI::App* sub : {denoise, inpaint, check})
            if (sub->parsed()) return dispatch(sub->get_name(), sub, f);
        throw ConfigError("no command given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace qslr
