#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bcred/config.hpp"
#include "bcred/denoisers.hpp"
#include "bcred/forward_model.hpp"
#include "bcred/io.hpp"
#include "bcred/metrics.hpp"
#include "bcred/moreau.hpp"
#include "bcred/phantoms.hpp"
#include "bcred/solver.hpp"

namespace bcred {

namespace detail {

/* Reads keys out of a Config while writing their canonical resolved form
 * (defaults filled in, numbers reformatted) into a second Config. The
 * resolved config re-parses to the same experiment, so a summary file can be
 * fed back to `run` unchanged. */
class KeyResolver {
  public:
    explicit KeyResolver(const Config& in) : in_(&in) {}

    std::string choice(const std::string& key, std::initializer_list<const char*> allowed) {
        return check_choice(key, in_->get_string(key), allowed);
    }

    std::string choice_or(const std::string& key, const std::string& fallback,
                          std::initializer_list<const char*> allowed) {
        return check_choice(key, in_->get_string_or(key, fallback), allowed);
    }

    std::string text(const std::string& key) {
        const std::string v = in_->get_string(key);
        out_.set(key, v);
        return v;
    }

    double number(const std::string& key) {
        const double v = in_->get_double(key);
        out_.set_double(key, v);
        return v;
    }

    double number_or(const std::string& key, double fallback) {
        const double v = in_->get_double_or(key, fallback);
        out_.set_double(key, v);
        return v;
    }

    std::optional<double> number_or_none(const std::string& key, const char* none_tag) {
        if (!in_->has(key) || in_->get_string(key) == none_tag) {
            out_.set(key, none_tag);
            return std::nullopt;
        }
        const double v = in_->get_double(key);
        out_.set_double(key, v);
        return v;
    }

    std::uint64_t uint(const std::string& key) {
        const std::uint64_t v = in_->get_uint(key);
        out_.set_uint(key, v);
        return v;
    }

    std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) {
        const std::uint64_t v = in_->get_uint_or(key, fallback);
        out_.set_uint(key, v);
        return v;
    }

    bool flag_or(const std::string& key, bool fallback) {
        const bool v = in_->get_bool_or(key, fallback);
        out_.set_bool(key, v);
        return v;
    }

    std::vector<double> kernel(const std::string& key) {
        const std::string raw = in_->get_string(key);
        std::vector<double> taps;
        std::string canonical;
        std::size_t begin = 0;
        while (begin <= raw.size()) {
            std::size_t end = raw.find(',', begin);
            if (end == std::string::npos) end = raw.size();
            const std::string part = raw.substr(begin, end - begin);
            char* stop = nullptr;
            const double v = std::strtod(part.c_str(), &stop);
            if (part.empty() || stop != part.c_str() + part.size())
                throw ConfigError("key `" + key + "`: `" + part +
                                  "` is not a number in kernel list");
            taps.push_back(v);
            if (!canonical.empty()) canonical += ',';
            canonical += format_double(v);
            begin = end + 1;
        }
        out_.set(key, canonical);
        return taps;
    }

    Config take() { return std::move(out_); }

  private:
    std::string check_choice(const std::string& key, const std::string& value,
                             std::initializer_list<const char*> allowed) {
        for (const char* a : allowed)
            if (value == a) {
                out_.set(key, value);
                return value;
            }
        std::string options;
        for (const char* a : allowed) {
            if (!options.empty()) options += ", ";
            options += a;
        }
        throw ConfigError("key `" + key + "`: unknown value `" + value + "` (expected one of " +
                          options + ")");
    }

    const Config* in_;
    Config out_;
};

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct DenoiserSpec {
    Denoiser denoiser;
    std::optional<Smoothable> h;
};

/* Shared denoiser grammar for `run` and `denoise`. Regularizer kinds take
 * the objective weight lambda; the denoiser parameter is derived as
 * lambda / tau so D is the prox (or gradient step) of (1/tau) h. */
inline DenoiserSpec make_denoiser(KeyResolver& r, double tau, bool is_image, std::size_t height,
                                  std::size_t width) {
    const std::string kind =
        r.choice("denoiser.kind",
                 {"identity", "soft-threshold", "tv1d", "tv2d", "smoother", "gradient-step"});
    if (kind == "identity")
        return {Denoiser::identity(), std::nullopt};
    if (kind == "soft-threshold") {
        const double lambda = r.number("denoiser.lambda");
        return {Denoiser::make_soft_threshold(lambda / tau), Smoothable::l1(lambda)};
    }
    if (kind == "tv1d") {
        const double lambda = r.number("denoiser.lambda");
        return {Denoiser::tv1d(lambda / tau), Smoothable::tv1d(lambda)};
    }
    if (kind == "tv2d") {
        const double lambda = r.number("denoiser.lambda");
        const std::size_t iters = r.uint_or("denoiser.inner_iters", 100);
        const double tol = r.number_or("denoiser.inner_tol", 1e-8);
        if (!is_image)
            throw std::invalid_argument("denoiser: tv2d needs a 2-D signal");
        return {Denoiser::tv2d(lambda / tau, height, width, static_cast<std::size_t>(iters), tol),
                std::nullopt};
    }
    if (kind == "smoother") {
        std::vector<double> taps = r.kernel("denoiser.kernel");
        return {Denoiser::linear_smoother(std::move(taps), is_image ? height : 0,
                                          is_image ? width : 0),
                std::nullopt};
    }
    const double lambda = r.number("denoiser.lambda");
    return {Denoiser::gradient_step(lambda, tau), Smoothable::tikhonov(lambda)};
}

} // namespace detail

/* A fully resolved experiment: ground truth, measurements, operator,
 * denoiser, solver parameters, and output paths. Built from a flat config;
 * `resolved` is the canonical form of that config. */
struct Experiment {
    std::vector<double> x_true;
    std::size_t height = 0;
    std::size_t width = 0;
    bool is_image = false;
    std::vector<double> y;
    ForwardModel model;
    std::optional<double> input_snr_db;
    std::uint64_t noise_seed = 0;
    Denoiser denoiser;
    std::optional<Smoothable> h;
    std::string algorithm;
    SolverConfig solver;
    BlockPartition partition;
    std::size_t certify_trials = 0;
    std::uint64_t certify_seed = 0;
    std::string trace_path;
    std::string image_path;
    std::string summary_path;
    Config resolved;
};

inline Experiment experiment_from_config(const Config& cfg) {
    // keys under summary. are results from a previous run; ignore them so a
    // summary file is itself a runnable config
    for (const std::string& key : cfg.keys())
        if (key.rfind("summary.", 0) == 0)
            cfg.mark_used(key);

    detail::KeyResolver r(cfg);

    std::vector<double> x_true;
    std::size_t height = 0, width = 0;
    bool is_image = false;
    const std::string phantom =
        r.choice("phantom.kind", {"file", "shepp-like", "piecewise-constant-1d"});
    std::vector<std::string> paths;
    if (phantom == "file") {
        const std::string path = r.text("phantom.path");
        paths.push_back(path);
        if (detail::ends_with(path, ".pgm")) {
            Image img = read_pgm(path);
            x_true = std::move(img.pixels);
            height = img.height;
            width = img.width;
            is_image = true;
        } else if (detail::ends_with(path, ".csv")) {
            x_true = read_signal_csv(path);
        } else {
            throw ConfigError("key `phantom.path`: expected a .pgm or .csv file, got `" + path +
                              "`");
        }
    } else if (phantom == "shepp-like") {
        height = static_cast<std::size_t>(r.uint("phantom.height"));
        width = static_cast<std::size_t>(r.uint("phantom.width"));
        is_image = true;
        x_true = shepp_like(height, width, r.uint_or("phantom.seed", 0));
    } else {
        const std::size_t n = static_cast<std::size_t>(r.uint("phantom.n"));
        x_true = piecewise_constant_1d(n, r.uint_or("phantom.seed", 0));
    }
    const std::size_t n = x_true.size();

    std::optional<ForwardModel> model;
    const std::string forward = r.choice("forward.kind", {"identity", "gaussian", "fourier", "file"});
    if (forward == "identity") {
        model = ForwardModel::identity(n);
    } else if (forward == "gaussian") {
        const std::size_t rows = static_cast<std::size_t>(r.uint("forward.rows"));
        model = ForwardModel::gaussian(rows, n, r.uint_or("forward.seed", 0));
    } else if (forward == "fourier") {
        const std::string mask_path = r.text("forward.mask");
        paths.push_back(mask_path);
        const FrequencyMask mask = read_mask_file(mask_path);
        if (!is_image || mask.height != height || mask.width != width)
            throw std::invalid_argument("forward model: mask geometry " +
                                        std::to_string(mask.height) + "x" +
                                        std::to_string(mask.width) +
                                        " does not match the phantom");
        model = ForwardModel::subsampled_fourier(mask);
    } else {
        const std::string path = r.text("forward.path");
        paths.push_back(path);
        model = ForwardModel::from_matrix_file(path);
        if (model->cols() != n)
            throw std::invalid_argument("forward model: matrix has " +
                                        std::to_string(model->cols()) + " columns but the phantom has " +
                                        std::to_string(n) + " samples");
    }

    const std::optional<double> snr = r.number_or_none("noise.input_snr_db", "none");
    const std::uint64_t noise_seed = r.uint_or("noise.seed", 0);

    const std::string algorithm = r.choice_or("solver.algorithm", "bcred", {"bcred", "red", "pgm"});
    SolverConfig solver;
    solver.tau = algorithm == "pgm" ? r.number_or("solver.tau", 1.0) : r.number("solver.tau");
    if (!(solver.tau > 0.0))
        throw ConfigError("key `solver.tau`: must be positive");
    solver.gamma = r.number_or_none("solver.gamma", "auto");
    solver.iterations = static_cast<std::size_t>(r.uint("solver.iterations"));
    const std::string selection =
        r.choice_or("solver.selection", "iid", {"iid", "epoch-shuffle", "cyclic"});
    solver.selection.rule = selection == "iid"        ? SelectionRule::Iid
                            : selection == "cyclic"   ? SelectionRule::Cyclic
                                                      : SelectionRule::EpochShuffle;
    solver.selection.seed = r.uint_or("solver.seed", 0);
    solver.stop_tol = r.number_or_none("solver.stop_tol", "none");
    solver.cached_residual = r.flag_or("solver.cached_residual", false);
    solver.allow_unsafe_step = r.flag_or("solver.allow_unsafe_step", false);
    solver.x0.kind = r.choice_or("solver.init", "zeros", {"zeros", "adjoint"}) == "zeros"
                         ? InitKind::Zeros
                         : InitKind::AdjointY;
    solver.blockwise = r.flag_or("solver.blockwise", false);
    solver.pad = static_cast<std::size_t>(r.uint_or("solver.pad", 0));

    detail::DenoiserSpec den = detail::make_denoiser(r, solver.tau, is_image, height, width);
    if (algorithm == "pgm" && !den.h)
        throw std::invalid_argument(
            "solver: pgm needs a denoiser with an explicit objective "
            "(soft-threshold, tv1d, or gradient-step)");

    std::optional<BlockPartition> partition;
    const std::string part_kind = r.choice_or("partition.kind", "contiguous", {"contiguous", "tiles"});
    if (part_kind == "contiguous") {
        partition = BlockPartition::contiguous(n, static_cast<std::size_t>(
                                                      r.uint_or("partition.blocks", 1)));
    } else {
        const std::size_t tr = static_cast<std::size_t>(r.uint("partition.tile_rows"));
        const std::size_t tc = static_cast<std::size_t>(r.uint("partition.tile_cols"));
        if (!is_image)
            throw std::invalid_argument("partition: tiles need a 2-D signal");
        partition = BlockPartition::tiles(height, width, tr, tc);
    }

    const std::size_t certify_trials = static_cast<std::size_t>(r.uint_or("certify.trials", 20));
    const std::uint64_t certify_seed = r.uint_or("certify.seed", 1);

    const std::string trace_path = r.text("output.trace");
    const std::string image_path = r.text("output.image");
    const std::string summary_path = r.text("output.summary");
    paths.push_back(trace_path);
    paths.push_back(image_path);
    paths.push_back(summary_path);
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t j = i + 1; j < paths.size(); ++j)
            if (paths[i] == paths[j])
                throw ConfigError("referenced paths must be distinct: `" + paths[i] +
                                  "` is used twice");

    cfg.require_all_used();

    std::vector<double> y = model->apply(x_true);
    if (snr) {
        NoisySystem noisy = add_noise_at_input_snr(y, *snr, noise_seed);
        y = std::move(noisy.y);
    }

    return Experiment{
        .x_true = std::move(x_true),
        .height = height,
        .width = width,
        .is_image = is_image,
        .y = std::move(y),
        .model = std::move(*model),
        .input_snr_db = snr,
        .noise_seed = noise_seed,
        .denoiser = std::move(den.denoiser),
        .h = den.h,
        .algorithm = algorithm,
        .solver = solver,
        .partition = std::move(*partition),
        .certify_trials = certify_trials,
        .certify_seed = certify_seed,
        .trace_path = trace_path,
        .image_path = image_path,
        .summary_path = summary_path,
        .resolved = r.take(),
    };
}

/* Direct dense solve of (A^T A + lambda I) x = A^T y; the distance oracle
 * for gradient-step runs. */
inline std::vector<double> ridge_solution(const ForwardModel& a, std::span<const double> y,
                                          double lambda) {
    const std::size_t m = a.rows(), n = a.cols();
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += a.entry(k, i) * a.entry(k, j);
            gram[i * n + j] = s;
            gram[j * n + i] = s;
        }
    for (std::size_t i = 0; i < n; ++i) gram[i * n + i] += lambda;
    return cholesky_solve(gram, a.adjoint(y));
}

struct ExperimentOutcome {
    SolveResult result;
    NonexpansivenessReport certificate;
    std::optional<std::vector<double>> oracle;
    Config summary;
};

inline std::string trace_csv(const ConvergenceTrace& t) {
    // wall_time_s is always exported empty: artifacts are pure functions of
    // the config, and timing is not
    std::string out = "k,residual,normalized_residual,objective,distance,wall_time_s\n";
    for (std::size_t k = 0; k < t.residual_sq.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += detail::format_double(t.residual_sq[k]);
        out += ',';
        out += detail::format_double(t.normalized_residual[k]);
        out += ',';
        if (!t.objective.empty()) out += detail::format_double(t.objective[k]);
        out += ',';
        if (!t.distance.empty()) out += detail::format_double(t.distance[k]);
        out += ',';
        out += '\n';
    }
    return out;
}

inline ExperimentOutcome run_experiment(const Experiment& exp) {
    ExperimentOutcome out;
    out.certificate = check_block_nonexpansive(exp.denoiser, exp.partition, exp.certify_trials,
                                               exp.certify_seed);

    if (exp.denoiser.kind() == DenoiserKind::GradientStep && exp.denoiser.lambda() > 0.0)
        out.oracle = ridge_solution(exp.model, exp.y, exp.denoiser.lambda());
    RunHooks hooks;
    if (out.oracle) hooks.oracle = *out.oracle;

    RedProblem pb{exp.model, exp.y, exp.denoiser, exp.h};
    if (exp.algorithm == "bcred")
        out.result = bcred_run(pb, exp.partition, exp.solver, hooks);
    else if (exp.algorithm == "red")
        out.result = red_full_run(pb, exp.solver, hooks);
    else
        out.result = pgm_run(exp.model, exp.y, *exp.h, exp.solver, hooks);

    Config summary = exp.resolved;
    const ConvergenceTrace& trace = out.result.trace;
    double snr = std::numeric_limits<double>::quiet_NaN();
    if (norm_sq(exp.x_true) > 0.0) snr = snr_db(out.result.x, exp.x_true);
    summary.set_double("summary.final_snr_db", snr);
    summary.set_double("summary.final_residual", trace.residual_sq.back());
    summary.set_double("summary.final_normalized_residual", trace.normalized_residual.back());
    summary.set_double("summary.gamma", trace.gamma);
    summary.set_double("summary.l_max", trace.l_max);
    summary.set_double("summary.l_global", trace.l_global);
    summary.set_uint("summary.outer_iterations", trace.outer_iterations);
    summary.set_bool("summary.unsafe_step", trace.unsafe_step);
    summary.set_bool("summary.nonexpansive", out.certificate.passed);
    summary.set_double("summary.nonexpansive_max_ratio", out.certificate.max_ratio);
    summary.set_uint("summary.nonexpansive_trials", out.certificate.trials);
    if (out.oracle) {
        summary.set_double("summary.final_distance", trace.distance.back());
        summary.set_bool("summary.distance_monotone", trace.distance_monotone);
    }
    out.summary = std::move(summary);
    return out;
}

inline void write_experiment_artifacts(const Experiment& exp, const ExperimentOutcome& out) {
    std::ofstream trace(exp.trace_path, std::ios::binary);
    if (!trace)
        throw std::runtime_error("cannot open trace file for writing: " + exp.trace_path);
    trace << trace_csv(out.result.trace);
    trace.close();
    if (exp.is_image)
        write_pgm(exp.image_path, Image{exp.height, exp.width, out.result.x});
    else
        write_signal_csv(exp.image_path, out.result.x);
    out.summary.write_file(exp.summary_path);
}

inline Config run_experiment_file(const std::string& path) {
    const Config cfg = Config::parse_file(path);
    const Experiment exp = experiment_from_config(cfg);
    const ExperimentOutcome out = run_experiment(exp);
    write_experiment_artifacts(exp, out);
    return out.summary;
}

/* One-shot denoiser application: reads a .pgm or .csv signal, applies the
 * configured denoiser once, writes the result in the input's format. */
inline void run_denoise_file(const std::string& config_path) {
    const Config cfg = Config::parse_file(config_path);
    detail::KeyResolver r(cfg);

    const std::string in_path = r.text("input.path");
    const std::string out_path = r.text("output.path");
    if (in_path == out_path)
        throw ConfigError("referenced paths must be distinct: `" + in_path + "` is used twice");

    std::vector<double> x;
    std::size_t height = 0, width = 0;
    bool is_image = false;
    if (detail::ends_with(in_path, ".pgm")) {
        Image img = read_pgm(in_path);
        x = std::move(img.pixels);
        height = img.height;
        width = img.width;
        is_image = true;
    } else if (detail::ends_with(in_path, ".csv")) {
        x = read_signal_csv(in_path);
    } else {
        throw ConfigError("key `input.path`: expected a .pgm or .csv file, got `" + in_path + "`");
    }

    const double tau = r.number_or("denoiser.tau", 1.0);
    if (!(tau > 0.0))
        throw ConfigError("key `denoiser.tau`: must be positive");
    detail::DenoiserSpec den = detail::make_denoiser(r, tau, is_image, height, width);
    cfg.require_all_used();

    const std::vector<double> z = denoise(den.denoiser, x);
    if (is_image)
        write_pgm(out_path, Image{height, width, z});
    else
        write_signal_csv(out_path, z);
}

} // namespace bcred
