// atriareg: phantom generation, preprocessing, cycle tracking and evaluation.
//
// Failures print a single line to stderr:
//   error: <Category>: <detail>
// where Category is an ErrorCode name or UsageError. Exit codes: 0 success,
// 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atriareg/dataset.hpp"
#include "atriareg/error.hpp"
#include "atriareg/metrics.hpp"
#include "atriareg/nifti.hpp"
#include "atriareg/phantom.hpp"
#include "atriareg/pipeline.hpp"
#include "atriareg/registration.hpp"
#include "atriareg/report.hpp"
#include "atriareg/transform.hpp"

namespace fs = std::filesystem;
using namespace atriareg;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string one_line(std::string s) {
    for (char &c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

void fail_line(std::string_view category, const std::string &detail) {
    std::cerr << "error: " << category << ": " << one_line(detail) << '\n';
}

template <class T, std::size_t N> std::array<T, N> to_array(const std::vector<T> &v) {
    std::array<T, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

struct PhantomArgs {
    fs::path out;
    std::uint64_t seed = 0;
    int phases = kDefaultPhaseCount;
    std::vector<int> dims{96, 96, 36};
    std::vector<double> spacing{1.72, 1.72, 2.0};
    double peak_scale = 1.25;
    int peak_phase = 8;
    double noise = 0.02;
};

struct PreprocessArgs {
    fs::path in, out;
    std::vector<int> crop{kDefaultCropSize[0], kDefaultCropSize[1], kDefaultCropSize[2]};
    double band_radius = kDefaultBandRadius;
};

struct TrackArgs {
    fs::path in, out;
    RegistrationConfig cfg;
    bool no_warm_start = false;
    std::string similarity = "mse";
};

struct EvaluateArgs {
    fs::path in, fields, out;
    double percentile = 100.0;
};

struct JacobianArgs {
    fs::path field, out;
};

void run_phantom(const PhantomArgs &a) {
    PhantomConfig cfg;
    cfg.seed = a.seed;
    cfg.phases = a.phases;
    cfg.dims = Dims{a.dims[0], a.dims[1], a.dims[2]};
    cfg.spacing = to_array<double, 3>(a.spacing);
    cfg.peak_scale = a.peak_scale;
    cfg.peak_phase = a.peak_phase;
    cfg.noise_sigma = a.noise;
    const Phantom ph = generate_phantom(cfg);
    write_phantom_dataset(ph, cfg, a.out);
    std::cout << "wrote " << ph.series.phase_count() << " phases to " << a.out.string() << '\n';
}

void run_preprocess(const PreprocessArgs &a) {
    PreprocessOptions opt;
    opt.crop_size = to_array<int, 3>(a.crop);
    opt.band_radius = a.band_radius;
    const CineSeries raw = read_series_dir(a.in);
    const PreprocessedSeries pre = preprocess_series(raw, opt);
    write_preprocessed_dataset(pre, opt, a.out);
    std::cout << "wrote " << pre.series.phase_count() << " preprocessed phases to " << a.out.string() << '\n';
}

void run_track(TrackArgs a) {
    a.cfg.warm_start = !a.no_warm_start;
    a.cfg.similarity =
        a.similarity == "ncc" ? SimilarityKind::NormalizedCrossCorrelation : SimilarityKind::MeanSquaredError;
    const CineSeries series = read_series_dir(a.in);
    const std::vector<RegistrationResult> results = track_cycle(series, a.cfg);
    write_tracking_dataset(results, a.cfg, a.out);
    for (std::size_t t = 0; t < results.size(); ++t) {
        const RegistrationResult &r = results[t];
        std::cout << phase_stem(static_cast<int>(t)) << " iterations";
        for (int n : r.iterations_used) {
            std::cout << ' ' << n;
        }
        std::cout << " loss " << (r.loss_trace.empty() ? 0.0 : r.loss_trace.back().total)
                  << (r.converged ? "" : " (iteration cap)") << '\n';
    }
}

void run_evaluate(const EvaluateArgs &a) {
    const CineSeries series = read_series_dir(a.in);
    const std::vector<DisplacementField> fields = read_fields_dir(a.fields, series.phase_count());
    EvaluationOptions opt;
    opt.hausdorff_percentile = a.percentile;
    const std::vector<PhaseEvaluation> evals = evaluate_tracking(series, fields, opt);
    write_metrics_csv(evals, a.out);
    double dice_sum = 0.0, hd_max = 0.0;
    for (const PhaseEvaluation &e : evals) {
        dice_sum += e.dice;
        hd_max = std::max(hd_max, e.hausdorff_mm);
    }
    std::cout << "mean dice " << dice_sum / static_cast<double>(evals.size()) << ", max hausdorff " << hd_max
              << " mm, " << evals.size() << " phases\n";
}

void run_jacobian(const JacobianArgs &a) {
    const DisplacementField field = read_field(a.field);
    if (field.units() != FieldUnits::Voxel) {
        throw Error(ErrorCode::InvalidArgument, "jacobian expects a voxel-unit field");
    }
    write_nifti(jacobian_det_map(field), a.out);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Contour-guided cardiac cycle registration"};
    app.require_subcommand(1);

    PhantomArgs pa;
    auto *phantom = app.add_subcommand("phantom", "Generate a synthetic cine dataset with analytic fields");
    phantom->add_option("--out", pa.out, "Output directory")->required();
    phantom->add_option("--seed", pa.seed, "Noise seed");
    phantom->add_option("--phases", pa.phases, "Number of phases")->check(CLI::Range(2, 32767));
    phantom->add_option("--dims", pa.dims, "Grid size nx,ny,nz")->delimiter(',')->expected(3)->check(
        CLI::PositiveNumber);
    phantom->add_option("--spacing", pa.spacing, "Voxel spacing in mm")->delimiter(',')->expected(3)->check(
        CLI::PositiveNumber);
    phantom->add_option("--peak-scale", pa.peak_scale, "Maximum scale factor")->check(CLI::PositiveNumber);
    phantom->add_option("--peak-phase", pa.peak_phase, "Phase of maximum scale");
    phantom->add_option("--noise", pa.noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);

    PreprocessArgs pp;
    auto *preprocess = app.add_subcommand("preprocess", "Crop, stabilize, normalize and band-mask a dataset");
    preprocess->add_option("--in", pp.in, "Input dataset directory")->required()->check(CLI::ExistingDirectory);
    preprocess->add_option("--out", pp.out, "Output directory")->required();
    preprocess->add_option("--crop", pp.crop, "Crop size nx,ny,nz")->delimiter(',')->expected(3)->check(
        CLI::PositiveNumber);
    preprocess->add_option("--band-radius", pp.band_radius, "Contour band radius in voxels")
        ->check(CLI::NonNegativeNumber);

    TrackArgs ta;
    auto *track = app.add_subcommand("track", "Register every phase to the reference phase");
    track->add_option("--in", ta.in, "Preprocessed dataset directory")->required()->check(CLI::ExistingDirectory);
    track->add_option("--out", ta.out, "Output directory for fields and loss trace")->required();
    track->add_option("--lambda", ta.cfg.lambda, "Bending energy weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    track->add_option("--levels", ta.cfg.levels, "Downsample factors, coarse to fine")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    track->add_flag("--no-warm-start", ta.no_warm_start, "Start every phase from the zero field");
    track->add_option("--seed", ta.cfg.seed, "Recorded in the loss trace");
    track->add_option("--max-iters", ta.cfg.max_iters_per_level, "Iteration cap per level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    track->add_option("--step", ta.cfg.step_size, "Adam step in level voxels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    track->add_option("--tol", ta.cfg.stop_rel_tol, "Relative improvement stop tolerance")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    track->add_option("--similarity", ta.similarity, "mse or ncc")->check(CLI::IsMember({"mse", "ncc"}));

    EvaluateArgs ea;
    auto *evaluate = app.add_subcommand("evaluate", "Compare warped reference masks with each phase's mask");
    evaluate->add_option("--in", ea.in, "Preprocessed dataset directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--fields", ea.fields, "Directory of tracked fields")->required()->check(
        CLI::ExistingDirectory);
    evaluate->add_option("--out", ea.out, "Metrics CSV path")->required();
    evaluate->add_option("--percentile", ea.percentile, "Hausdorff percentile")->check(CLI::Range(0.0, 100.0));

    JacobianArgs ja;
    auto *jacobian = app.add_subcommand("jacobian", "Write the Jacobian determinant map of a field");
    jacobian->add_option("--field", ja.field, "Displacement field")->required()->check(CLI::ExistingFile);
    jacobian->add_option("--out", ja.out, "Output NIfTI path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        fail_line("UsageError", e.what());
        return kExitUsage;
    }

    try {
        if (phantom->parsed()) {
            run_phantom(pa);
        } else if (preprocess->parsed()) {
            run_preprocess(pp);
        } else if (track->parsed()) {
            run_track(ta);
        } else if (evaluate->parsed()) {
            run_evaluate(ea);
        } else if (jacobian->parsed()) {
            run_jacobian(ja);
        }
    } catch (const Error &e) {
        fail_line(to_string(e.code()), e.detail());
        return kExitFailure;
    } catch (const std::exception &e) {
        fail_line("IoFailure", e.what());
        return kExitFailure;
    }
    return 0;
}
