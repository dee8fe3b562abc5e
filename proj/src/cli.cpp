#include "aepnp/cli.hpp"

#include "aepnp/error.hpp"
#include "aepnp/io.hpp"
#include "aepnp/linear.hpp"
#include "aepnp/ransac.hpp"
#include "aepnp/refine.hpp"
#include "aepnp/sim.hpp"
#include "aepnp/simd/kernels.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace aepnp {
namespace {

using json = nlohmann::json;

struct SceneFlags {
    int n = 1024;
    double sigma = 0.0;
    double outliers = 0.0;
    double scale_min = 0.5;
    double scale_max = 2.0;
    std::uint64_t seed = 0;

    SceneConfig config() const {
        SceneConfig cfg;
        cfg.n_points = n;
        cfg.noise_sigma_px = sigma;
        cfg.outlier_ratio = outliers;
        cfg.scale_min = scale_min;
        cfg.scale_max = scale_max;
        cfg.seed = seed;
        return cfg;
    }
};

struct SweepFlags {
    int trials = 2000;
    std::string out;
    unsigned threads = 0;
    bool with_timing = false;
};

void add_scene_flags(CLI::App *cmd, SceneFlags &f, bool with_n, bool with_sigma) {
    if (with_n)
        cmd->add_option("--n", f.n, "Correspondences per scene")->check(CLI::PositiveNumber);
    if (with_sigma)
        cmd->add_option("--sigma", f.sigma, "Pixel noise standard deviation")->check(CLI::NonNegativeNumber);
    cmd->add_option("--scale-min", f.scale_min, "Lower bound of the drawn y/z scales");
    cmd->add_option("--scale-max", f.scale_max, "Upper bound of the drawn y/z scales");
    cmd->add_option("--seed", f.seed, "Master seed");
}

void add_sweep_flags(CLI::App *cmd, SweepFlags &f) {
    cmd->add_option("--trials", f.trials, "Independent trials per data point")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "CSV output path (standard output if omitted)");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

void emit_csv(const SweepRecords &records, const std::string &path, std::ostream &out) {
    if (path.empty()) {
        write_csv(out, records);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw Error(ErrorCode::ValidationError, "cannot write " + path);
    write_csv(file, records);
}

// Runtimes vary between runs; accuracy sweeps leave the column empty unless asked.
SweepRecords strip_timing(SweepRecords records, bool keep) {
    if (!keep)
        for (auto &r : records)
            r.mean_runtime_us = std::numeric_limits<double>::quiet_NaN();
    return records;
}

json pose_json(const ScaledPose &pose) {
    json rot = json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            rot.push_back(pose.rotation.matrix()(i, j));
    const Eigen::Vector4d q = pose.rotation.quaternion();
    return {{"rotation", rot},
            {"quaternion", {q(0), q(1), q(2), q(3)}},
            {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}},
            {"s1", pose.s1},
            {"s2", pose.s2}};
}

json diagnostics_json(const SolveDiagnostics &d) {
    const double gap = d.condition_gap;
    return {{"smallest_singular_values", {d.smallest_singular_values[0], d.smallest_singular_values[1]}},
            {"condition_gap", std::isfinite(gap) ? json(gap) : json("inf")},
            {"cheirality_flips", d.cheirality_flips}};
}

std::vector<double> parse_doubles(const std::vector<std::string> &items) {
    std::vector<double> out;
    for (const auto &s : items)
        out.push_back(std::stod(s));
    return out;
}

} // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Pose, translation and anisotropic scale estimation from 2D-3D correspondences", "aepnp"};
    app.require_subcommand(1);
    std::string isa;
    app.add_option("--isa", isa, "Force a kernel set (scalar, avx2, neon)");

    SceneFlags sim_flags;
    std::string sim_out;
    auto *simulate = app.add_subcommand("simulate", "Write a synthetic correspondence file");
    add_scene_flags(simulate, sim_flags, true, true);
    simulate->add_option("--outliers", sim_flags.outliers, "Outlier ratio in [0, 1)");
    simulate->add_option("--out", sim_out, "Output path (standard output if omitted)");

    std::string solve_path, method = "aepnp";
    bool solve_refine = false;
    RansacConfig ransac_cfg;
    auto *solve = app.add_subcommand("solve", "Estimate pose and scales from a correspondence file");
    solve->add_option("file", solve_path, "Correspondence file")->required();
    solve->add_option("--method", method, "epnp, aepnp or ransac-aepnp")
        ->check(CLI::IsMember({"epnp", "aepnp", "ransac-aepnp"}));
    solve->add_flag("--refine", solve_refine, "Refine the linear estimate by minimizing reprojection error");
    solve->add_option("--threshold-px", ransac_cfg.inlier_threshold_px, "RANSAC inlier threshold in pixels")
        ->check(CLI::PositiveNumber);
    solve->add_option("--max-iterations", ransac_cfg.max_iterations, "RANSAC iteration cap")
        ->check(CLI::PositiveNumber);
    solve->add_option("--seed", ransac_cfg.seed, "RANSAC seed");

    SceneFlags noise_flags;
    SweepFlags noise_sweep;
    std::vector<std::string> sigmas{"0", "0.5", "1", "2", "4"};
    auto *sweep_noise = app.add_subcommand("sweep-noise", "Error statistics against pixel noise");
    add_scene_flags(sweep_noise, noise_flags, true, false);
    add_sweep_flags(sweep_noise, noise_sweep);
    sweep_noise->add_option("--sigmas", sigmas, "Noise levels in pixels")->delimiter(',');
    sweep_noise->add_flag("--with-timing", noise_sweep.with_timing, "Fill the runtime column");

    SceneFlags count_flags;
    count_flags.sigma = 2.0;
    SweepFlags count_sweep;
    std::vector<int> counts{16, 64, 256, 1024};
    auto *sweep_count = app.add_subcommand("sweep-count", "Error statistics against correspondence count");
    add_scene_flags(sweep_count, count_flags, false, true);
    add_sweep_flags(sweep_count, count_sweep);
    sweep_count->add_option("--counts", counts, "Correspondence counts")->delimiter(',');
    sweep_count->add_flag("--with-timing", count_sweep.with_timing, "Fill the runtime column");

    SceneFlags outlier_flags;
    outlier_flags.n = 1000;
    outlier_flags.sigma = 1.0;
    SweepFlags outlier_sweep;
    std::vector<std::string> ratios{"0", "0.1", "0.2", "0.3"};
    bool outlier_refine = false;
    RansacConfig outlier_ransac;
    auto *sweep_outliers = app.add_subcommand("sweep-outliers", "RANSAC error statistics against outlier ratio");
    add_scene_flags(sweep_outliers, outlier_flags, true, true);
    add_sweep_flags(sweep_outliers, outlier_sweep);
    sweep_outliers->add_option("--ratios", ratios, "Outlier ratios")->delimiter(',');
    sweep_outliers->add_flag("--refine", outlier_refine, "Also report RANSAC followed by refinement");
    sweep_outliers->add_option("--threshold-px", outlier_ransac.inlier_threshold_px, "RANSAC inlier threshold")
        ->check(CLI::PositiveNumber);
    sweep_outliers->add_option("--max-iterations", outlier_ransac.max_iterations, "RANSAC iteration cap")
        ->check(CLI::PositiveNumber);
    sweep_outliers->add_flag("--with-timing", outlier_sweep.with_timing, "Fill the runtime column");

    SceneFlags time_flags;
    SweepFlags time_sweep;
    std::vector<int> time_counts{64, 256, 1024};
    auto *bench_time = app.add_subcommand("bench-time", "Mean solve time against correspondence count");
    add_scene_flags(bench_time, time_flags, false, true);
    add_sweep_flags(bench_time, time_sweep);
    bench_time->add_option("--counts", time_counts, "Correspondence counts")->delimiter(',');

    SceneFlags sparse_flags;
    sparse_flags.sigma = 1.0;
    SweepFlags sparse_sweep;
    std::vector<int> keypoints{7};
    auto *sparse = app.add_subcommand("sparse-test", "Error statistics with a handful of keypoints");
    add_scene_flags(sparse, sparse_flags, false, true);
    add_sweep_flags(sparse, sparse_sweep);
    sparse->add_option("--n-keypoints", keypoints, "Keypoint counts")->delimiter(',');
    sparse->add_flag("--with-timing", sparse_sweep.with_timing, "Fill the runtime column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (!isa.empty()) {
            bool found = false;
            for (simd::Isa candidate : {simd::Isa::Scalar, simd::Isa::Avx2, simd::Isa::Neon})
                if (isa == simd::to_string(candidate)) {
                    simd::set_active_isa(candidate);
                    found = true;
                }
            if (!found) {
                err << "unknown ISA '" << isa << "'\n";
                return 1;
            }
        }

        if (*simulate) {
            const SyntheticScene scene = generate_scene(sim_flags.config());
            CorrespondenceFile file{scene.intrinsics, scene.corrs, scene.truth};
            const std::string text = dump_correspondences(file);
            if (sim_out.empty()) {
                out << text;
            } else {
                std::ofstream f(sim_out, std::ios::binary);
                if (!f)
                    throw Error(ErrorCode::ValidationError, "cannot write " + sim_out);
                f << text;
            }
            return 0;
        }

        if (*solve) {
            const CorrespondenceFile file = load_correspondence_file(solve_path, kMinCorrespondences);
            const CameraIntrinsics &k = file.intrinsics;
            json result;
            result["method"] = method;
            ScaledPose pose;
            Correspondences refine_set = file.corrs;
            if (method == "epnp") {
                const EpnpResult r = epnp_solve(file.corrs, k);
                pose.rotation = r.pose.rotation;
                pose.translation = r.pose.translation;
                result["diagnostics"] = diagnostics_json(r.diagnostics);
            } else if (method == "aepnp") {
                const AepnpResult r = aepnp_solve(file.corrs, k);
                pose = r.pose;
                result["diagnostics"] = diagnostics_json(r.diagnostics);
            } else {
                const RobustResult r = ransac_aepnp(file.corrs, k, ransac_cfg);
                pose = r.pose;
                result["ransac"] = {{"iterations", r.iterations_run}, {"inliers", r.best_inlier_count}};
                refine_set.clear();
                for (std::size_t i = 0; i < file.corrs.size(); ++i)
                    if (r.inlier_mask[i])
                        refine_set.push_back(file.corrs[i]);
            }
            if (solve_refine) {
                const RefineResult r = refine(pose, refine_set, k);
                pose = r.pose;
                result["refine"] = {{"initial_cost", r.report.initial_cost},
                                    {"final_cost", r.report.final_cost},
                                    {"iterations", r.report.iterations},
                                    {"converged", r.report.converged}};
            }
            result["pose"] = pose_json(pose);
            if (file.truth) {
                result["errors"] = {{"r_err_deg", rotation_error(pose.rotation, file.truth->rotation)},
                                    {"t_err", translation_error(pose.translation, file.truth->translation)},
                                    {"s1_err_frac", scale_error(pose.s1, file.truth->s1)},
                                    {"s2_err_frac", scale_error(pose.s2, file.truth->s2)}};
            }
            out << result.dump(2) << '\n';
            return 0;
        }

        HarnessOptions opts;
        if (*sweep_noise) {
            opts.threads = noise_sweep.threads;
            const auto values = parse_doubles(sigmas);
            const auto records =
                run_noise_sweep(values, noise_sweep.trials, noise_flags.config(), opts);
            emit_csv(strip_timing(records, noise_sweep.with_timing), noise_sweep.out, out);
        } else if (*sweep_count) {
            opts.threads = count_sweep.threads;
            const auto records = run_count_sweep(counts, count_flags.sigma, count_sweep.trials,
                                                  count_flags.config(), opts);
            emit_csv(strip_timing(records, count_sweep.with_timing), count_sweep.out, out);
        } else if (*sweep_outliers) {
            opts.threads = outlier_sweep.threads;
            opts.ransac = outlier_ransac;
            const auto values = parse_doubles(ratios);
            const auto records = run_outlier_sweep(values, outlier_sweep.trials, outlier_flags.config(),
                                                   outlier_refine, opts);
            emit_csv(strip_timing(records, outlier_sweep.with_timing), outlier_sweep.out, out);
        } else if (*bench_time) {
            const auto records = run_timing(time_counts, time_sweep.trials, time_flags.config(), opts);
            emit_csv(records, time_sweep.out, out);
        } else if (*sparse) {
            opts.threads = sparse_sweep.threads;
            SweepRecords records;
            for (int n : keypoints) {
                auto part = run_sparse_keypoint_protocol(n, sparse_flags.sigma, sparse_sweep.trials,
                                                         sparse_flags.config(), opts);
                records.insert(records.end(), part.begin(), part.end());
            }
            emit_csv(strip_timing(records, sparse_sweep.with_timing), sparse_sweep.out, out);
        }
        return 0;
    } catch (const std::invalid_argument &e) {
        err << "error: invalid number in list: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace aepnp
