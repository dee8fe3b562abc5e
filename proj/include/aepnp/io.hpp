#pragma once

#include "aepnp/geometry.hpp"
#include "aepnp/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace aepnp {

struct CorrespondenceFile {
    CameraIntrinsics intrinsics;
    Correspondences corrs;
    std::optional<ScaledPose> truth;
};

// JSON text: {"intrinsics": {fx, fy, cx, cy}, "points": [{"world": [x,y,z], "pixel": [u,v]}, ...],
//             "truth": {"rotation": [9 row-major], "translation": [3], "s1", "s2"}}
CorrespondenceFile parse_correspondences(const std::string &text, std::size_t min_points = 0);
CorrespondenceFile load_correspondence_file(const std::filesystem::path &path, std::size_t min_points = 0);
std::string dump_correspondences(const CorrespondenceFile &file);

// Maps each world point (x, y, z) to (x, y / s1, z / s2); solving the result
// recovers (s1, s2) relative to the original model.
Correspondences apply_anisotropic_augmentation(std::span<const Correspondence> corrs, double s1, double s2);

inline constexpr const char *kCsvHeader =
    "parameter_name,parameter_value,method,trials,failure_rate,median_r_err_deg,iqr_r_err_deg,"
    "median_t_err,iqr_t_err,median_s1_err_frac,iqr_s1_err_frac,median_s2_err_frac,iqr_s2_err_frac,"
    "mean_runtime_us";

void write_csv(std::ostream &os, std::span<const SweepRecord> records);
SweepRecords read_csv(std::istream &is);

} // namespace aepnp
