#include "aepnp/io.hpp"

#include "aepnp/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aepnp {
namespace {

using json = nlohmann::json;

double number_at(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.is_object() || !obj.contains(key))
        throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
    const json &v = obj.at(key);
    if (!v.is_number())
        throw Error(ErrorCode::ParseError, where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        throw Error(ErrorCode::ValidationError, where + "." + key + ": non-finite value");
    return d;
}

template <int N> Eigen::Matrix<double, N, 1> vector_at(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.is_object() || !obj.contains(key))
        throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
    const json &v = obj.at(key);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N))
        throw Error(ErrorCode::ParseError,
                    where + "." + key + ": expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
        if (!v[i].is_number())
            throw Error(ErrorCode::ParseError, where + "." + key + "[" + std::to_string(i) + "]: expected a number");
        out(i) = v[i].get<double>();
        if (!std::isfinite(out(i)))
            throw Error(ErrorCode::ValidationError, where + "." + key + ": non-finite value");
    }
    return out;
}

json to_json(const Eigen::Ref<const Eigen::VectorXd> &v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep))
        out.push_back(field);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string &s, std::size_t line) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": invalid number '" + s + "'");
    return v;
}

} // namespace

CorrespondenceFile parse_correspondences(const std::string &text, std::size_t min_points) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::ParseError, "top level must be an object");

    CorrespondenceFile file;
    if (!doc.contains("intrinsics"))
        throw Error(ErrorCode::ParseError, "missing 'intrinsics' block");
    const json &intr = doc.at("intrinsics");
    if (!intr.is_object())
        throw Error(ErrorCode::ParseError, "intrinsics: expected an object");
    file.intrinsics.fx = number_at(intr, "fx", "intrinsics");
    file.intrinsics.fy = number_at(intr, "fy", "intrinsics");
    file.intrinsics.cx = number_at(intr, "cx", "intrinsics");
    file.intrinsics.cy = number_at(intr, "cy", "intrinsics");
    if (!file.intrinsics.valid())
        throw Error(ErrorCode::ValidationError, "intrinsics: fx and fy must be positive");

    if (!doc.contains("points"))
        throw Error(ErrorCode::ParseError, "missing 'points' block");
    const json &points = doc.at("points");
    if (!points.is_array())
        throw Error(ErrorCode::ParseError, "points: expected an array");
    file.corrs.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string where = "points[" + std::to_string(i) + "]";
        const Vec3 world = vector_at<3>(points[i], "world", where);
        const Vec2 pixel = vector_at<2>(points[i], "pixel", where);
        file.corrs.push_back(make_correspondence(world, pixel, file.intrinsics));
    }
    if (file.corrs.size() < min_points)
        throw Error(ErrorCode::ValidationError, "need at least " + std::to_string(min_points) + " points, got " +
                                                    std::to_string(file.corrs.size()));

    if (doc.contains("truth")) {
        const json &t = doc.at("truth");
        const Eigen::Matrix<double, 9, 1> r = vector_at<9>(t, "rotation", "truth");
        Mat3 m;
        m << r(0), r(1), r(2), r(3), r(4), r(5), r(6), r(7), r(8);
        if (!is_rotation(m, 1e-6))
            throw Error(ErrorCode::ValidationError, "truth.rotation: not a rotation matrix");
        ScaledPose truth;
        truth.rotation = nearest_rotation(m);
        truth.translation = vector_at<3>(t, "translation", "truth");
        truth.s1 = number_at(t, "s1", "truth");
        truth.s2 = number_at(t, "s2", "truth");
        if (!(truth.s1 > 0.0 && truth.s2 > 0.0))
            throw Error(ErrorCode::ValidationError, "truth: scales must be positive");
        file.truth = truth;
    }
    return file;
}

CorrespondenceFile load_correspondence_file(const std::filesystem::path &path, std::size_t min_points) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_correspondences(buf.str(), min_points);
}

std::string dump_correspondences(const CorrespondenceFile &file) {
    json doc;
    doc["intrinsics"] = {{"fx", file.intrinsics.fx},
                         {"fy", file.intrinsics.fy},
                         {"cx", file.intrinsics.cx},
                         {"cy", file.intrinsics.cy}};
    json points = json::array();
    for (const auto &c : file.corrs)
        points.push_back({{"world", to_json(c.world)}, {"pixel", to_json(c.pixel)}});
    doc["points"] = std::move(points);
    if (file.truth) {
        const Mat3 &r = file.truth->rotation.matrix();
        json rot = json::array();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rot.push_back(r(i, j));
        doc["truth"] = {{"rotation", rot},
                        {"translation", to_json(file.truth->translation)},
                        {"s1", file.truth->s1},
                        {"s2", file.truth->s2}};
    }
    return doc.dump(1) + "\n";
}

Correspondences apply_anisotropic_augmentation(std::span<const Correspondence> corrs, double s1, double s2) {
    if (!(s1 > 0.0 && s2 > 0.0) || !std::isfinite(s1) || !std::isfinite(s2))
        throw Error(ErrorCode::InvalidScale, "augmentation scales must be positive and finite");
    Correspondences out(corrs.begin(), corrs.end());
    for (auto &c : out) {
        c.world.y() /= s1;
        c.world.z() /= s2;
    }
    return out;
}

void write_csv(std::ostream &os, std::span<const SweepRecord> records) {
    os << kCsvHeader << '\n';
    for (const auto &r : records) {
        os << r.parameter_name << ',' << format_double(r.parameter_value) << ',' << r.method << ',' << r.trials
           << ',' << format_double(r.failure_rate) << ',' << format_double(r.median_r_err_deg) << ','
           << format_double(r.iqr_r_err_deg) << ',' << format_double(r.median_t_err) << ','
           << format_double(r.iqr_t_err) << ',' << format_double(r.median_s1_err) << ','
           << format_double(r.iqr_s1_err) << ',' << format_double(r.median_s2_err) << ','
           << format_double(r.iqr_s2_err) << ',' << format_double(r.mean_runtime_us) << '\n';
    }
}

SweepRecords read_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw Error(ErrorCode::ParseError, "line 1: missing or unexpected CSV header");
    SweepRecords out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 14)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(lineno) + ": expected 14 fields, got " + std::to_string(f.size()));
        SweepRecord r;
        r.parameter_name = f[0];
        r.parameter_value = parse_double(f[1], lineno);
        r.method = f[2];
        r.trials = static_cast<int>(parse_double(f[3], lineno));
        r.failure_rate = parse_double(f[4], lineno);
        r.median_r_err_deg = parse_double(f[5], lineno);
        r.iqr_r_err_deg = parse_double(f[6], lineno);
        r.median_t_err = parse_double(f[7], lineno);
        r.iqr_t_err = parse_double(f[8], lineno);
        r.median_s1_err = parse_double(f[9], lineno);
        r.iqr_s1_err = parse_double(f[10], lineno);
        r.median_s2_err = parse_double(f[11], lineno);
        r.iqr_s2_err = parse_double(f[12], lineno);
        r.mean_runtime_us = parse_double(f[13], lineno);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace aepnp
