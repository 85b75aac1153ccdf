#include "vessel/report.hpp"

#include "vessel/error.hpp"
#include "vessel/imageio.hpp"
#include "vessel/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vessel {

Json params_to_json(const ClusterParams& p) {
    Json j = Json::object();
    j["H"] = p.H;
    j["sigma"] = p.sigma;
    j["sigma2"] = p.sigma2;
    j["epsilon"] = p.epsilon;
    j["tau"] = p.tau;
    j["min_size"] = p.min_size;
    j["n_paths"] = p.n_paths;
    j["n_theta"] = p.n_theta;
    j["delta_s"] = p.delta_s;
    j["grid_radius"] = p.grid_radius;
    j["seed"] = p.seed;
    j["wavelet_size"] = p.wavelet_size;
    j["spline_order"] = p.spline_order;
    j["inflection"] = p.inflection;
    return j;
}

ClusterParams params_from_json(const Json& body, ClusterParams base) {
    if (body.is_null()) return base;
    if (!body.is_object()) throw InvalidArgument("request body must be a JSON object", "body");
    for (const auto& [key, value] : body.items()) {
        std::string text;
        if (value.is_number_integer() || value.is_number_unsigned()) text = value.dump();
        else if (value.is_number_float()) text = format_double(value.get<double>());
        else if (value.is_string()) text = value.get<std::string>();
        else throw InvalidArgument("must be a number", key);
        base.set(key, text);
    }
    base.validate();
    return base;
}

Json patch_spec_to_json(const PatchSpec& spec, const PixelRect& rect) {
    Json j = Json::object();
    j["id"] = spec.id;
    j["center"] = {spec.cx, spec.cy};
    j["size"] = spec.size;
    j["rect"] = {{"x", rect.x}, {"y", rect.y}, {"width", rect.width}, {"height", rect.height}};
    Json js = Json::array();
    for (const auto& q : spec.junctions) js.push_back({q.x, q.y});
    j["junctions"] = js;
    return j;
}

Json patch_result_to_json(const PatchResult& r) {
    Json j = patch_spec_to_json(r.spec, r.rect);
    j["params"] = params_to_json(r.params);
    if (!r.ok()) {
        j["error"] = r.error;
        return j;
    }
    j["kernel"] = {{"H", r.kernel.H},
                   {"grid_radius", r.kernel.effective_radius()},
                   {"cache_name", kernel_cache_name(r.kernel)}};
    j["wavelet_size"] = r.wavelet_size;
    j["otsu_threshold"] = r.otsu_threshold;
    j["n_points"] = r.points.size();
    j["n_isolated"] = r.n_isolated;
    j["K"] = r.K;
    j["n_clusters"] = r.labeling.n_clusters();
    j["cluster_sizes"] = r.labeling.sizes;
    j["n_noise"] = std::count(r.labeling.labels.begin(), r.labeling.labels.end(), kNoise);
    Json ev = Json::array(), evt = Json::array();
    const Eigen::Index shown = std::min<Eigen::Index>(r.eigenvalues.size(), kReportedEigenvalues);
    for (Eigen::Index i = 0; i < shown; ++i) {
        ev.push_back(r.eigenvalues(i));
        evt.push_back(std::pow(std::max(r.eigenvalues(i), 0.0), r.params.tau));
    }
    j["eigenvalues"] = ev;
    j["eigenvalues_tau"] = evt;
    j["threshold"] = 1.0 - r.params.epsilon;
    Json labels = Json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points.points[i];
        labels.push_back({p.x, p.y, p.orientation, r.labeling.labels[i]});
    }
    j["labels"] = labels;
    return j;
}

Json manifest_to_json(const RunConfig& cfg, const Image2D& img, const ImageRun& run) {
    Json j = Json::object();
    j["image"] = cfg.image.filename().string();
    j["seg"] = cfg.seg.filename().string();
    j["width"] = img.cols();
    j["height"] = img.rows();
    j["normalize_window"] = cfg.normalize_window;
    j["initial_size"] = cfg.patching.initial_size;
    j["max_size"] = cfg.patching.max_size;
    j["defaults"] = params_to_json(cfg.defaults);
    j["global_threshold"] = run.plan.global_threshold;
    Json js = Json::array();
    for (const auto& q : run.plan.junctions) js.push_back({q.x, q.y});
    j["junctions"] = js;
    Json patches = Json::array();
    for (const auto& r : run.results) patches.push_back(patch_result_to_json(r));
    j["patches"] = patches;
    j["n_failed"] = run.n_failed();
    return j;
}

std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues, int tau) {
    std::ostringstream out;
    out.precision(17);
    out << "index,lambda,lambda_tau\n";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        out << i + 1 << ',' << eigenvalues(i) << ',' << std::pow(std::max(eigenvalues(i), 0.0), tau) << '\n';
    return out.str();
}

Raster<std::uint16_t> label_map(const PatchResult& r) {
    Raster<std::uint16_t> map = Raster<std::uint16_t>::Zero(r.rect.height, r.rect.width);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points.points[i];
        const int label = r.labeling.labels[i];
        map(p.y - r.rect.y, p.x - r.rect.x) = label == kNoise ? kNoisePixel : static_cast<std::uint16_t>(label);
    }
    return map;
}

void write_run_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const Image2D& img,
                       const ImageRun& run) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
        out << manifest_to_json(cfg, img, run).dump(2) << '\n';
    }
    for (const auto& r : run.results) {
        if (!r.ok()) continue;
        const std::string stem = "patch_" + std::to_string(r.spec.id);
        save_rgb_png(dir / (stem + "_overlay.png"), render_overlay(img, r));
        save_gray16(dir / (stem + "_labels.png"), label_map(r));
        if (r.eigenvalues.size() > 0) {
            save_rgb_png(dir / (stem + "_spectrum.png"), render_spectrum(r.eigenvalues, r.params.tau, r.params.epsilon));
            std::ofstream csv(dir / (stem + "_eigenvalues.csv"), std::ios::binary);
            csv << eigenvalues_csv(r.eigenvalues, r.params.tau);
        }
    }
}

}  // namespace vessel
