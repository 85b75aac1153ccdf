#include "vessel/commands.hpp"

#include "vessel/config.hpp"
#include "vessel/error.hpp"
#include "vessel/imageio.hpp"
#include "vessel/render.hpp"
#include "vessel/report.hpp"
#include "vessel/service.hpp"
#include "vessel/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <map>
#include <ostream>

namespace vessel {

namespace {

std::filesystem::path default_out_dir() {
    const char* env = std::getenv("VESSEL_OUT_DIR");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("vessel-out");
}

// One --<key> option per ClusterParams field, collected as text so that
// validation errors name the field exactly as the config file does.
void add_param_options(CLI::App& app, std::map<std::string, std::string>& sink) {
    for (const auto& key : cluster_param_keys()) {
        std::string names = "--" + key;
        if (key == "n_paths") names += ",--n";
        app.add_option_function<std::string>(names, [&sink, key](const std::string& v) { sink[key] = v; },
                                             "override " + key);
    }
}

void load_pair(const RunConfig& cfg, Image2D& img, SoftSegmentation& seg) {
    if (cfg.image.empty()) throw InvalidArgument("required", "image");
    if (cfg.seg.empty()) throw InvalidArgument("required", "seg");
    img = load_grayscale(cfg.image).pixels;
    seg = load_grayscale(cfg.seg).pixels;
    if (!same_shape(img, seg)) throw InvalidArgument("image and segmentation differ in size", "seg");
    if (cfg.normalize_window) img = normalize_luminosity(img, cfg.normalize_window);
}

struct RunArgs {
    std::string config, image, seg, out, cache_dir;
    int normalize_window = -1;
    int initial_size = -1, max_size = -1;
    int threads = -1;
    std::map<std::string, std::string> params;
};

RunConfig build_config(const RunArgs& a) {
    RunConfig cfg;
    cfg.out = default_out_dir();
    if (!a.config.empty()) load_config(a.config, cfg);
    if (!a.image.empty()) cfg.image = a.image;
    if (!a.seg.empty()) cfg.seg = a.seg;
    if (!a.out.empty()) cfg.out = a.out;
    if (!a.cache_dir.empty()) cfg.cache_dir = a.cache_dir;
    if (a.normalize_window >= 0) cfg.normalize_window = a.normalize_window;
    if (a.initial_size >= 0) cfg.patching.initial_size = a.initial_size;
    if (a.max_size >= 0) cfg.patching.max_size = a.max_size;
    if (a.threads >= 0) cfg.threads = static_cast<unsigned>(a.threads);
    for (const auto& [k, v] : a.params) cfg.defaults.set(k, v);
    cfg.validate();
    return cfg;
}

void add_run_inputs(CLI::App& app, RunArgs& a) {
    app.add_option("--config", a.config, "configuration file");
    app.add_option("--image", a.image, "enhanced image (PNG or PGM)");
    app.add_option("--seg", a.seg, "soft segmentation (PNG or PGM)");
    app.add_option("--cache-dir", a.cache_dir, "kernel cache directory");
    app.add_option("--normalize-window", a.normalize_window, "luminosity normalizer window (0 = off)");
    app.add_option("--initial-size", a.initial_size, "initial patch side");
    app.add_option("--max-size", a.max_size, "maximum patch side");
    app.add_option("--threads", a.threads, "worker threads (0 = all cores)");
    add_param_options(app, a.params);
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = build_config(a);
    Image2D img;
    SoftSegmentation seg;
    load_pair(cfg, img, seg);
    KernelCache cache(cfg.cache_dir);
    const ImageRun run = run_image(img, seg, cfg.run_options(), cache);
    write_run_outputs(cfg.out, cfg, img, run);
    out << run.results.size() << " patches, " << run.plan.junctions.size() << " junctions -> "
        << (cfg.out / "manifest.json").string() << '\n';
    for (const auto& r : run.results) {
        if (r.ok())
            out << "patch " << r.spec.id << ": " << r.labeling.n_clusters() << " clusters, K = " << r.K << ", "
                << r.points.size() << " points\n";
        else
            err << "patch " << r.spec.id << " failed: " << r.error << '\n';
    }
    return run.n_failed() ? kExitPatchFailures : kExitOk;
}

int cmd_kernel(const std::map<std::string, std::string>& params, int size, const std::string& cache_dir,
               const std::string& file, const std::string& png, std::ostream& out, std::ostream& err) {
    ClusterParams p;
    for (const auto& [k, v] : params) p.set(k, v);
    p.validate();
    if (size < 1) throw InvalidArgument("must be >= 1", "size");
    const KernelParams kp = p.kernel_params(size);
    kp.validate();
    for (const auto& w : kp.warnings()) err << "warning: " << w << '\n';

    const auto start = std::chrono::steady_clock::now();
    const KernelGrid grid = estimate_kernel(kp);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::path target = file;
    if (target.empty()) {
        const std::filesystem::path dir = cache_dir.empty() ? default_out_dir() : std::filesystem::path(cache_dir);
        std::filesystem::create_directories(dir);
        target = dir / kernel_cache_name(kp);
    }
    save_kernel(target, grid);
    if (!png.empty()) save_grayscale(png, kernel_projection(grid));
    out << "kernel " << target.string() << " H=" << kp.H << " radius=" << grid.radius()
        << " mass=" << format_double(grid.total_mass()) << " time=" << format_double(seconds) << "s\n";
    return kExitOk;
}

int cmd_serve(const RunArgs& a, const std::string& host, int port, std::ostream& out) {
    const RunConfig cfg = build_config(a);
    Image2D img;
    SoftSegmentation seg;
    load_pair(cfg, img, seg);
    Service service(std::move(img), std::move(seg), cfg);
    const int bound = service.bind(host, port);
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    out << "serving " << service.plan().patches.size() << " patches on http://" << host << ':' << bound << '\n'
        << std::flush;
    return service.serve() ? kExitOk : kExitIo;
}

int cmd_synth(const std::string& name, const std::string& dir, std::ostream& out) {
    const synth::Fixture f = synth::by_name(name);
    const std::filesystem::path d = dir.empty() ? default_out_dir() : std::filesystem::path(dir);
    std::filesystem::create_directories(d);
    save_grayscale(d / (name + "_image.png"), f.image);
    save_grayscale(d / (name + "_seg.png"), f.seg);
    out << "wrote " << (d / (name + "_image.png")).string() << " and " << (d / (name + "_seg.png")).string() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Perceptual grouping of retinal vessels in junction patches"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "analyse every junction patch of an image");
    add_run_inputs(*run, run_args);
    run->add_option("--out", run_args.out, "output directory (default $VESSEL_OUT_DIR)");

    std::map<std::string, std::string> kernel_params;
    int kernel_size = 21;
    std::string kernel_cache, kernel_file, kernel_png;
    auto* kernel = app.add_subcommand("kernel", "estimate and cache a connectivity kernel");
    add_param_options(*kernel, kernel_params);
    kernel->add_option("--size", kernel_size, "patch side used when H is automatic");
    kernel->add_option("--cache-dir", kernel_cache, "cache directory (default $VESSEL_OUT_DIR)");
    kernel->add_option("--file", kernel_file, "explicit cache file path");
    kernel->add_option("--png", kernel_png, "write the max projection as PNG");

    RunArgs serve_args;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "HTTP service for interactive tuning");
    add_run_inputs(*serve, serve_args);
    serve->add_option("--host", host, "listen address");
    serve->add_option("--port", port, "listen port (0 = any free port)");

    std::string fixture, synth_dir;
    auto* synth = app.add_subcommand("synth", "write a synthetic fixture pair");
    synth->add_option("--fixture", fixture, "fixture name")->required()->check(CLI::IsMember(synth::fixture_names()));
    synth->add_option("--out", synth_dir, "output directory (default $VESSEL_OUT_DIR)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_args, out, err);
        if (*kernel) return cmd_kernel(kernel_params, kernel_size, kernel_cache, kernel_file, kernel_png, out, err);
        if (*serve) return cmd_serve(serve_args, host, port, out);
        if (*synth) return cmd_synth(fixture, synth_dir, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace vessel
