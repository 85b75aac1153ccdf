#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "vessel/commands.hpp"
#include "vessel/config.hpp"
#include "vessel/error.hpp"
#include "vessel/imageio.hpp"
#include "vessel/report.hpp"
#include "vessel/service.hpp"
#include "vessel/synth.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

using namespace vessel;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Writes the crossing fixture and a config that puts one patch over it.
fs::path crossing_setup(const std::string& name) {
    const fs::path dir = oracle::scratch_dir(name);
    const auto f = synth::crossing();
    save_grayscale(dir / "image.png", f.image);
    save_grayscale(dir / "seg.png", f.seg);
    std::ofstream(dir / "run.cfg") << "# crossing fixture\n"
                                      "image = image.png\n"
                                      "seg = seg.png\n"
                                      "out = out\n"
                                      "cache_dir = cache\n"
                                      "initial_size = 25\n"
                                      "\n"
                                      "H = 7\n"
                                      "sigma = 0.05\n"
                                      "sigma2 = 0.1\n";
    return dir;
}

RunConfig crossing_config(const fs::path& dir) {
    RunConfig cfg;
    load_config(dir / "run.cfg", cfg);
    return cfg;
}

Service crossing_service(const fs::path& dir) {
    const RunConfig cfg = crossing_config(dir);
    return Service(load_grayscale(cfg.image).pixels, load_grayscale(cfg.seg).pixels, cfg);
}

Json body_of(const HttpResponse& r) { return Json::parse(r.body); }

}  // namespace

TEST_CASE("config files") {
    const fs::path dir = oracle::scratch_dir("config");
    std::istringstream text("image = a.png\nseg=b.png  # trailing comment\nnormalize_window = 15\nthreads = 2\n"
                            "max_size = 80\nsigma = 0.2\nn = 500\n\n[patch 3]\nsigma2 = 0.5\ntau = 90\n");
    RunConfig cfg;
    parse_config(text, cfg, dir);
    CHECK(cfg.image == dir / "a.png");
    CHECK(cfg.seg == dir / "b.png");
    CHECK(cfg.normalize_window == 15);
    CHECK(cfg.threads == 2);
    CHECK(cfg.patching.max_size == 80);
    CHECK(cfg.defaults.sigma == 0.2);
    CHECK(cfg.defaults.n_paths == 500);
    CHECK(cfg.params_for(0) == cfg.defaults);
    CHECK(cfg.params_for(3).sigma2 == 0.5);
    CHECK(cfg.params_for(3).tau == 90);
    CHECK(cfg.params_for(3).sigma == 0.2);
    CHECK(cfg.run_options().params_for(3).tau == 90);

    auto line_of_error = [](const std::string& body) {
        RunConfig c;
        std::istringstream in(body);
        try {
            parse_config(in, c);
        } catch (const InvalidArgument& e) {
            return std::string(e.what());
        }
        return std::string("ok");
    };
    CHECK(line_of_error("sigma = 0.1\nbogus = 1\n").find("line 2") != std::string::npos);
    CHECK(line_of_error("sigma2 = -1\n").find("sigma2") != std::string::npos);
    CHECK(line_of_error("[patch x]\n") != "ok");
    CHECK(line_of_error("[patch 1]\nimage = a.png\n") != "ok");
    CHECK(line_of_error("novalue\n") != "ok");
}

TEST_CASE("patch sections round trip through the config grammar") {
    ClusterParams base;
    ClusterParams tuned = base;
    tuned.sigma = 0.0123456789;
    tuned.sigma2 = 0.7;
    tuned.n_paths = 4321;
    tuned.seed = 99;
    const std::string section = format_patch_section(4, tuned, base);
    CHECK(section.rfind("[patch 4]", 0) == 0);
    CHECK(section.find("epsilon") == std::string::npos);
    RunConfig cfg;
    std::istringstream in(section);
    parse_config(in, cfg);
    CHECK(cfg.params_for(4) == tuned);
    CHECK(format_patch_section(2, base, base) == "[patch 2]\n");
}

TEST_CASE("run writes a manifest and per-patch files") {
    const fs::path dir = crossing_setup("cli_run");
    const CliResult r = cli({"run", "--config", (dir / "run.cfg").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("2 clusters") != std::string::npos);
    const fs::path out = dir / "out";
    REQUIRE(fs::exists(out / "manifest.json"));
    const Json m = Json::parse(slurp(out / "manifest.json"));
    CHECK(m["image"] == "image.png");
    CHECK(m["width"] == 25);
    REQUIRE(m["patches"].size() == 1);
    CHECK(m["patches"][0]["n_clusters"] == 2);
    CHECK(m["n_failed"] == 0);
    int pngs = 0, csvs = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        pngs += e.path().extension() == ".png";
        csvs += e.path().extension() == ".csv";
    }
    CHECK(pngs >= 2);
    CHECK(csvs >= 1);
    const auto overlay = load_grayscale(out / "patch_0_overlay.png");
    CHECK(overlay.green_channel);
    CHECK(overlay.pixels.cols() == 25 * 8);
    CHECK(load_grayscale(out / "patch_0_labels.png").bit_depth == 16);
    CHECK(fs::exists(dir / "cache"));

    // A repeated run produces a byte-identical manifest.
    const std::string first = slurp(out / "manifest.json");
    CHECK(cli({"run", "--config", (dir / "run.cfg").string(), "--threads", "2"}).code == kExitOk);
    CHECK(slurp(out / "manifest.json") == first);
}

TEST_CASE("command-line parameters override the config and are validated") {
    const fs::path dir = crossing_setup("cli_args");
    const CliResult bad = cli({"run", "--config", (dir / "run.cfg").string(), "--sigma2", "0"});
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("sigma2") != std::string::npos);
    const CliResult neg = cli({"kernel", "--sigma", "-1"});
    CHECK(neg.code == kExitUsage);
    CHECK(neg.err.find("sigma") != std::string::npos);
    CHECK(cli({"kernel", "--bogus", "1"}).code == kExitUsage);
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"run", "--image", (dir / "missing.png").string(), "--seg", (dir / "seg.png").string(), "--out",
               (dir / "o").string()})
              .code == kExitIo);
    CHECK(cli({"run", "--seg", (dir / "seg.png").string()}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("kernel command is deterministic and fast") {
    const fs::path dir = oracle::scratch_dir("cli_kernel");
    const auto start = std::chrono::steady_clock::now();
    const CliResult a = cli({"kernel", "--H", "7", "--sigma", "0.02", "--n", "100000", "--file",
                             (dir / "a.bin").string(), "--png", (dir / "a.png").string()});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(a.code == kExitOk);
    CHECK(seconds < 10.0);
    CHECK(a.out.find("mass=7e+05") != std::string::npos);
    CHECK(cli({"kernel", "--H", "7", "--sigma", "0.02", "--n", "100000", "--file", (dir / "b.bin").string()}).code ==
          kExitOk);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    CHECK(load_grayscale(dir / "a.png").pixels.rows() == 15);

    const CliResult small = cli({"kernel", "--H", "7", "--grid_radius", "3", "--n", "1000", "--cache-dir",
                                 (dir / "cache").string()});
    CHECK(small.code == kExitOk);
    CHECK(small.err.find("warning") != std::string::npos);
    CHECK(fs::exists(dir / "cache"));
}

TEST_CASE("output locations default to VESSEL_OUT_DIR") {
    const fs::path dir = oracle::scratch_dir("cli_env");
    ::setenv("VESSEL_OUT_DIR", dir.c_str(), 1);
    const CliResult r = cli({"synth", "--fixture", "bifurcation"});
    ::unsetenv("VESSEL_OUT_DIR");
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(dir / "bifurcation_image.png"));
    CHECK(fs::exists(dir / "bifurcation_seg.png"));
    CHECK(cli({"synth", "--fixture", "nothing"}).code == kExitUsage);
}

TEST_CASE("service patch list and crops") {
    const fs::path dir = crossing_setup("service_list");
    Service service = crossing_service(dir);
    const HttpResponse list = service.patches();
    CHECK(list.status == 200);
    const Json j = body_of(list);
    CHECK(j["width"] == 25);
    REQUIRE(j["patches"].size() == 1);
    CHECK(j["patches"][0]["id"] == 0);
    CHECK(j["defaults"]["sigma2"] == 0.1);

    const HttpResponse img = service.patch_image(0);
    CHECK(img.status == 200);
    CHECK(img.content_type == "image/png");
    CHECK(service.patch_image(0, "seg").body != img.body);
    CHECK(service.patch_image(0, "depth").status == 422);
    CHECK(service.patch_image(7).status == 404);
}

TEST_CASE("service clustering") {
    const fs::path dir = crossing_setup("service_cluster");
    Service service = crossing_service(dir);

    const HttpResponse first = service.cluster(0, "{}");
    REQUIRE(first.status == 200);
    const Json j = body_of(first);
    CHECK(j["n_clusters"] == 2);
    CHECK(j["K"] == 2);
    CHECK(service.cluster(0, "").body == first.body);
    CHECK(service.cluster(0, "{}").body == first.body);

    const HttpResponse tuned = service.cluster(0, R"({"sigma2": 1.0, "tau": "20"})");
    CHECK(tuned.status == 200);
    CHECK(body_of(tuned)["params"]["tau"] == 20);

    for (const char* eps : {R"({"epsilon": 0})", R"({"epsilon": 1})", R"({"epsilon": -0.5})"}) {
        const HttpResponse bad = service.cluster(0, eps);
        CHECK(bad.status == 422);
        CHECK(body_of(bad)["field"] == "epsilon");
    }
    CHECK(body_of(service.cluster(0, R"({"H": 0.5})"))["field"] == "H");
    CHECK(service.cluster(0, "{not json").status == 400);
    CHECK(service.cluster(3, "{}").status == 404);
    CHECK(service.cluster(-1, "{}").status == 404);
}

TEST_CASE("service responses agree with the run manifest") {
    const fs::path dir = crossing_setup("service_manifest");
    REQUIRE(cli({"run", "--config", (dir / "run.cfg").string()}).code == kExitOk);
    const Json manifest = Json::parse(slurp(dir / "out" / "manifest.json"));
    Service service = crossing_service(dir);
    const Json served = body_of(service.cluster(0, "{}"));
    const Json& recorded = manifest["patches"][0];
    REQUIRE(served.size() == recorded.size());
    for (const auto& [key, value] : recorded.items()) {
        CAPTURE(key);
        CHECK(served[key] == value);
    }
}

TEST_CASE("kernel preview") {
    const fs::path dir = crossing_setup("service_kernel");
    Service service = crossing_service(dir);
    const HttpResponse ok = service.kernel_preview({{"H", "5"}, {"n", "2000"}, {"scale", "2"}});
    CHECK(ok.status == 200);
    CHECK(ok.content_type == "image/png");
    std::ofstream(dir / "preview.png", std::ios::binary) << ok.body;
    CHECK(load_grayscale(dir / "preview.png").pixels.rows() == 22);
    CHECK(service.kernel_preview({{"sigma", "-1"}}).status == 422);
    CHECK(body_of(service.kernel_preview({{"size", "abc"}}))["field"] == "size");
    CHECK(service.kernel_preview({{"scale", "99"}}).status == 422);
}

TEST_CASE("the service answers over HTTP") {
    const fs::path dir = crossing_setup("service_http");
    Service service = crossing_service(dir);
    const int port = service.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&] { service.serve(); });
    service.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    const auto list = client.Get("/patches");
    REQUIRE(list);
    CHECK(list->status == 200);
    CHECK(list->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(Json::parse(list->body)["patches"].size() == 1);

    const auto posted = client.Post("/patch/0/cluster", "{}", "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    CHECK(posted->body == service.cluster(0, "{}").body);

    const auto bad = client.Post("/patch/0/cluster", R"({"epsilon": 2})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 422);
    const auto crop = client.Get("/patch/0/image?kind=seg");
    REQUIRE(crop);
    CHECK(crop->get_header_value("Content-Type") == "image/png");
    const auto missing = client.Get("/nowhere");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(Json::parse(missing->body).contains("error"));
    const auto preflight = client.Options("/patch/0/cluster");
    REQUIRE(preflight);
    CHECK(preflight->status == 204);

    service.stop();
    server.join();
}
