#include "vessel/service.hpp"

#include "vessel/error.hpp"
#include "vessel/imageio.hpp"
#include "vessel/render.hpp"
#include "vessel/report.hpp"

#include <httplib.h>

#include <charconv>

namespace vessel {

namespace {

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message, const std::string& field = {}) {
    Json j = Json::object();
    j["error"] = message;
    if (!field.empty()) j["field"] = field;
    return json_response(status, j);
}

template <typename F>
HttpResponse guarded(F&& f) {
    try {
        return f();
    } catch (const Json::parse_error& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what(), "body");
    } catch (const InvalidArgument& e) {
        return error_response(422, e.what(), e.field());
    } catch (const DegenerateInput& e) {
        return error_response(422, e.what(), "patch");
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Image2D upscale(const Image2D& img, int scale) {
    Image2D out(img.rows() * scale, img.cols() * scale);
    for (Eigen::Index y = 0; y < out.rows(); ++y)
        for (Eigen::Index x = 0; x < out.cols(); ++x) out(y, x) = img(y / scale, x / scale);
    return out;
}

int parse_int(const std::string& key, const std::string& text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("cannot parse '" + text + "'", key);
    return v;
}

}  // namespace

struct Service::Impl {
    Image2D image;
    SoftSegmentation seg;
    RunConfig config;
    PatchPlan plan;
    KernelCache cache;
    httplib::Server server;

    Impl(Image2D img, SoftSegmentation s, RunConfig cfg)
        : image(std::move(img)), seg(std::move(s)), config(std::move(cfg)), cache(config.cache_dir) {}

    const PatchSpec* find(int id) const {
        if (id < 0 || id >= static_cast<int>(plan.patches.size())) return nullptr;
        return &plan.patches[static_cast<std::size_t>(id)];
    }
};

Service::Service(Image2D image, SoftSegmentation seg, RunConfig config)
    : impl_(std::make_unique<Impl>(std::move(image), std::move(seg), std::move(config))) {
    impl_->config.validate();
    impl_->plan = plan_patches(impl_->image, impl_->seg, impl_->config.patching);

    auto& srv = impl_->server;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    auto send = [](httplib::Response& res, const HttpResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    srv.Get("/patches", [this, send](const httplib::Request&, httplib::Response& res) { send(res, patches()); });
    srv.Get(R"(/patch/(\d+)/image)", [this, send](const httplib::Request& req, httplib::Response& res) {
        const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "image";
        send(res, guarded([&] { return patch_image(parse_int("id", req.matches[1]), kind); }));
    });
    srv.Post(R"(/patch/(\d+)/cluster)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, guarded([&] { return cluster(parse_int("id", req.matches[1]), req.body); }));
    });
    srv.Get("/kernel/preview", [this, send](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query[k] = v;
        send(res, kernel_preview(query));
    });
    srv.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const int status = res.status;
            send(res, error_response(status, status == 404 ? "not found" : "request failed"));
        }
    });
}

Service::~Service() { stop(); }

const PatchPlan& Service::plan() const { return impl_->plan; }

HttpResponse Service::patches() const {
    Json list = Json::array();
    for (const auto& p : impl_->plan.patches)
        list.push_back(patch_spec_to_json(
            p, patch_rect(p, static_cast<int>(impl_->image.cols()), static_cast<int>(impl_->image.rows()))));
    Json j = Json::object();
    j["width"] = impl_->image.cols();
    j["height"] = impl_->image.rows();
    j["defaults"] = params_to_json(impl_->config.defaults);
    j["patches"] = list;
    return json_response(200, j);
}

HttpResponse Service::patch_image(int id, const std::string& kind) const {
    const PatchSpec* spec = impl_->find(id);
    if (!spec) return error_response(404, "unknown patch " + std::to_string(id), "id");
    const PixelRect r = patch_rect(*spec, static_cast<int>(impl_->image.cols()), static_cast<int>(impl_->image.rows()));
    const Image2D* src = nullptr;
    if (kind == "image") src = &impl_->image;
    else if (kind == "seg") src = &impl_->seg;
    else return error_response(422, "must be 'image' or 'seg'", "kind");
    const Image2D crop = src->block(r.y, r.x, r.height, r.width);
    return {200, "image/png", encode_png(crop)};
}

HttpResponse Service::cluster(int id, const std::string& body) {
    return guarded([&] {
        const PatchSpec* spec = impl_->find(id);
        if (!spec) return error_response(404, "unknown patch " + std::to_string(id), "id");
        const Json parsed = body.empty() ? Json() : Json::parse(body);
        const ClusterParams params = params_from_json(parsed, impl_->config.params_for(id));
        const PatchResult r = run_patch(impl_->image, impl_->seg, *spec, params, impl_->cache);
        return json_response(200, patch_result_to_json(r));
    });
}

HttpResponse Service::kernel_preview(const std::map<std::string, std::string>& query) {
    return guarded([&] {
        ClusterParams p = impl_->config.defaults;
        int size = 21, scale = 8;
        for (const auto& [k, v] : query) {
            if (k == "size") size = parse_int(k, v);
            else if (k == "scale") scale = parse_int(k, v);
            else p.set(k, v);
        }
        if (size < 1 || size > 100) throw InvalidArgument("must lie in [1, 100]", "size");
        if (scale < 1 || scale > 32) throw InvalidArgument("must lie in [1, 32]", "scale");
        p.validate();
        const auto grid = impl_->cache.get(p.kernel_params(size));
        return HttpResponse{200, "image/png", encode_png(upscale(kernel_projection(*grid), scale))};
    });
}

int Service::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace vessel
