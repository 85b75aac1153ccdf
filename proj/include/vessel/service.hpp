#pragma once

#include "vessel/config.hpp"
#include "vessel/pipeline.hpp"

#include <map>
#include <memory>
#include <string>

namespace vessel {

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// HTTP front end over one loaded image pair. Endpoints:
///
///     GET  /patches               patch list
///     GET  /patch/{id}/image      crop as PNG (?kind=seg for the soft map)
///     POST /patch/{id}/cluster    body: JSON parameter overrides
///     GET  /kernel/preview        max-projection PNG; query: parameters, size, scale
///
/// Errors are JSON {"error": ..., "field": ...}: 400 malformed body, 404
/// unknown patch, 422 invalid parameters or degenerate patch. The handlers
/// are callable directly, without a socket.
class Service {
public:
    Service(Image2D image, SoftSegmentation seg, RunConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    HttpResponse patches() const;
    HttpResponse patch_image(int id, const std::string& kind = "image") const;
    HttpResponse cluster(int id, const std::string& body);
    HttpResponse kernel_preview(const std::map<std::string, std::string>& query);

    const PatchPlan& plan() const;

    /// Binds the listening socket; port 0 picks a free one. Returns the port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace vessel
