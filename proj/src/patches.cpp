#include "vessel/patches.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vessel {

namespace {

constexpr int kCoverMargin = 4;

struct Box {
    double x0, y0, x1, y1;
    double extent() const { return std::max(x1 - x0, y1 - y0); }
};

Box bounds(const std::vector<Junction>& js) {
    Box b{js[0].x, js[0].y, js[0].x, js[0].y};
    for (const auto& j : js) {
        b.x0 = std::min(b.x0, j.x);
        b.y0 = std::min(b.y0, j.y);
        b.x1 = std::max(b.x1, j.x);
        b.y1 = std::max(b.y1, j.y);
    }
    return b;
}

}  // namespace

PixelRect patch_rect(const PatchSpec& spec, int image_width, int image_height) {
    const int x0 = static_cast<int>(std::lround(spec.cx)) - spec.size / 2;
    const int y0 = static_cast<int>(std::lround(spec.cy)) - spec.size / 2;
    const int x1 = std::min(image_width, x0 + spec.size);
    const int y1 = std::min(image_height, y0 + spec.size);
    PixelRect r;
    r.x = std::max(0, x0);
    r.y = std::max(0, y0);
    r.width = std::max(0, x1 - r.x);
    r.height = std::max(0, y1 - r.y);
    return r;
}

std::vector<PatchSpec> build_patches(const std::vector<Junction>& junctions, int initial_size, int max_size) {
    if (initial_size < 1) throw InvalidArgument("must be >= 1", "initial_size");
    if (max_size < initial_size) throw InvalidArgument("must be >= initial_size", "max_size");

    std::vector<PatchSpec> patches;
    for (const auto& j : junctions) patches.push_back({0, j.x, j.y, initial_size, {j}});

    const std::size_t m = patches.size();
    // Closest junction-to-junction distance between live patches.
    std::vector<std::vector<double>> link(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            link[i][j] = std::hypot(junctions[i].x - junctions[j].x, junctions[i].y - junctions[j].y);
    std::vector<bool> alive(m, true);

    for (;;) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < m; ++j) {
                if (!alive[j]) continue;
                const double d = std::hypot(patches[i].cx - patches[j].cx, patches[i].cy - patches[j].cy);
                if (d >= best) continue;
                const bool near = d < 0.5 * std::max(patches[i].size, patches[j].size) || link[i][j] < 0.5 * initial_size;
                if (!near) continue;
                std::vector<Junction> merged = patches[i].junctions;
                merged.insert(merged.end(), patches[j].junctions.begin(), patches[j].junctions.end());
                if (bounds(merged).extent() + kCoverMargin > max_size) continue;
                best = d;
                bi = i;
                bj = j;
            }
        }
        if (!std::isfinite(best)) break;

        PatchSpec& a = patches[bi];
        const PatchSpec& b = patches[bj];
        a.junctions.insert(a.junctions.end(), b.junctions.begin(), b.junctions.end());
        const Box box = bounds(a.junctions);
        a.cx = 0.5 * (box.x0 + box.x1);
        a.cy = 0.5 * (box.y0 + box.y1);
        const double wanted = std::max(std::ceil(3.0 * best - 1e-9), std::ceil(box.extent()) + kCoverMargin);
        a.size = static_cast<int>(std::clamp(wanted, static_cast<double>(initial_size), static_cast<double>(max_size)));
        alive[bj] = false;
        for (std::size_t k = 0; k < m; ++k) {
            link[bi][k] = link[k][bi] = std::min(link[bi][k], link[bj][k]);
        }
    }

    std::vector<PatchSpec> out;
    for (std::size_t i = 0; i < m; ++i)
        if (alive[i]) out.push_back(std::move(patches[i]));
    for (auto& p : out)
        std::sort(p.junctions.begin(), p.junctions.end(),
                  [](const Junction& a, const Junction& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    std::sort(out.begin(), out.end(),
              [](const PatchSpec& a, const PatchSpec& b) { return a.cy != b.cy ? a.cy < b.cy : a.cx < b.cx; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
    return out;
}

}  // namespace vessel
