#include "vessel/morphology.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>

namespace vessel {

namespace {

// Ring order: E, NE, N, NW, W, SW, S, SE (counter-clockwise with y up).
constexpr std::array<int, 8> kRingDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kRingDy = {0, -1, -1, -1, 0, 1, 1, 1};

bool at(const BinaryMask& m, int x, int y) {
    return x >= 0 && y >= 0 && x < m.cols() && y < m.rows() && m(y, x);
}

std::array<int, 8> ring(const BinaryMask& m, int x, int y) {
    std::array<int, 8> r{};
    for (int k = 0; k < 8; ++k) r[k] = at(m, x + kRingDx[k], y + kRingDy[k]) ? 1 : 0;
    return r;
}

// Yokoi connectivity number for 8-connected foreground.
int yokoi8(const std::array<int, 8>& r) {
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = 1 - r[k], b = 1 - r[(k + 1) % 8], c = 1 - r[(k + 2) % 8];
        n += a - a * b * c;
    }
    return n;
}

}  // namespace

int neighbour_count(const BinaryMask& mask, int x, int y) {
    const auto r = ring(mask, x, y);
    return std::accumulate(r.begin(), r.end(), 0);
}

int crossing_number(const BinaryMask& mask, int x, int y) {
    const auto r = ring(mask, x, y);
    int n = 0;
    for (int k = 0; k < 8; ++k) n += (r[k] == 0 && r[(k + 1) % 8] == 1) ? 1 : 0;
    return n;
}

BinaryMask skeletonize(const BinaryMask& mask) {
    if (mask.size() == 0 || !mask.any()) throw InvalidArgument("empty mask", "mask");
    BinaryMask out = mask;
    const int h = static_cast<int>(out.rows()), w = static_cast<int>(out.cols());
    // 4-neighbour that must be background for a pixel to be peeled: N, S, E, W.
    constexpr std::array<std::array<int, 2>, 4> kSides = {{{0, -1}, {0, 1}, {1, 0}, {-1, 0}}};

    auto removable = [&](int x, int y, const std::array<int, 2>& side) {
        if (!out(y, x) || at(out, x + side[0], y + side[1])) return false;
        const auto r = ring(out, x, y);
        const int neighbours = std::accumulate(r.begin(), r.end(), 0);
        return neighbours >= 2 && yokoi8(r) == 1;
    };

    bool changed = true;
    std::vector<std::array<int, 2>> candidates;
    while (changed) {
        changed = false;
        for (const auto& side : kSides) {
            candidates.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (removable(x, y, side)) candidates.push_back({x, y});
            for (const auto& [x, y] : candidates) {
                if (removable(x, y, side)) {
                    out(y, x) = false;
                    changed = true;
                }
            }
        }
    }
    return out;
}

Raster<int> label_components(const BinaryMask& mask, int connectivity, int* count) {
    if (connectivity != 4 && connectivity != 8) throw InvalidArgument("must be 4 or 8", "connectivity");
    const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
    Raster<int> labels = Raster<int>::Zero(h, w);
    int next = 0;
    std::queue<std::array<int, 2>> frontier;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x) || labels(y, x) != 0) continue;
            labels(y, x) = ++next;
            frontier.push({x, y});
            while (!frontier.empty()) {
                const auto [cx, cy] = frontier.front();
                frontier.pop();
                for (int k = 0; k < 8; ++k) {
                    if (connectivity == 4 && k % 2 == 1) continue;
                    const int nx = cx + kRingDx[k], ny = cy + kRingDy[k];
                    if (at(mask, nx, ny) && labels(ny, nx) == 0) {
                        labels(ny, nx) = next;
                        frontier.push({nx, ny});
                    }
                }
            }
        }
    }
    if (count) *count = next;
    return labels;
}

int count_components(const BinaryMask& mask, int connectivity) {
    int n = 0;
    label_components(mask, connectivity, &n);
    return n;
}

std::vector<Junction> detect_junctions(const BinaryMask& skeleton, double fuse_distance) {
    std::vector<std::array<int, 2>> pixels;
    for (int y = 0; y < skeleton.rows(); ++y)
        for (int x = 0; x < skeleton.cols(); ++x)
            if (skeleton(y, x) && crossing_number(skeleton, x, y) >= 3) pixels.push_back({x, y});

    std::vector<int> parent(pixels.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < pixels.size(); ++i)
        for (std::size_t j = i + 1; j < pixels.size(); ++j) {
            const int d = std::max(std::abs(pixels[i][0] - pixels[j][0]), std::abs(pixels[i][1] - pixels[j][1]));
            if (d <= fuse_distance) parent[find(static_cast<int>(j))] = find(static_cast<int>(i));
        }

    std::vector<Junction> sums(pixels.size());
    std::vector<int> members(pixels.size(), 0);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const int root = find(static_cast<int>(i));
        sums[root].x += pixels[i][0];
        sums[root].y += pixels[i][1];
        ++members[root];
    }
    std::vector<Junction> out;
    for (std::size_t i = 0; i < pixels.size(); ++i)
        if (members[i] > 0) out.push_back({sums[i].x / members[i], sums[i].y / members[i]});
    std::sort(out.begin(), out.end(), [](const Junction& a, const Junction& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return out;
}

}  // namespace vessel
