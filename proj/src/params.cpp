#include "vessel/params.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <type_traits>

namespace vessel {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
    if (first < last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last)
        throw InvalidArgument("cannot parse '" + text + "'", key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw InvalidArgument("must be finite", key);
    }
    return value;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

const std::vector<std::string>& cluster_param_keys() {
    static const std::vector<std::string> keys = {
        "H",       "sigma",       "sigma2", "epsilon", "tau",          "min_size",     "n_paths",
        "n_theta", "delta_s", "grid_radius", "seed", "wavelet_size", "spline_order", "inflection"};
    return keys;
}

namespace {

void check_field(const ClusterParams& p, const std::string& key) {
    if (key == "H" && p.H < 0) throw InvalidArgument("must be >= 1, or 0 for automatic", key);
    if (key == "sigma" && (!(p.sigma > 0.0) || !std::isfinite(p.sigma))) throw InvalidArgument("must be > 0", key);
    if (key == "sigma2" && (!(p.sigma2 > 0.0) || !std::isfinite(p.sigma2))) throw InvalidArgument("must be > 0", key);
    if (key == "epsilon" && !(p.epsilon > 0.0 && p.epsilon < 1.0)) throw InvalidArgument("must lie in (0, 1)", key);
    if (key == "tau" && p.tau < 1) throw InvalidArgument("must be >= 1", key);
    if (key == "min_size" && p.min_size < 1) throw InvalidArgument("must be >= 1", key);
    if (key == "n_paths" && p.n_paths < 1) throw InvalidArgument("must be >= 1", key);
    if (key == "n_theta" && (p.n_theta < 4 || p.n_theta % 2 != 0)) throw InvalidArgument("must be even and >= 4", key);
    if (key == "delta_s" && (!(p.delta_s > 0.0) || !std::isfinite(p.delta_s))) throw InvalidArgument("must be > 0", key);
    if (key == "grid_radius" && p.grid_radius < 0) throw InvalidArgument("must be >= 0", key);
    if (key == "wavelet_size" && (p.wavelet_size < 7 || p.wavelet_size % 2 == 0))
        throw InvalidArgument("must be odd and >= 7", key);
    if (key == "spline_order" && (p.spline_order < 1 || p.spline_order > 5)) throw InvalidArgument("must lie in [1, 5]", key);
    if (key == "inflection" && !(p.inflection > 0.0 && p.inflection <= 1.0)) throw InvalidArgument("must lie in (0, 1]", key);
}

}  // namespace

void ClusterParams::validate() const {
    for (const auto& key : cluster_param_keys()) check_field(*this, key);
}

int ClusterParams::resolved_H(int patch_size) const {
    if (H > 0) return H;
    return std::max(1, static_cast<int>(std::lround(patch_size / 3.0)));
}

KernelParams ClusterParams::kernel_params(int patch_size) const {
    KernelParams k;
    k.H = resolved_H(patch_size);
    k.n_paths = n_paths;
    k.sigma = sigma;
    k.delta_s = delta_s;
    k.n_theta = n_theta;
    k.grid_radius = grid_radius;
    k.seed = seed;
    return k;
}

CakeWaveletParams ClusterParams::wavelet_params(int size) const {
    CakeWaveletParams w;
    w.n_orientations = n_theta;
    w.size = size;
    w.spline_order = spline_order;
    w.inflection = inflection;
    return w;
}

void ClusterParams::set(const std::string& key, const std::string& value) {
    ClusterParams next = *this;
    if (key == "H") next.H = parse_number<int>(key, value);
    else if (key == "sigma") next.sigma = parse_number<double>(key, value);
    else if (key == "sigma2") next.sigma2 = parse_number<double>(key, value);
    else if (key == "epsilon") next.epsilon = parse_number<double>(key, value);
    else if (key == "tau") next.tau = parse_number<int>(key, value);
    else if (key == "min_size") next.min_size = parse_number<int>(key, value);
    else if (key == "n_paths" || key == "n") next.n_paths = parse_number<std::uint64_t>("n_paths", value);
    else if (key == "n_theta") next.n_theta = parse_number<int>(key, value);
    else if (key == "delta_s") next.delta_s = parse_number<double>(key, value);
    else if (key == "grid_radius") next.grid_radius = parse_number<int>(key, value);
    else if (key == "seed") next.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "wavelet_size") next.wavelet_size = parse_number<int>(key, value);
    else if (key == "spline_order") next.spline_order = parse_number<int>(key, value);
    else if (key == "inflection") next.inflection = parse_number<double>(key, value);
    else throw InvalidArgument("unknown parameter", key);
    check_field(next, key == "n" ? "n_paths" : key);
    *this = next;
}

std::vector<std::pair<std::string, std::string>> ClusterParams::entries() const {
    return {{"H", std::to_string(H)},
            {"sigma", format_double(sigma)},
            {"sigma2", format_double(sigma2)},
            {"epsilon", format_double(epsilon)},
            {"tau", std::to_string(tau)},
            {"min_size", std::to_string(min_size)},
            {"n_paths", std::to_string(n_paths)},
            {"n_theta", std::to_string(n_theta)},
            {"delta_s", format_double(delta_s)},
            {"grid_radius", std::to_string(grid_radius)},
            {"seed", std::to_string(seed)},
            {"wavelet_size", std::to_string(wavelet_size)},
            {"spline_order", std::to_string(spline_order)},
            {"inflection", format_double(inflection)}};
}

bool operator==(const ClusterParams& a, const ClusterParams& b) { return a.entries() == b.entries(); }

}  // namespace vessel
