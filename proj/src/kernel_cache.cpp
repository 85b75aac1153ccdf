#include "vessel/error.hpp"
#include "vessel/kernel.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vessel {

namespace {

constexpr char kMagic[8] = {'V', 'K', 'G', 'R', 'I', 'D', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.write(bytes, sizeof(T));
}

template <typename T>
T take(std::istream& in) {
    char bytes[sizeof(T)];
    if (!in.read(bytes, sizeof(T))) throw IoError("truncated kernel cache");
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_kernel(std::ostream& out, const KernelGrid& grid) {
    const KernelParams& p = grid.params();
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.H));
    put<std::uint64_t>(out, p.n_paths);
    put<double>(out, p.sigma);
    put<double>(out, p.delta_s);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.n_theta));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.radius()));
    put<std::uint64_t>(out, p.seed);
    put<std::uint64_t>(out, grid.histogram().size());
    for (double c : grid.histogram()) put<double>(out, c);
    if (!out) throw IoError("kernel cache write failed");
}

KernelGrid read_kernel(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw IoError("not a kernel cache file");
    KernelParams p;
    p.H = static_cast<int>(take<std::uint32_t>(in));
    p.n_paths = take<std::uint64_t>(in);
    p.sigma = take<double>(in);
    p.delta_s = take<double>(in);
    p.n_theta = static_cast<int>(take<std::uint32_t>(in));
    p.grid_radius = static_cast<int>(take<std::uint32_t>(in));
    p.seed = take<std::uint64_t>(in);
    p.validate();
    const auto n = take<std::uint64_t>(in);
    const std::uint64_t side = 2 * static_cast<std::uint64_t>(p.grid_radius) + 1;
    if (n != side * side * 2 * static_cast<std::uint64_t>(p.n_theta)) throw IoError("kernel cache size mismatch");
    std::vector<double> counts(n);
    for (auto& c : counts) c = take<double>(in);
    return KernelGrid(p, std::move(counts));
}

void save_kernel(const std::filesystem::path& path, const KernelGrid& grid) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        write_kernel(out, grid);
    }
    std::filesystem::rename(tmp, path);
}

KernelGrid load_kernel(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_kernel(in);
}

std::string kernel_cache_name(const KernelParams& params) {
    std::ostringstream s;
    s << "kernel_" << std::hex << std::setw(16) << std::setfill('0') << params_hash(params) << ".bin";
    return s.str();
}

KernelCache::KernelCache(std::filesystem::path directory) : directory_(std::move(directory)) {}

std::shared_ptr<const KernelGrid> KernelCache::get(const KernelParams& params) {
    params.validate();
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mutex_);
        auto& entry = slots_[params_hash(params)];
        if (!entry) entry = std::make_shared<Slot>();
        slot = entry;
    }
    std::call_once(slot->once, [&] {
        if (!directory_.empty()) {
            const auto file = directory_ / kernel_cache_name(params);
            if (std::filesystem::exists(file)) {
                try {
                    auto grid = std::make_shared<KernelGrid>(load_kernel(file));
                    if (grid->params() == params) {
                        slot->grid = std::move(grid);
                        return;
                    }
                } catch (const Error&) {
                    // unreadable cache entry; rebuild below
                }
            }
            auto grid = std::make_shared<KernelGrid>(estimate_kernel(params));
            std::filesystem::create_directories(directory_);
            save_kernel(file, *grid);
            slot->grid = std::move(grid);
            return;
        }
        slot->grid = std::make_shared<KernelGrid>(estimate_kernel(params));
    });
    return slot->grid;
}

std::size_t KernelCache::size() const {
    std::lock_guard lock(mutex_);
    return slots_.size();
}

}  // namespace vessel
