#include "vessel/config.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace vessel {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
        throw InvalidArgument("cannot parse '" + value + "'", key);
    return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base) {
    if (key == "image") image = resolve(base, value);
    else if (key == "seg") seg = resolve(base, value);
    else if (key == "out") out = resolve(base, value);
    else if (key == "cache_dir") cache_dir = resolve(base, value);
    else if (key == "normalize_window") normalize_window = parse_int(key, value);
    else if (key == "initial_size") patching.initial_size = parse_int(key, value);
    else if (key == "max_size") patching.max_size = parse_int(key, value);
    else if (key == "threads") threads = static_cast<unsigned>(std::max(0, parse_int(key, value)));
    else defaults.set(key, value);
}

ClusterParams RunConfig::params_for(int patch_id) const {
    ClusterParams p = defaults;
    const auto it = overrides.find(patch_id);
    if (it != overrides.end())
        for (const auto& [k, v] : it->second) p.set(k, v);
    return p;
}

ImageRunOptions RunConfig::run_options() const {
    ImageRunOptions o;
    o.patching = patching;
    o.defaults = defaults;
    o.threads = threads;
    for (const auto& [id, kv] : overrides) o.overrides[id] = params_for(id);
    return o;
}

void RunConfig::validate() const {
    defaults.validate();
    for (const auto& [id, kv] : overrides) params_for(id).validate();
    if (normalize_window != 0 && (normalize_window < 3 || normalize_window % 2 == 0))
        throw InvalidArgument("must be 0 or an odd number >= 3", "normalize_window");
    if (patching.initial_size < 1) throw InvalidArgument("must be >= 1", "initial_size");
    if (patching.max_size < patching.initial_size || patching.max_size > 100)
        throw InvalidArgument("must lie in [initial_size, 100]", "max_size");
}

void parse_config(std::istream& in, RunConfig& cfg, const std::filesystem::path& base) {
    std::string line;
    int line_no = 0;
    int section = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (text.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (text.front() == '[') {
            std::istringstream hdr(text.substr(1));
            std::string word;
            int id = -1;
            char close = 0;
            if (!(hdr >> word >> id >> close) || word != "patch" || close != ']' || id < 0)
                throw InvalidArgument(where + "expected '[patch <id>]'", "config");
            section = id;
            cfg.overrides[id];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw InvalidArgument(where + "expected 'key = value'", "config");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        try {
            if (section < 0) {
                cfg.set(key, value, base);
            } else {
                ClusterParams probe = cfg.defaults;
                probe.set(key, value);
                cfg.overrides[section][key] = value;
            }
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where + e.what(), e.field());
        }
    }
}

void load_config(const std::filesystem::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    parse_config(in, cfg, path.parent_path());
}

std::string format_patch_section(int patch_id, const ClusterParams& params, const ClusterParams& base) {
    std::ostringstream out;
    out << "[patch " << patch_id << "]\n";
    const auto mine = params.entries();
    const auto theirs = base.entries();
    for (std::size_t i = 0; i < mine.size(); ++i)
        if (mine[i].second != theirs[i].second) out << mine[i].first << " = " << mine[i].second << '\n';
    return out.str();
}

}  // namespace vessel
