#pragma once

#include "vessel/params.hpp"
#include "vessel/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace vessel {

/// Run configuration file. Grammar (one statement per line):
///
///     # comment            blank lines and '#' comments are ignored
///     key = value          global setting
///     [patch 3]            following keys override patch 3 only
///
/// Global keys: image, seg, out, cache_dir, normalize_window, initial_size,
/// max_size, threads, plus every ClusterParams key. Patch sections accept
/// ClusterParams keys only. Relative paths resolve against the file's folder.
struct RunConfig {
    std::filesystem::path image;
    std::filesystem::path seg;
    std::filesystem::path out;
    std::filesystem::path cache_dir;
    int normalize_window = 0;  // 0 leaves the enhanced image untouched
    unsigned threads = 0;
    PatchingOptions patching;
    ClusterParams defaults;
    std::map<int, std::map<std::string, std::string>> overrides;  // raw per-patch settings

    /// Applies one global key.
    void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {});

    /// Defaults with a patch's overrides applied on top.
    ClusterParams params_for(int patch_id) const;

    ImageRunOptions run_options() const;

    void validate() const;
};

/// Parses config text onto `cfg`; errors carry the line number.
void parse_config(std::istream& in, RunConfig& cfg, const std::filesystem::path& base = {});
void load_config(const std::filesystem::path& path, RunConfig& cfg);

/// A `[patch id]` section holding every parameter that differs from `base`.
std::string format_patch_section(int patch_id, const ClusterParams& params, const ClusterParams& base);

}  // namespace vessel
