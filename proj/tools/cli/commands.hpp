#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/config.hpp"
#include "wikimig/ingest.hpp"

namespace wikimig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

struct Invocation {
    std::string command;
    std::filesystem::path config_path;
    std::optional<int> year;
    std::optional<std::string> language;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

struct Console {
    std::ostream& out;
    std::ostream& err;
};

/// Each command returns an exit code. `http` is only used by fetch; when null a
/// cpp-httplib client is created.
int cmd_fetch(const PipelineConfig& cfg, const Invocation& inv, Console io, ingest::HttpClient* http = nullptr);
int cmd_rank(const PipelineConfig& cfg, const Invocation& inv, Console io);
int cmd_relchange(const PipelineConfig& cfg, const Invocation& inv, Console io);
int cmd_breaks(const PipelineConfig& cfg, const Invocation& inv, Console io);
int cmd_granger(const PipelineConfig& cfg, const Invocation& inv, Console io);
int cmd_report(const PipelineConfig& cfg, const Invocation& inv, Console io);

/// Loads the config, applies overrides (flags, WIKIMIG_CACHE_DIR) and dispatches.
/// Configuration errors map to exit code 2.
int run(const Invocation& inv, Console io, ingest::HttpClient* http = nullptr);

/// Parses argv with the documented grammar, then calls run().
int main_entry(int argc, char** argv, Console io, ingest::HttpClient* http = nullptr);

const char* tool_version();

}  // namespace wikimig::cli
