#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wikimig/econometrics.hpp"
#include "wikimig/ground_truth.hpp"
#include "wikimig/ingest.hpp"
#include "wikimig/timeseries.hpp"

namespace wikimig::cli {

struct ArticleSpec {
    std::string city;
    std::string project;
    std::string title;

    std::string language() const { return language_of_project(project); }
    ArticleKey key() const { return {project, title}; }
};

struct GroundTruthSpec {
    std::string name;
    ingest::GroundTruthKind kind;
    std::filesystem::path path;
};

struct BreakSettings {
    double min_segment_frac = 0.15;
    int max_breaks = 5;
    double ci_level = 0.95;
    std::optional<ts::Day> window_start;
    std::optional<ts::Day> window_end;
    /// When set, break tables keep only breaks dated in this year.
    std::optional<int> report_year;
};

struct RankSettings {
    std::optional<int> year;
    std::optional<std::string> language;
    /// Name of the stocks ground-truth entry; defaults to the first one.
    std::optional<std::string> stocks;
};

struct PipelineConfig {
    std::vector<std::string> projects;
    std::vector<ArticleSpec> articles;
    std::vector<GroundTruthSpec> ground_truth;
    std::optional<std::filesystem::path> location_mapping;
    ts::Day start{};
    ts::Day end{};
    std::optional<ts::Day> weekly_anchor;
    std::optional<ts::Day> relchange_window_start;
    int relchange_window_days = 28;
    BreakSettings breaks;
    econ::Rq2Options econometrics;
    RankSettings rank;
    /// Display names for relationship labels, e.g. "uk" -> "Ukrainian".
    std::map<std::string, std::string> language_names;
    std::filesystem::path cache_root = "cache";
    std::filesystem::path output_dir = "output";
    std::uint64_t seed = 42;
    int workers = 1;
    std::string user_agent;
    ingest::FetchPolicy fetch;
    /// Directory of the config file; echoed paths are shown relative to it.
    std::filesystem::path base_dir;

    std::string language_name(const std::string& code) const;
    /// Effective settings, defaults filled in, as a canonical JSON document.
    nlohmann::json to_json() const;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected so typos
/// do not silently fall back to defaults. Throws Error(Configuration).
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace wikimig::cli
