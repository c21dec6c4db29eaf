/*
 * pipeline.hpp - stage drivers behind the CLI subcommands. Every stage reads
 * only prior-stage artifacts plus the config, and writes deterministically
 * regardless of the worker count.
 */
#pragma once

#include "iris/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>

namespace iris {

struct RunPaths {
    std::filesystem::path out;
    std::filesystem::path manifests;
    std::filesystem::path images;
    std::filesystem::path masks;
    std::filesystem::path templates;
    std::filesystem::path scores;
    std::filesystem::path reports;
    std::filesystem::path plots;

    static RunPaths under(const std::filesystem::path& out_dir);
    void create() const;
};

// Chunked index-parallel loop; results must be written to per-index slots.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

nlohmann::ordered_json cmd_synth(const RunConfig& config);
nlohmann::ordered_json cmd_curate(const RunConfig& config);
nlohmann::ordered_json cmd_extract(const RunConfig& config);
nlohmann::ordered_json cmd_match(const RunConfig& config);

struct ReportOutcome {
    nlohmann::ordered_json summary;
    int exit_code = 0; // nonzero when flags exceed the binomial band
};

ReportOutcome cmd_report(const RunConfig& config);
ReportOutcome cmd_run_all(const RunConfig& config);

} // namespace iris
