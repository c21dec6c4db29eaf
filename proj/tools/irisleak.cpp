#include "CLI11.hpp"

#include "iris/config.hpp"
#include "iris/errors.hpp"
#include "iris/pipeline.hpp"

#include <fstream>
#include <iostream>

namespace {

iris::RunConfig build_config(const std::string& config_path, const std::string& out_dir,
                             long long seed, int workers,
                             const std::vector<std::string>& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) iris::raise(iris::Errc::IoError, "cannot open config " + config_path);
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            iris::raise(iris::Errc::ConfigError, "config " + config_path + ": " + e.what());
        }
    }
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    if (seed >= 0) j["seed"] = static_cast<std::uint64_t>(seed);
    if (workers > 0) j["workers"] = workers;
    for (const std::string& assignment : overrides) iris::apply_override(j, assignment);
    return iris::config_from_json(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"identity-leakage audit for synthetic iris corpora"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int workers = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "global seed (overrides config)");
    app.add_option("--workers", workers, "worker thread count (overrides config)");
    app.add_option("--set", overrides, "config override as dotted.key=value, repeatable");

    auto* synth = app.add_subcommand("synth", "render the real corpus and per-snapshot fakes");
    auto* curate = app.add_subcommand("curate", "blink-filter, crop, and frame the corpora");
    auto* extract = app.add_subcommand("extract", "segment, gate, and encode templates");
    auto* match = app.add_subcommand("match", "score all pair types into CSV tables");
    auto* report = app.add_subcommand("report", "analyze scores into the leakage report");
    auto* run_all = app.add_subcommand("run-all", "run every stage in order");
    for (CLI::App* sub : {synth, curate, extract, match, report, run_all}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        const iris::RunConfig config =
            build_config(config_path, out_dir, seed, workers, overrides);
        nlohmann::ordered_json summary;
        int exit_code = 0;
        if (synth->parsed()) summary = iris::cmd_synth(config);
        else if (curate->parsed()) summary = iris::cmd_curate(config);
        else if (extract->parsed()) summary = iris::cmd_extract(config);
        else if (match->parsed()) summary = iris::cmd_match(config);
        else if (report->parsed()) {
            iris::ReportOutcome outcome = iris::cmd_report(config);
            summary = std::move(outcome.summary);
            exit_code = outcome.exit_code;
        } else {
            iris::ReportOutcome outcome = iris::cmd_run_all(config);
            summary = std::move(outcome.summary);
            exit_code = outcome.exit_code;
        }
        std::cout << summary.dump(2) << '\n';
        return exit_code;
    } catch (const iris::Error& e) {
        std::cerr << "error [" << iris::errc_name(e.code()) << "] " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error " << e.what() << '\n';
        return 2;
    }
}
