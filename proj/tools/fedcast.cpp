#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedcast/cleaning.hpp"
#include "fedcast/csv.hpp"
#include "fedcast/errors.hpp"
#include "fedcast/experiment.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("-c,--config", opts.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opts.out_dir, "Override the config's out_dir");
    sub->add_option("-s,--seed", opts.seed,
                    "Override the master seed (also see FEDCAST_SEED)");
}

std::optional<std::uint64_t> seed_from_env() {
    const char* env = std::getenv("FEDCAST_SEED");
    if (!env || !*env) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0') {
        throw fedcast::ConfigError(
            "FEDCAST_SEED: expected an unsigned integer, got '" +
            std::string(env) + "'");
    }
    return static_cast<std::uint64_t>(v);
}

fedcast::ExperimentConfig load_experiment(const CommonOpts& opts) {
    auto cfg = fedcast::config_from_json_file(opts.config_path);
    if (auto env_seed = seed_from_env()) cfg.seed = *env_seed;
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

void print_report(const fedcast::ExperimentReport& report,
                  const std::string& label = {}) {
    for (const auto& client : report.clients) {
        const auto& ev = client.report;
        std::cout << (label.empty() ? fedcast::run_mode_name(report.mode)
                                    : label)
                  << ' ' << client.client_id << ' ' << ev.model_name
                  << " cv_rmse_pct=";
        if (std::isfinite(ev.cv_rmse_pct)) {
            std::cout << fedcast::ingest::format_double(ev.cv_rmse_pct);
        } else {
            std::cout << "n/a";
        }
        std::cout << " nmbe_pct=";
        if (std::isfinite(ev.nmbe_pct)) {
            std::cout << fedcast::ingest::format_double(ev.nmbe_pct);
        } else {
            std::cout << "n/a";
        }
        std::cout << '\n';
    }
}

int run_mode_command(const CommonOpts& opts, fedcast::RunMode mode) {
    auto cfg = load_experiment(opts);
    cfg.mode = mode;
    print_report(fedcast::run_experiment(cfg));
    return 0;
}

int run_ingest(const CommonOpts& opts) {
    const auto cfg = load_experiment(opts);
    if (cfg.data.csv_paths.empty()) {
        throw fedcast::ConfigError("data.csv_paths: ingest needs CSV inputs");
    }
    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& path : cfg.data.csv_paths) {
        auto channels = fedcast::ingest::read_long_csv(path);
        nlohmann::json reports = nlohmann::json::object();
        for (auto& ch : channels) {
            const auto it = cfg.data.channel_kinds.find(ch.channelId());
            if (it == cfg.data.channel_kinds.end()) {
                throw fedcast::ConfigError("data.channel_kinds." +
                                           ch.channelId() +
                                           ": required to clean this channel");
            }
            auto result = fedcast::ingest::clean(
                ch, fedcast::ingest::default_cleaning_policy(
                        fedcast::ingest::channel_kind_from_name(it->second)));
            reports[ch.channelId()] =
                nlohmann::json::parse(result.report.toJson());
            ch = std::move(result.series);
        }
        const auto stem = std::filesystem::path(path).stem().string();
        const auto out_csv =
            std::filesystem::path(cfg.out_dir) / (stem + "_clean.csv");
        fedcast::ingest::write_long_csv(out_csv.string(), channels);
        std::ofstream report_out(std::filesystem::path(cfg.out_dir) /
                                 (stem + "_cleaning.json"));
        report_out << reports.dump(2) << '\n';
        std::cout << "wrote " << out_csv.string() << '\n';
    }
    return 0;
}

int run_synth(const CommonOpts& opts) {
    const auto cfg = load_experiment(opts);
    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& [client, channels] :
         fedcast::materialize_synthetic(cfg.data, cfg.seed)) {
        const auto out_csv = std::filesystem::path(cfg.out_dir) /
                             ("synthetic_" + client + ".csv");
        fedcast::ingest::write_long_csv(out_csv.string(), channels);
        std::cout << "wrote " << out_csv.string() << '\n';
    }
    return 0;
}

int run_compare_command(const CommonOpts& opts) {
    const auto cfg = load_experiment(opts);
    for (const auto& report : fedcast::run_compare(cfg)) {
        print_report(report);
    }
    std::cout << "wrote "
              << (std::filesystem::path(cfg.out_dir) / "compare.csv").string()
              << '\n';
    return 0;
}

int run_eval(const CommonOpts& opts, const std::string& checkpoint) {
    const auto cfg = load_experiment(opts);
    print_report(fedcast::evaluate_checkpoint(cfg, checkpoint), "checkpoint");
    return 0;
}

int run_climate(const CommonOpts& opts) {
    auto cfg = fedcast::climate_config_from_json_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    fedcast::climate_report(cfg);
    std::cout << "wrote "
              << (std::filesystem::path(cfg.out_dir) / "climate_summary.json")
                     .string()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedcast: federated forecasting and climate analytics "
                 "simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string checkpoint_path;

    auto* ingest_cmd =
        app.add_subcommand("ingest", "Clean CSV inputs and write them back "
                                     "with cleaning reports");
    add_common(ingest_cmd, opts);

    auto* synth_cmd = app.add_subcommand(
        "synth", "Materialize the synthetic recipe as per-client CSVs");
    add_common(synth_cmd, opts);

    auto* local_cmd = app.add_subcommand(
        "train-local", "Train one model per client on its own data");
    add_common(local_cmd, opts);

    auto* central_cmd = app.add_subcommand(
        "train-central", "Train one model on the pooled client data");
    add_common(central_cmd, opts);

    auto* fed_cmd = app.add_subcommand(
        "train-fed", "Run federated rounds across the clients");
    add_common(fed_cmd, opts);

    auto* compare_cmd = app.add_subcommand(
        "compare", "Run local, centralized and federated modes and tabulate");
    add_common(compare_cmd, opts);

    auto* climate_cmd = app.add_subcommand(
        "climate", "Produce the conservation analytics report");
    add_common(climate_cmd, opts);

    auto* eval_cmd = app.add_subcommand(
        "eval", "Evaluate a saved checkpoint on the clients' test data");
    add_common(eval_cmd, opts);
    eval_cmd->add_option("--checkpoint", checkpoint_path,
                         "Parameter checkpoint (.bin)")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest_cmd) return run_ingest(opts);
        if (*synth_cmd) return run_synth(opts);
        if (*local_cmd) return run_mode_command(opts, fedcast::RunMode::Local);
        if (*central_cmd) {
            return run_mode_command(opts, fedcast::RunMode::Centralized);
        }
        if (*fed_cmd) return run_mode_command(opts, fedcast::RunMode::Federated);
        if (*compare_cmd) return run_compare_command(opts);
        if (*climate_cmd) return run_climate(opts);
        if (*eval_cmd) return run_eval(opts, checkpoint_path);
    } catch (const fedcast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fedcast::Diverged& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return 4;
    } catch (const fedcast::Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
