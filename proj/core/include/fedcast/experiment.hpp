#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedcast/climate.hpp"
#include "fedcast/federated.hpp"
#include "fedcast/metrics.hpp"
#include "fedcast/synthetic.hpp"
#include "fedcast/train.hpp"
#include "fedcast/windowing.hpp"

namespace fedcast {

/// Where the clients' channels come from: one CSV per client, or one
/// synthetic recipe instantiated per client with derived seeds.
struct DataConfig {
    std::vector<std::string> csv_paths;
    std::optional<ingest::SyntheticSpec> synthetic;
    int synthetic_clients = 1;
    /// Apply the per-kind threshold cleaning before alignment.
    bool apply_cleaning = false;
    /// Channel id -> kind name (temperature|rh|co2|energy); required for
    /// cleaning CSV data, optional otherwise.
    std::map<std::string, std::string> channel_kinds;
    std::int64_t step_seconds = 3600;
};

struct SplitConfig {
    double train = 0.7;
    double val = 0.1;
};

struct FederatedConfig {
    fed::StrategyKind strategy = fed::StrategyKind::FedAvg;
    /// Server step size; defaults to the strategy's convention (1 for
    /// FedAvg/FedMedian, 0.1 for the adaptive rules) when unset.
    std::optional<double> eta_s;
    double beta = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double tau = 1e-3;
    int rounds = 50;
    double sample_fraction = 1.0;
    double transport_loss_prob = 0.0;
};

enum class RunMode { Local, Centralized, Federated };

RunMode run_mode_from_name(const std::string& name);
std::string run_mode_name(RunMode mode);

/**
 * @brief One experiment: a data source, a window recipe, a model, and a
 * training scheme, reproducible from the master seed alone.
 */
struct ExperimentConfig {
    RunMode mode = RunMode::Local;
    DataConfig data;
    core::WindowSpec window;
    models::ModelSpec model;
    models::TrainConfig train;
    FederatedConfig federated;
    SplitConfig split;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses a JSON config document; unknown keys and type mismatches throw
/// ConfigError with the field path.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);

/// Canonical JSON rendering (all fields explicit, keys sorted); two
/// configs hash equal iff this text is equal.
std::string config_to_json(const ExperimentConfig& cfg);

/// 16-hex-digit FNV-1a hash of the canonical rendering, carried by every
/// report row for provenance.
std::string config_hash(const ExperimentConfig& cfg);

/// Instantiates the synthetic recipe once per client, with the same
/// per-client derived seeds run_experiment uses; pairs are
/// (client id, channels).  Throws ConfigError without a synthetic source.
std::vector<std::pair<std::string, std::vector<core::TimeSeries>>>
materialize_synthetic(const DataConfig& data, std::uint64_t master_seed);

struct ClientResult {
    std::string client_id;
    metrics::EvalReport report;
};

struct ExperimentReport {
    RunMode mode = RunMode::Local;
    std::string config_hash;
    std::vector<ClientResult> clients;
};

/**
 * @brief Runs one experiment end to end and writes its artifacts.
 *
 * All modes cut per-client windows and splits the same way; they differ
 * in training: local trains one model per client, centralized trains one
 * model on the pooled training partitions (then still evaluates per
 * client), federated runs communication rounds over client handles.
 * Everything derives from the master seed, so rerunning a config writes
 * byte-identical reports.
 *
 * Files in out_dir: eval_<mode>_<client>.json per client, a
 * params_<mode>[_<client>].bin checkpoint, rounds_federated.csv for
 * federated runs, and config.json (canonical form).
 */
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Evaluates a saved checkpoint per client test partition (no training);
/// writes eval_checkpoint_<client>.json.
ExperimentReport evaluate_checkpoint(const ExperimentConfig& cfg,
                                     const std::string& checkpoint_path);

/**
 * @brief Runs all three modes of the same config and writes compare.csv
 * with one row per (mode, client, target).
 *
 * Columns: mode, client, target, model, cv_rmse_pct, nmbe_pct,
 * compliant_whole_building, compliant_indoor_t_rh, compliant_co2,
 * config_hash.
 */
std::vector<ExperimentReport> run_compare(const ExperimentConfig& cfg);

/// Inputs for the conservation analytics report.
struct ClimateReportConfig {
    std::vector<std::string> csv_paths;
    std::string indoor_t;
    std::string indoor_rh;
    /// Optional outdoor pair; when present the mixing-ratio comparison
    /// and its moisture-source indicator are produced.
    std::string outdoor_t;
    std::string outdoor_rh;
    double pressure_hpa = 1013.0;
    /// Smoothing window for the mixing-ratio comparison.
    int ma_days = 7;
    /// Indoor-over-outdoor MR fraction at or above which the report flags
    /// an internal moisture source.
    double moisture_flag_fraction = 0.9;
    climate::En15757Options en15757;
    std::int64_t step_seconds = 3600;
    std::string out_dir = "out";

    void validate() const;
};

ClimateReportConfig climate_config_from_json_file(const std::string& path);

/**
 * @brief Produces the conservation analytics files.
 *
 * Writes decomposition_<channel>.csv (timestamp, rh, cma, deviation; RH
 * channels), mr_comparison.csv (timestamp, indoor/outdoor MR and their
 * moving averages) when the outdoor pair is configured, and
 * climate_summary.json with the mold-threshold exceedance, the MR
 * exceedance fraction and the moisture-source flag.
 */
void climate_report(const ClimateReportConfig& cfg);

}  // namespace fedcast
