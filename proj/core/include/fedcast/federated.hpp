#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedcast/metrics.hpp"
#include "fedcast/train.hpp"

namespace fedcast::fed {

/**
 * @brief One simulated site: its model head and its private window set.
 *
 * The window set never leaves the handle; the only outputs are parameter
 * deltas and the sample count, which is exactly what the aggregation
 * rule needs for weighting.
 */
class ClientHandle {
public:
    ClientHandle(std::string client_id,
                 std::shared_ptr<const models::ForecastModel> model,
                 core::SupervisedWindowSet train_data);

    const std::string& clientId() const noexcept { return client_id_; }
    std::size_t size() const noexcept { return train_.size(); }
    const models::ForecastModel& model() const noexcept { return *model_; }

    /// Runs cfg.epochs of local SGD from the received global parameters
    /// and returns (theta_local - theta_global, |D|).
    std::pair<models::ParamVector, std::size_t> update(
        const models::ParamVector& theta_global,
        const models::TrainConfig& cfg) const;

    /// Validation hook helper: evaluates params on an arbitrary window
    /// set with this client's model.
    metrics::EvalReport evaluateOn(const models::ParamVector& params,
                                   const core::SupervisedWindowSet& data) const;

private:
    std::string client_id_;
    std::shared_ptr<const models::ForecastModel> model_;
    core::SupervisedWindowSet train_;
};

enum class StrategyKind { FedAvg, FedMedian, FedAvgM, FedAdam, FedAdagrad, FedYogi };

StrategyKind strategy_from_name(const std::string& name);
std::string strategy_name(StrategyKind kind);

/**
 * @brief Server-side aggregation rule plus its persistent optimizer state.
 *
 * All rules step the global parameters along the aggregated delta:
 *
 *   FedAvg:     theta += mean_delta (sample-size weighted)
 *   FedMedian:  theta += coordinatewise unweighted median of the deltas
 *   FedAvgM:    m = beta * m + mean_delta;            theta += eta_s * m
 *   FedAdam:    m = beta1 * m + (1-beta1) * mean_delta
 *               v = beta2 * v + (1-beta2) * mean_delta^2
 *                                theta += eta_s * m / (sqrt(v) + tau)
 *   FedAdagrad: m as FedAdam;  v += mean_delta^2;  theta as FedAdam
 *   FedYogi:    m as FedAdam
 *               v -= (1-beta2) * mean_delta^2 * sign(v - mean_delta^2)
 *                                theta += eta_s * m / (sqrt(v) + tau)
 *
 * Moments start at zero and there is no bias correction.  make() fills
 * the conventional defaults: eta_s = 1 for FedAvg/FedMedian, 0.1 for the
 * adaptive rules; beta = beta1 = 0.9, beta2 = 0.99, tau = 1e-3.
 */
struct ServerStrategy {
    StrategyKind kind = StrategyKind::FedAvg;
    double eta_s = 1.0;
    double beta = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double tau = 1e-3;

    /// Optimizer moments; shaped lazily on the first aggregation.
    models::ParamVector m;
    models::ParamVector v;

    static ServerStrategy make(StrategyKind kind);

    void validate() const;
};

/**
 * @brief Applies one aggregation step and returns the new global
 * parameters.
 *
 * `deltas` holds (client delta, client sample count) pairs; weighting
 * uses count / total count.  Throws NoParticipants when the list is
 * empty or the total count is zero, and ShapeError when any delta's
 * layout differs from theta's.  Updates the strategy's moments in place.
 */
models::ParamVector aggregate(
    const std::vector<std::pair<models::ParamVector, std::size_t>>& deltas,
    ServerStrategy& strategy, const models::ParamVector& theta);

/// Per-round log row.
struct RoundRecord {
    int round = 0;
    std::string strategy;
    std::size_t participants = 0;
    double global_val_cv_rmse = 0.0;
    double global_val_nmbe = 0.0;
    double wall_ms = 0.0;
};

struct RoundLog {
    std::vector<RoundRecord> rows;

    /// CSV with header round,strategy,participants,global_val_cv_rmse,
    /// global_val_nmbe,wall_ms.
    void writeCsv(const std::string& path) const;
};

/// Optional per-round validation callback: receives the post-aggregation
/// global parameters, returns (cv_rmse_pct, nmbe_pct) for the log.
using EvalHook = std::function<std::pair<double, double>(const models::ParamVector&)>;

/// Seed handed to every client's local training in round t; one schedule
/// shared by all clients so identical clients do identical work.
std::uint64_t round_seed(std::uint64_t base_seed, int round) noexcept;

/// Federated run state that persists across run_rounds calls.
struct FedRoundState {
    models::ParamVector global_params;
    ServerStrategy strategy;
    int round = 0;
    /// Fraction of clients drawn uniformly (without replacement) each
    /// round; 1 means everyone participates.
    double sample_fraction = 1.0;
    /// Probability that a client's update is lost in transit.
    double transport_loss_prob = 0.0;
    std::uint64_t seed = 0;
};

/**
 * @brief Runs `rounds` federated rounds over the given clients.
 *
 * Each round: draw ceil(sample_fraction * N) clients, run their local
 * updates (in parallel when `parallel`), drop each update independently
 * with transport_loss_prob, aggregate the survivors in client-id order,
 * then log.  A round whose every update was lost leaves the global
 * parameters untouched but still advances the round counter and the log.
 * The outcome is a pure function of (state, clients, cfg), regardless of
 * `parallel`.
 */
models::ParamVector run_rounds(FedRoundState& state,
                               std::span<const ClientHandle> clients,
                               int rounds, const models::TrainConfig& cfg,
                               RoundLog* log = nullptr,
                               const EvalHook& eval_hook = {},
                               bool parallel = true);

}  // namespace fedcast::fed
