#include "fedcast/federated.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <set>

#include "fedcast/csv.hpp"
#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"

namespace fedcast::fed {

ClientHandle::ClientHandle(std::string client_id,
                           std::shared_ptr<const models::ForecastModel> model,
                           core::SupervisedWindowSet train_data)
    : client_id_(std::move(client_id)),
      model_(std::move(model)),
      train_(std::move(train_data)) {
    if (client_id_.empty()) {
        throw InvalidSpec("ClientHandle: client id must not be empty");
    }
    if (!model_) {
        throw InvalidSpec("ClientHandle '" + client_id_ + "': model is null");
    }
    if (train_.empty()) {
        throw InvalidSpec("ClientHandle '" + client_id_ +
                          "': training set must not be empty");
    }
    if (train_.lookback() != model_->lookback() ||
        train_.horizon() != model_->horizon()) {
        throw ShapeError("ClientHandle '" + client_id_ +
                         "': window shape does not match the model");
    }
}

std::pair<models::ParamVector, std::size_t> ClientHandle::update(
    const models::ParamVector& theta_global,
    const models::TrainConfig& cfg) const {
    auto result = models::train_local(*model_, theta_global, train_, cfg);
    result.params -= theta_global;
    return {std::move(result.params), train_.size()};
}

metrics::EvalReport ClientHandle::evaluateOn(
    const models::ParamVector& params,
    const core::SupervisedWindowSet& data) const {
    return metrics::evaluate(*model_, params, data);
}

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "fedavg") return StrategyKind::FedAvg;
    if (name == "fedmedian") return StrategyKind::FedMedian;
    if (name == "fedavgm") return StrategyKind::FedAvgM;
    if (name == "fedadam") return StrategyKind::FedAdam;
    if (name == "fedadagrad") return StrategyKind::FedAdagrad;
    if (name == "fedyogi") return StrategyKind::FedYogi;
    throw InvalidSpec("unknown aggregation strategy '" + name + "'");
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FedAvg: return "fedavg";
        case StrategyKind::FedMedian: return "fedmedian";
        case StrategyKind::FedAvgM: return "fedavgm";
        case StrategyKind::FedAdam: return "fedadam";
        case StrategyKind::FedAdagrad: return "fedadagrad";
        case StrategyKind::FedYogi: return "fedyogi";
    }
    throw InvalidSpec("unhandled strategy kind");
}

ServerStrategy ServerStrategy::make(StrategyKind kind) {
    ServerStrategy s;
    s.kind = kind;
    const bool adaptive = kind == StrategyKind::FedAdam ||
                          kind == StrategyKind::FedAdagrad ||
                          kind == StrategyKind::FedYogi;
    s.eta_s = adaptive ? 0.1 : 1.0;
    return s;
}

void ServerStrategy::validate() const {
    if (!(eta_s > 0.0) || !std::isfinite(eta_s)) {
        throw InvalidSpec("ServerStrategy: eta_s must be positive and finite");
    }
    const auto check_beta = [](double b, const char* name) {
        if (!(b >= 0.0 && b < 1.0)) {
            throw InvalidSpec(std::string("ServerStrategy: ") + name +
                              " must lie in [0, 1)");
        }
    };
    check_beta(beta, "beta");
    check_beta(beta1, "beta1");
    check_beta(beta2, "beta2");
    if (!(tau > 0.0)) {
        throw InvalidSpec("ServerStrategy: tau must be positive");
    }
}

namespace {

double sign_of(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

models::ParamVector weighted_mean_delta(
    const std::vector<std::pair<models::ParamVector, std::size_t>>& deltas,
    std::size_t total, const models::ParamVector& theta) {
    auto mean = models::ParamVector::zeros(theta.layoutTag(), theta.size());
    for (const auto& [delta, count] : deltas) {
        const double w =
            static_cast<double>(count) / static_cast<double>(total);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += w * delta[i];
        }
    }
    return mean;
}

models::ParamVector median_delta(
    const std::vector<std::pair<models::ParamVector, std::size_t>>& deltas,
    const models::ParamVector& theta) {
    auto med = models::ParamVector::zeros(theta.layoutTag(), theta.size());
    std::vector<double> column(deltas.size());
    for (std::size_t i = 0; i < med.size(); ++i) {
        for (std::size_t c = 0; c < deltas.size(); ++c) {
            column[c] = deltas[c].first[i];
        }
        std::sort(column.begin(), column.end());
        const std::size_t n = column.size();
        med[i] = n % 2 == 1 ? column[n / 2]
                            : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return med;
}

}  // namespace

models::ParamVector aggregate(
    const std::vector<std::pair<models::ParamVector, std::size_t>>& deltas,
    ServerStrategy& strategy, const models::ParamVector& theta) {
    strategy.validate();
    if (deltas.empty()) {
        throw NoParticipants("aggregate: no client updates this round");
    }
    std::size_t total = 0;
    for (const auto& [delta, count] : deltas) {
        if (delta.layoutTag() != theta.layoutTag() ||
            delta.size() != theta.size()) {
            throw ShapeError("aggregate: delta layout '" + delta.layoutTag() +
                             "' does not match the global parameters '" +
                             theta.layoutTag() + "'");
        }
        total += count;
    }
    if (total == 0) {
        throw NoParticipants("aggregate: all participating clients report "
                             "zero samples");
    }

    const bool needs_m = strategy.kind != StrategyKind::FedAvg &&
                         strategy.kind != StrategyKind::FedMedian;
    if (needs_m && (strategy.m.layoutTag() != theta.layoutTag() ||
                    strategy.m.size() != theta.size())) {
        strategy.m = models::ParamVector::zeros(theta.layoutTag(), theta.size());
        strategy.v = models::ParamVector::zeros(theta.layoutTag(), theta.size());
    }

    models::ParamVector next = theta;
    switch (strategy.kind) {
        case StrategyKind::FedAvg: {
            next += weighted_mean_delta(deltas, total, theta);
            break;
        }
        case StrategyKind::FedMedian: {
            next += median_delta(deltas, theta);
            break;
        }
        case StrategyKind::FedAvgM: {
            const auto d = weighted_mean_delta(deltas, total, theta);
            for (std::size_t i = 0; i < next.size(); ++i) {
                strategy.m[i] = strategy.beta * strategy.m[i] + d[i];
                next[i] += strategy.eta_s * strategy.m[i];
            }
            break;
        }
        case StrategyKind::FedAdam:
        case StrategyKind::FedAdagrad:
        case StrategyKind::FedYogi: {
            const auto d = weighted_mean_delta(deltas, total, theta);
            for (std::size_t i = 0; i < next.size(); ++i) {
                const double di = d[i];
                const double di2 = di * di;
                strategy.m[i] = strategy.beta1 * strategy.m[i] +
                                (1.0 - strategy.beta1) * di;
                if (strategy.kind == StrategyKind::FedAdam) {
                    strategy.v[i] = strategy.beta2 * strategy.v[i] +
                                    (1.0 - strategy.beta2) * di2;
                } else if (strategy.kind == StrategyKind::FedAdagrad) {
                    strategy.v[i] += di2;
                } else {
                    strategy.v[i] -= (1.0 - strategy.beta2) * di2 *
                                     sign_of(strategy.v[i] - di2);
                }
                next[i] += strategy.eta_s * strategy.m[i] /
                           (std::sqrt(strategy.v[i]) + strategy.tau);
            }
            break;
        }
    }
    return next;
}

void RoundLog::writeCsv(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "round,strategy,participants,global_val_cv_rmse,global_val_nmbe,"
           "wall_ms\n";
    for (const auto& r : rows) {
        char wall[32];
        std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
        out << r.round << ',' << r.strategy << ',' << r.participants << ','
            << ingest::format_double(r.global_val_cv_rmse) << ','
            << ingest::format_double(r.global_val_nmbe) << ',' << wall << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

std::uint64_t round_seed(std::uint64_t base_seed, int round) noexcept {
    return derive_stream(base_seed, static_cast<std::uint64_t>(round));
}

models::ParamVector run_rounds(FedRoundState& state,
                               std::span<const ClientHandle> clients,
                               int rounds, const models::TrainConfig& cfg,
                               RoundLog* log, const EvalHook& eval_hook,
                               bool parallel) {
    cfg.validate();
    state.strategy.validate();
    if (rounds < 1) {
        throw InvalidSpec("run_rounds: rounds must be >= 1");
    }
    if (clients.empty()) {
        throw NoParticipants("run_rounds: no clients registered");
    }
    if (!(state.sample_fraction > 0.0 && state.sample_fraction <= 1.0)) {
        throw InvalidSpec("run_rounds: sample_fraction must lie in (0, 1]");
    }
    if (!(state.transport_loss_prob >= 0.0 && state.transport_loss_prob <= 1.0)) {
        throw InvalidSpec("run_rounds: transport_loss_prob must lie in [0, 1]");
    }
    {
        std::set<std::string> ids;
        for (const auto& c : clients) {
            if (!ids.insert(c.clientId()).second) {
                throw InvalidSpec("run_rounds: duplicate client id '" +
                                  c.clientId() + "'");
            }
            if (c.model().layoutTag() != state.global_params.layoutTag()) {
                throw ShapeError("run_rounds: client '" + c.clientId() +
                                 "' model does not match the global layout");
            }
        }
    }

    const std::size_t n_clients = clients.size();
    const auto n_selected = static_cast<std::size_t>(std::ceil(
        state.sample_fraction * static_cast<double>(n_clients)));

    for (int r = 0; r < rounds; ++r) {
        const int t = state.round;
        const auto t0 = std::chrono::steady_clock::now();

        // Draw this round's participants, then process them in id order so
        // the aggregation inputs are deterministic regardless of scheduling.
        std::vector<std::size_t> selected(n_clients);
        std::iota(selected.begin(), selected.end(), std::size_t{0});
        if (n_selected < n_clients) {
            SplitMix64 sampler(derive_stream(
                state.seed, fnv1a64("client-sampling") +
                                static_cast<std::uint64_t>(t)));
            for (std::size_t i = 0; i < n_selected; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(sampler.nextBelow(n_clients - i));
                std::swap(selected[i], selected[j]);
            }
            selected.resize(n_selected);
        }
        std::sort(selected.begin(), selected.end(),
                  [&](std::size_t a, std::size_t b) {
                      return clients[a].clientId() < clients[b].clientId();
                  });

        models::TrainConfig round_cfg = cfg;
        round_cfg.seed = round_seed(cfg.seed, t);

        std::vector<std::pair<models::ParamVector, std::size_t>> updates;
        updates.reserve(selected.size());
        if (parallel && selected.size() > 1) {
            std::vector<std::future<std::pair<models::ParamVector, std::size_t>>>
                futures;
            futures.reserve(selected.size());
            for (std::size_t idx : selected) {
                futures.push_back(std::async(
                    std::launch::async,
                    [&clients, idx, &state, &round_cfg]() {
                        return clients[idx].update(state.global_params, round_cfg);
                    }));
            }
            for (auto& f : futures) updates.push_back(f.get());
        } else {
            for (std::size_t idx : selected) {
                updates.push_back(clients[idx].update(state.global_params, round_cfg));
            }
        }

        // Simulated transport: each surviving update is kept independently.
        std::vector<std::pair<models::ParamVector, std::size_t>> delivered;
        delivered.reserve(updates.size());
        if (state.transport_loss_prob > 0.0) {
            SplitMix64 transport(derive_stream(
                state.seed,
                fnv1a64("transport") + static_cast<std::uint64_t>(t)));
            for (auto& u : updates) {
                if (transport.nextDouble() >= state.transport_loss_prob) {
                    delivered.push_back(std::move(u));
                }
            }
        } else {
            delivered = std::move(updates);
        }

        if (!delivered.empty()) {
            state.global_params =
                aggregate(delivered, state.strategy, state.global_params);
        }
        state.round = t + 1;

        if (log) {
            RoundRecord rec;
            rec.round = t;
            rec.strategy = strategy_name(state.strategy.kind);
            rec.participants = delivered.size();
            if (eval_hook) {
                const auto [cv, bias] = eval_hook(state.global_params);
                rec.global_val_cv_rmse = cv;
                rec.global_val_nmbe = bias;
            } else {
                rec.global_val_cv_rmse = std::nan("");
                rec.global_val_nmbe = std::nan("");
            }
            rec.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            log->rows.push_back(rec);
        }
    }
    return state.global_params;
}

}  // namespace fedcast::fed
