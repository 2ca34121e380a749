#include "fedcast/train.hpp"

#include <cmath>
#include <numeric>

#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"

namespace fedcast::models {

void TrainConfig::validate() const {
    if (!(eta_c > 0.0) || !std::isfinite(eta_c)) {
        throw InvalidSpec("TrainConfig: eta_c must be positive and finite");
    }
    if (epochs < 1) throw InvalidSpec("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw InvalidSpec("TrainConfig: batch_size must be >= 1");
}

TrainResult train_local(const ForecastModel& model, const ParamVector& init,
                        const core::SupervisedWindowSet& data,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (!model.trainable()) {
        throw NotTrainable("train_local: model '" + model.name() +
                           "' has no trainable parameters");
    }
    if (data.empty()) {
        throw InvalidSpec("train_local: training set is empty");
    }

    const std::size_t n = data.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    ParamVector params = init;
    LossCurve curve;
    curve.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    std::vector<std::size_t> order(n);
    std::vector<core::WindowSample> scratch;
    scratch.reserve(std::min(batch, n));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        SplitMix64 shuffle(derive_stream(cfg.seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i) {
            const std::uint64_t j = shuffle.nextBelow(i);
            std::swap(order[i - 1], order[static_cast<std::size_t>(j)]);
        }

        double epoch_loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t lo = 0; lo < n; lo += batch, ++batch_index) {
            const std::size_t hi = std::min(lo + batch, n);
            scratch.clear();
            for (std::size_t i = lo; i < hi; ++i) {
                scratch.push_back(data[order[i]]);
            }

            const double batch_loss = model.meanLoss(params, scratch, cfg.loss);
            if (!std::isfinite(batch_loss)) {
                throw Diverged(epoch, batch_index);
            }
            epoch_loss_sum += batch_loss * static_cast<double>(hi - lo);

            ParamVector grad = model.gradient(params, scratch, cfg.loss);
            grad *= cfg.eta_c;
            params -= grad;
            if (!params.allFinite()) {
                throw Diverged(epoch, batch_index);
            }
        }
        curve.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
    }

    return TrainResult{std::move(params), std::move(curve)};
}

}  // namespace fedcast::models
