#pragma once

#include <cstdint>
#include <vector>

#include "fedcast/model.hpp"

namespace fedcast::models {

/// Local SGD hyper-parameters.
struct TrainConfig {
    double eta_c = 0.01;
    int epochs = 1;
    int batch_size = 32;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Squared;

    void validate() const;
};

/// Mean per-sample training loss recorded once per epoch (measured on the
/// batches before each step, i.e. the running training loss).
struct LossCurve {
    std::vector<double> epoch_loss;
};

struct TrainResult {
    ParamVector params;
    LossCurve curve;
};

/**
 * @brief Mini-batch SGD from a given starting point.
 *
 * Each epoch shuffles the sample order with a stream derived from
 * (seed, epoch) and walks it in batches of batch_size (final short batch
 * included), stepping params -= eta_c * grad with the analytic gradient
 * of the mean batch loss.  The result depends only on the dataset
 * contents, the starting parameters and the config, so repeated runs are
 * bit-identical.  Throws Diverged (with epoch and batch) as soon as a
 * loss or parameter turns non-finite, and NotTrainable for
 * parameter-free models.
 */
TrainResult train_local(const ForecastModel& model, const ParamVector& init,
                        const core::SupervisedWindowSet& data,
                        const TrainConfig& cfg);

}  // namespace fedcast::models
