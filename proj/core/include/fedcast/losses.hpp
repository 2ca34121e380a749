#pragma once

#include <span>

namespace fedcast::models {

enum class LossKind { Squared, Quantile };

/**
 * @brief Per-sample squared-error loss: sum over the horizon of
 * (prediction - truth)^2, with no 1/2 factor.
 */
double loss_squared(std::span<const double> pred, std::span<const double> truth);

/// d(loss_squared)/d(pred): 2 * (pred - truth), written into grad.
void loss_squared_grad(std::span<const double> pred,
                       std::span<const double> truth, std::span<double> grad);

/**
 * @brief Per-sample pinball loss summed over horizon steps and levels.
 *
 * For one prediction q at level p against truth y:
 *   (1 - p) * max(q - y, 0) + p * max(y - q, 0).
 * `pred` is row-major horizon x levels.  Throws InvalidQuantile when any
 * level lies outside (0, 1).
 */
double loss_quantile(std::span<const double> pred, std::span<const double> truth,
                     std::span<const double> levels);

/// Subgradient of loss_quantile w.r.t. pred ((1-p) above the truth, -p
/// below, 0 at equality), written into grad.
void loss_quantile_grad(std::span<const double> pred,
                        std::span<const double> truth,
                        std::span<const double> levels, std::span<double> grad);

}  // namespace fedcast::models
