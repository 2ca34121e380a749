#include "fedcast/losses.hpp"

#include <string>

#include "fedcast/errors.hpp"

namespace fedcast::models {

namespace {

void require_levels(std::span<const double> levels) {
    for (double p : levels) {
        if (!(p > 0.0 && p < 1.0)) {
            throw InvalidQuantile("quantile level " + std::to_string(p) +
                                  " is outside (0, 1)");
        }
    }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": size mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

double loss_squared(std::span<const double> pred, std::span<const double> truth) {
    require_same_size(pred.size(), truth.size(), "loss_squared");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        sum += e * e;
    }
    return sum;
}

void loss_squared_grad(std::span<const double> pred,
                       std::span<const double> truth, std::span<double> grad) {
    require_same_size(pred.size(), truth.size(), "loss_squared_grad");
    require_same_size(pred.size(), grad.size(), "loss_squared_grad");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        grad[i] = 2.0 * (pred[i] - truth[i]);
    }
}

double loss_quantile(std::span<const double> pred, std::span<const double> truth,
                     std::span<const double> levels) {
    require_levels(levels);
    require_same_size(pred.size(), truth.size() * levels.size(), "loss_quantile");
    double sum = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t q = 0; q < levels.size(); ++q) {
            const double p = levels[q];
            const double d = pred[t * levels.size() + q] - truth[t];
            sum += d > 0.0 ? (1.0 - p) * d : -p * d;
        }
    }
    return sum;
}

void loss_quantile_grad(std::span<const double> pred,
                        std::span<const double> truth,
                        std::span<const double> levels, std::span<double> grad) {
    require_levels(levels);
    require_same_size(pred.size(), truth.size() * levels.size(),
                      "loss_quantile_grad");
    require_same_size(pred.size(), grad.size(), "loss_quantile_grad");
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t q = 0; q < levels.size(); ++q) {
            const double p = levels[q];
            const double d = pred[t * levels.size() + q] - truth[t];
            grad[t * levels.size() + q] = d > 0.0 ? (1.0 - p) : (d < 0.0 ? -p : 0.0);
        }
    }
}

}  // namespace fedcast::models
