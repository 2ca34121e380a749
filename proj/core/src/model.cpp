#include "fedcast/model.hpp"

#include <algorithm>
#include <cmath>

#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"

namespace fedcast::models {

namespace {

void flatten_into(const core::WindowSample& s, std::vector<double>& out) {
    out.clear();
    out.insert(out.end(), s.y_past.begin(), s.y_past.end());
    out.insert(out.end(), s.xb_past.begin(), s.xb_past.end());
    out.insert(out.end(), s.xf_future.begin(), s.xf_future.end());
}

}  // namespace

Scaler::Scaler(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {}

Scaler Scaler::identity(std::size_t dim) {
    return Scaler(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

Scaler Scaler::fit(const core::SupervisedWindowSet& train) {
    if (train.empty()) {
        throw InvalidSpec("Scaler::fit: cannot fit on an empty training set");
    }
    const std::size_t dim = train.featureDim();
    const double n = static_cast<double>(train.size());

    std::vector<double> mean(dim, 0.0), var(dim, 0.0), x;
    for (const auto& s : train.samples()) {
        flatten_into(s, x);
        for (std::size_t f = 0; f < dim; ++f) mean[f] += x[f];
    }
    for (double& m : mean) m /= n;
    for (const auto& s : train.samples()) {
        flatten_into(s, x);
        for (std::size_t f = 0; f < dim; ++f) {
            const double d = x[f] - mean[f];
            var[f] += d * d;
        }
    }

    std::vector<double> scale(dim, 1.0);
    for (std::size_t f = 0; f < dim; ++f) {
        const double sd = std::sqrt(var[f] / n);
        if (sd < 1e-12) {
            mean[f] = 0.0;  // constant feature passes through unscaled
        } else {
            scale[f] = sd;
        }
    }
    return Scaler(std::move(mean), std::move(scale));
}

std::vector<double> Scaler::apply(const core::WindowSample& sample) const {
    std::vector<double> x;
    flatten_into(sample, x);
    if (x.size() != mean_.size()) {
        throw ShapeError("Scaler: sample has " + std::to_string(x.size()) +
                         " features, scaler was fitted on " +
                         std::to_string(mean_.size()));
    }
    for (std::size_t f = 0; f < x.size(); ++f) {
        x[f] = (x[f] - mean_[f]) / scale_[f];
    }
    return x;
}

void ModelSpec::validate() const {
    if (kind == Kind::SeasonalNaive) {
        if (period < 1) {
            throw InvalidSpec("ModelSpec: seasonal period must be >= 1");
        }
        if (!quantile_levels.empty()) {
            throw InvalidSpec("ModelSpec: the seasonal baseline is a point "
                              "forecaster; quantile heads are not available");
        }
        if (!hidden.empty()) {
            throw InvalidSpec("ModelSpec: hidden layers do not apply to the "
                              "seasonal baseline");
        }
    }
    if (kind == Kind::Linear && !hidden.empty()) {
        throw InvalidSpec("ModelSpec: a linear model has no hidden layers; "
                          "use kind dense instead");
    }
    if (kind == Kind::Dense && hidden.empty()) {
        throw InvalidSpec("ModelSpec: dense model needs at least one hidden width");
    }
    for (int w : hidden) {
        if (w < 1) throw InvalidSpec("ModelSpec: hidden widths must be >= 1");
    }
    for (std::size_t i = 0; i < quantile_levels.size(); ++i) {
        const double p = quantile_levels[i];
        if (!(p > 0.0 && p < 1.0)) {
            throw InvalidQuantile("ModelSpec: quantile level " +
                                  std::to_string(p) + " is outside (0, 1)");
        }
        if (i > 0 && !(quantile_levels[i - 1] < p)) {
            throw InvalidSpec("ModelSpec: quantile levels must be strictly "
                              "increasing");
        }
    }
}

ModelSpec::Kind model_kind_from_name(const std::string& name) {
    if (name == "snaive") return ModelSpec::Kind::SeasonalNaive;
    if (name == "linear") return ModelSpec::Kind::Linear;
    if (name == "dense") return ModelSpec::Kind::Dense;
    throw InvalidSpec("unknown model kind '" + name +
                      "' (expected snaive, linear or dense)");
}

std::string model_kind_name(ModelSpec::Kind kind) {
    switch (kind) {
        case ModelSpec::Kind::SeasonalNaive: return "snaive";
        case ModelSpec::Kind::Linear: return "linear";
        case ModelSpec::Kind::Dense: return "dense";
    }
    throw InvalidSpec("unhandled model kind");
}

namespace {

void check_loss_compat(LossKind loss, const std::vector<double>& levels) {
    if (loss == LossKind::Quantile && levels.empty()) {
        throw InvalidSpec("quantile loss requires a model with quantile heads");
    }
    if (loss == LossKind::Squared && !levels.empty()) {
        throw InvalidSpec("squared loss does not apply to a quantile model");
    }
}

/**
 * @brief Fully connected stack: input -> hidden (ReLU) -> output (linear).
 *
 * With no hidden layers this is exactly the direct linear map from the
 * flattened window to all horizon steps.  Parameters are packed layer by
 * layer, each as its row-major weight matrix followed by its bias vector.
 */
class AffineStackModel final : public ForecastModel {
public:
    AffineStackModel(int lookback, int horizon, std::size_t in_dim,
                     std::vector<int> hidden, std::vector<double> levels,
                     Scaler scaler)
        : lookback_(lookback),
          horizon_(horizon),
          levels_(std::move(levels)),
          scaler_(std::move(scaler)) {
        dims_.push_back(in_dim);
        for (int h : hidden) dims_.push_back(static_cast<std::size_t>(h));
        dims_.push_back(static_cast<std::size_t>(horizon_) *
                        std::max<std::size_t>(1, levels_.size()));

        param_count_ = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            param_count_ += dims_[l] * dims_[l + 1] + dims_[l + 1];
        }

        layout_tag_ = hidden.empty() ? "linear" : "dense";
        layout_tag_ += "/in" + std::to_string(in_dim);
        for (int h : hidden) layout_tag_ += "/h" + std::to_string(h);
        layout_tag_ += "/out" + std::to_string(dims_.back());
    }

    std::string name() const override {
        if (dims_.size() == 2) return "linear";
        std::string n = "dense[";
        for (std::size_t l = 1; l + 1 < dims_.size(); ++l) {
            if (l > 1) n += ",";
            n += std::to_string(dims_[l]);
        }
        return n + "]";
    }

    const std::string& layoutTag() const noexcept override { return layout_tag_; }
    std::size_t paramCount() const noexcept override { return param_count_; }
    bool trainable() const noexcept override { return true; }
    int lookback() const noexcept override { return lookback_; }
    int horizon() const noexcept override { return horizon_; }
    const std::vector<double>& quantileLevels() const noexcept override {
        return levels_;
    }
    const Scaler& scaler() const noexcept override { return scaler_; }

    ParamVector initParams(std::uint64_t seed) const override {
        std::vector<double> p(param_count_, 0.0);
        SplitMix64 g(derive_stream(seed, fnv1a64(layout_tag_)));
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            const std::size_t fan_in = dims_[l];
            const std::size_t fan_out = dims_[l + 1];
            const double limit =
                std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
                p[off + i] = g.nextUniform(-limit, limit);
            }
            off += fan_in * fan_out + fan_out;  // biases stay zero
        }
        return ParamVector(layout_tag_, std::move(p));
    }

    std::vector<double> predict(const ParamVector& params,
                                const core::WindowSample& sample) const override {
        requireParams(params);
        std::vector<double> act = scaler_.apply(sample);
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            act = forwardLayer(params, l, off, act,
                               /*relu=*/l + 2 < dims_.size());
        }
        return act;
    }

    double meanLoss(const ParamVector& params,
                    std::span<const core::WindowSample> batch,
                    LossKind loss) const override {
        requireParams(params);
        check_loss_compat(loss, levels_);
        if (batch.empty()) {
            throw InvalidSpec("meanLoss: batch must not be empty");
        }
        double total = 0.0;
        for (const auto& s : batch) {
            const auto pred = predict(params, s);
            total += loss == LossKind::Squared
                         ? loss_squared(pred, s.y_future)
                         : loss_quantile(pred, s.y_future, levels_);
        }
        return total / static_cast<double>(batch.size());
    }

    ParamVector gradient(const ParamVector& params,
                         std::span<const core::WindowSample> batch,
                         LossKind loss) const override {
        requireParams(params);
        check_loss_compat(loss, levels_);
        if (batch.empty()) {
            throw InvalidSpec("gradient: batch must not be empty");
        }

        const std::size_t n_layers = dims_.size() - 1;
        std::vector<double> grad(param_count_, 0.0);
        std::vector<std::vector<double>> acts(n_layers + 1);
        std::vector<double> out_grad(dims_.back());

        for (const auto& s : batch) {
            acts[0] = scaler_.apply(s);
            std::size_t off = 0;
            std::vector<std::size_t> offsets(n_layers);
            for (std::size_t l = 0; l < n_layers; ++l) {
                offsets[l] = off;
                acts[l + 1] = forwardLayer(params, l, off, acts[l],
                                           /*relu=*/l + 1 < n_layers);
            }

            if (loss == LossKind::Squared) {
                loss_squared_grad(acts[n_layers], s.y_future, out_grad);
            } else {
                loss_quantile_grad(acts[n_layers], s.y_future, levels_, out_grad);
            }

            // Backward pass; delta is dL/d(pre-activation of layer l+1).
            std::vector<double> delta = out_grad;
            for (std::size_t l = n_layers; l-- > 0;) {
                const std::size_t in_d = dims_[l], out_d = dims_[l + 1];
                const std::size_t w_off = offsets[l];
                const std::size_t b_off = w_off + in_d * out_d;
                const auto& in_act = acts[l];
                for (std::size_t r = 0; r < out_d; ++r) {
                    const double dr = delta[r];
                    if (dr == 0.0) continue;
                    double* wrow = grad.data() + w_off + r * in_d;
                    for (std::size_t c = 0; c < in_d; ++c) {
                        wrow[c] += dr * in_act[c];
                    }
                    grad[b_off + r] += dr;
                }
                if (l == 0) break;
                std::vector<double> prev(in_d, 0.0);
                for (std::size_t r = 0; r < out_d; ++r) {
                    const double dr = delta[r];
                    if (dr == 0.0) continue;
                    const double* wrow = params.values().data() + w_off + r * in_d;
                    for (std::size_t c = 0; c < in_d; ++c) {
                        prev[c] += dr * wrow[c];
                    }
                }
                // ReLU subgradient: pass-through only where the input
                // activation was strictly positive.
                for (std::size_t c = 0; c < in_d; ++c) {
                    if (in_act[c] <= 0.0) prev[c] = 0.0;
                }
                delta = std::move(prev);
            }
        }

        const double inv_n = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad) g *= inv_n;
        return ParamVector(layout_tag_, std::move(grad));
    }

private:
    void requireParams(const ParamVector& params) const {
        if (params.layoutTag() != layout_tag_ || params.size() != param_count_) {
            throw ShapeError("parameter vector '" + params.layoutTag() +
                             "' does not fit model '" + layout_tag_ + "'");
        }
    }

    std::vector<double> forwardLayer(const ParamVector& params, std::size_t l,
                                     std::size_t& off,
                                     const std::vector<double>& in,
                                     bool relu) const {
        const std::size_t in_d = dims_[l], out_d = dims_[l + 1];
        const double* w = params.values().data() + off;
        const double* b = w + in_d * out_d;
        std::vector<double> out(out_d);
        for (std::size_t r = 0; r < out_d; ++r) {
            double acc = b[r];
            const double* wrow = w + r * in_d;
            for (std::size_t c = 0; c < in_d; ++c) acc += wrow[c] * in[c];
            out[r] = relu && acc < 0.0 ? 0.0 : acc;
        }
        off += in_d * out_d + out_d;
        return out;
    }

    int lookback_;
    int horizon_;
    std::vector<double> levels_;
    Scaler scaler_;
    std::vector<std::size_t> dims_;
    std::size_t param_count_ = 0;
    std::string layout_tag_;
};

/**
 * @brief Seasonal persistence: each horizon step repeats the value one
 * whole period (or as many periods as needed) back from it.
 *
 * Step i (1-based) forecasts y[t + i - lag] with
 * lag = period * (floor((i - 1) / period) + 1); a lookback of at least
 * one period suffices for every horizon.
 */
class SeasonalNaiveModel final : public ForecastModel {
public:
    SeasonalNaiveModel(int lookback, int horizon, int period, Scaler scaler)
        : lookback_(lookback),
          horizon_(horizon),
          period_(period),
          scaler_(std::move(scaler)),
          layout_tag_("snaive/p" + std::to_string(period) + "/out" +
                      std::to_string(horizon)) {
        if (lookback_ < period_) {
            throw InvalidSpec("seasonal baseline needs lookback >= period (" +
                              std::to_string(lookback_) + " < " +
                              std::to_string(period_) + ")");
        }
    }

    std::string name() const override {
        return "snaive" + std::to_string(period_);
    }
    const std::string& layoutTag() const noexcept override { return layout_tag_; }
    std::size_t paramCount() const noexcept override { return 0; }
    bool trainable() const noexcept override { return false; }
    int lookback() const noexcept override { return lookback_; }
    int horizon() const noexcept override { return horizon_; }
    const std::vector<double>& quantileLevels() const noexcept override {
        return levels_;
    }
    const Scaler& scaler() const noexcept override { return scaler_; }

    ParamVector initParams(std::uint64_t) const override {
        return ParamVector::zeros(layout_tag_, 0);
    }

    std::vector<double> predict(const ParamVector& params,
                                const core::WindowSample& sample) const override {
        if (params.layoutTag() != layout_tag_) {
            throw ShapeError("parameter vector '" + params.layoutTag() +
                             "' does not fit model '" + layout_tag_ + "'");
        }
        if (sample.y_past.size() != static_cast<std::size_t>(lookback_)) {
            throw ShapeError("sample lookback does not match model");
        }
        std::vector<double> out(static_cast<std::size_t>(horizon_));
        for (int i = 1; i <= horizon_; ++i) {
            const int lag = period_ * ((i - 1) / period_ + 1);
            // Index of t + i - lag inside y_past, whose last entry is t.
            const int idx = lookback_ - 1 + i - lag;
            out[static_cast<std::size_t>(i - 1)] =
                sample.y_past[static_cast<std::size_t>(idx)];
        }
        return out;
    }

    double meanLoss(const ParamVector& params,
                    std::span<const core::WindowSample> batch,
                    LossKind loss) const override {
        check_loss_compat(loss, levels_);
        if (batch.empty()) {
            throw InvalidSpec("meanLoss: batch must not be empty");
        }
        double total = 0.0;
        for (const auto& s : batch) {
            total += loss_squared(predict(params, s), s.y_future);
        }
        return total / static_cast<double>(batch.size());
    }

    ParamVector gradient(const ParamVector&,
                         std::span<const core::WindowSample>,
                         LossKind) const override {
        throw NotTrainable("the seasonal baseline has no trainable parameters");
    }

private:
    int lookback_;
    int horizon_;
    int period_;
    Scaler scaler_;
    std::vector<double> levels_;
    std::string layout_tag_;
};

}  // namespace

std::unique_ptr<ForecastModel> make_model(const ModelSpec& spec,
                                          const core::SupervisedWindowSet& shape,
                                          Scaler scaler) {
    spec.validate();
    if (scaler.dim() != shape.featureDim()) {
        throw ShapeError("make_model: scaler dimension " +
                         std::to_string(scaler.dim()) +
                         " does not match the window feature dimension " +
                         std::to_string(shape.featureDim()));
    }
    switch (spec.kind) {
        case ModelSpec::Kind::SeasonalNaive:
            return std::make_unique<SeasonalNaiveModel>(
                shape.lookback(), shape.horizon(), spec.period,
                std::move(scaler));
        case ModelSpec::Kind::Linear:
            return std::make_unique<AffineStackModel>(
                shape.lookback(), shape.horizon(), shape.featureDim(),
                std::vector<int>{}, spec.quantile_levels, std::move(scaler));
        case ModelSpec::Kind::Dense:
            return std::make_unique<AffineStackModel>(
                shape.lookback(), shape.horizon(), shape.featureDim(),
                spec.hidden, spec.quantile_levels, std::move(scaler));
    }
    throw InvalidSpec("make_model: unhandled model kind");
}

}  // namespace fedcast::models
