#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "fedcast/errors.hpp"
#include "fedcast/losses.hpp"
#include "fedcast/model.hpp"
#include "fedcast/param_vector.hpp"
#include "fedcast/time_series.hpp"
#include "fedcast/train.hpp"
#include "fedcast/windowing.hpp"

using namespace fedcast;
using models::ParamVector;

namespace {

core::SupervisedWindowSet windows_from(const std::vector<double>& values,
                                       int lookback, int horizon) {
    std::vector<std::optional<double>> v(values.begin(), values.end());
    core::TimeSeries series("t", 0, 3600, std::move(v));
    core::WindowSpec spec;
    spec.lookback = lookback;
    spec.horizon = horizon;
    spec.target_id = "t";
    return core::make_windows({series}, spec);
}

std::vector<double> iota_values(std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * static_cast<double>(i);
    return v;
}

}  // namespace

TEST_CASE("param vector arithmetic and layout guard") {
    ParamVector a("tag", {1.0, 2.0});
    ParamVector b("tag", {0.5, -1.0});
    ParamVector c = a + b;
    CHECK(c.values()[0] == 1.5);
    CHECK(c.values()[1] == 1.0);
    c -= b;
    CHECK(c == a);
    c *= 2.0;
    CHECK(c.values()[0] == 2.0);
    CHECK(ParamVector::zeros("tag", 2).values()[1] == 0.0);

    ParamVector other("other", {1.0, 2.0});
    CHECK_THROWS_AS(a + other, ShapeError);
    ParamVector shorter("tag", {1.0});
    CHECK_THROWS_AS(a + shorter, ShapeError);
}

TEST_CASE("param vector serialization round-trips exact bits") {
    ParamVector a("layout/in3", {0.1, -0.0, 1e-308, 3.0e200, -7.25});
    const auto bytes = a.serialize();
    const auto back = ParamVector::deserialize(bytes);
    CHECK(back.layoutTag() == a.layoutTag());
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back[i] == a[i]);
        CHECK(std::signbit(back[i]) == std::signbit(a[i]));
    }

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(ParamVector::deserialize(truncated), Error);
    CHECK_THROWS_AS(ParamVector::deserialize({}), Error);
}

TEST_CASE("param vector file checkpoints") {
    const auto path =
        (std::filesystem::temp_directory_path() / "fedcast_test_ckpt.bin")
            .string();
    ParamVector a("tag", {1.5, 2.5, -3.5});
    a.save(path);
    CHECK(ParamVector::load(path) == a);
    CHECK_THROWS_AS(ParamVector::load("/nonexistent/params.bin"), Error);
}

TEST_CASE("squared loss and gradient") {
    const std::vector<double> pred{1.0, 3.0};
    const std::vector<double> truth{2.0, 1.0};
    CHECK(models::loss_squared(pred, truth) == 5.0);  // 1 + 4, no 1/2 factor
    std::vector<double> grad(2);
    models::loss_squared_grad(pred, truth, grad);
    CHECK(grad[0] == -2.0);
    CHECK(grad[1] == 4.0);
}

TEST_CASE("pinball loss and subgradient") {
    const std::vector<double> levels{0.1, 0.9};
    // horizon=1, two levels; pred row-major [q_0.1, q_0.9].
    std::vector<double> pred{2.0, 4.0};
    const std::vector<double> truth{3.0};
    // under-prediction at p=0.1: 0.1 * (3-2); over-prediction at p=0.9:
    // (1-0.9) * (4-3).
    CHECK(models::loss_quantile(pred, truth, levels) ==
          doctest::Approx(0.1 + 0.1).epsilon(1e-15));
    std::vector<double> grad(2);
    models::loss_quantile_grad(pred, truth, levels, grad);
    CHECK(grad[0] == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(grad[1] == doctest::Approx(0.1).epsilon(1e-15));

    // Exactly at the truth the subgradient is zero.
    pred = {3.0, 3.0};
    models::loss_quantile_grad(pred, truth, levels, grad);
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] == 0.0);

    const std::vector<double> one_pred{2.0};
    CHECK_THROWS_AS(
        models::loss_quantile(one_pred, truth, std::vector<double>{0.0}),
        InvalidQuantile);
    CHECK_THROWS_AS(
        models::loss_quantile(one_pred, truth, std::vector<double>{1.0}),
        InvalidQuantile);
}

TEST_CASE("scaler standardizes features fitted on the training partition") {
    const auto set = windows_from({1, 2, 3, 4}, 2, 1);
    REQUIRE(set.size() == 2);  // y_past features {1,2} and {2,3}
    const auto scaler = models::Scaler::fit(set);
    REQUIRE(scaler.dim() == 2);
    CHECK(scaler.means()[0] == 1.5);
    CHECK(scaler.means()[1] == 2.5);
    const auto z = scaler.apply(set.samples().front());
    CHECK(z[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(-1.0).epsilon(1e-12));

    const auto id = models::Scaler::identity(2);
    const auto raw = id.apply(set.samples().front());
    CHECK(raw[0] == 1.0);
    CHECK(raw[1] == 2.0);
}

TEST_CASE("scaler passes constant features through unscaled") {
    const auto set = windows_from({5, 5, 5, 5, 5}, 2, 1);
    const auto scaler = models::Scaler::fit(set);
    const auto z = scaler.apply(set.samples().front());
    CHECK(z[0] == 5.0);
    CHECK(z[1] == 5.0);
}

TEST_CASE("model spec validation") {
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    CHECK_NOTHROW(spec.validate());
    spec.hidden = {8};
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);

    spec = {};
    spec.kind = models::ModelSpec::Kind::Dense;
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);  // dense needs hidden
    spec.hidden = {8, 0};
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec.hidden = {8, 4};
    CHECK_NOTHROW(spec.validate());

    spec.quantile_levels = {0.1, 0.5, 0.9};
    CHECK_NOTHROW(spec.validate());
    spec.quantile_levels = {0.5, 0.5};
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec.quantile_levels = {0.9, 0.1};
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec.quantile_levels = {0.0, 0.5};
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);

    spec = {};
    spec.kind = models::ModelSpec::Kind::SeasonalNaive;
    spec.period = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);

    CHECK(models::model_kind_from_name("snaive") ==
          models::ModelSpec::Kind::SeasonalNaive);
    CHECK_THROWS_AS(models::model_kind_from_name("transformer"), Error);
}

TEST_CASE("linear prediction is an affine map of the flattened window") {
    const auto set = windows_from(iota_values(12), 3, 2);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    const auto model = models::make_model(spec, set, models::Scaler::identity(3));
    CHECK(model->name() == "linear");
    CHECK(model->trainable());
    CHECK(model->paramCount() == 3 * 2 + 2);

    // Zero parameters predict zero everywhere.
    const auto zeros = ParamVector::zeros(model->layoutTag(), model->paramCount());
    const auto z = model->predict(zeros, set.samples().front());
    REQUIRE(z.size() == 2);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    // All-ones parameters: every output is sum(features) + 1, regardless
    // of how the weights are laid out in memory.
    const ParamVector ones(model->layoutTag(),
                           std::vector<double>(model->paramCount(), 1.0));
    const auto& s = set.samples().front();  // y_past = {0,1,2}
    const auto p = model->predict(ones, s);
    CHECK(p[0] == doctest::Approx(0 + 1 + 2 + 1).epsilon(1e-12));
    CHECK(p[1] == p[0]);
}

TEST_CASE("dense prediction applies ReLU between affine layers") {
    const auto set = windows_from(iota_values(12), 3, 1);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Dense;
    spec.hidden = {4};
    const auto model = models::make_model(spec, set, models::Scaler::identity(3));
    CHECK(model->name() == "dense[4]");
    CHECK(model->paramCount() == (3 * 4 + 4) + (4 * 1 + 1));

    const ParamVector ones(model->layoutTag(),
                           std::vector<double>(model->paramCount(), 1.0));
    // y_past {0,1,2}: hidden pre-activation = 3 + 1 = 4 (positive, passes
    // ReLU) in all 4 units; output = 4 * 4 + 1.
    const auto p = model->predict(ones, set.samples().front());
    CHECK(p[0] == doctest::Approx(17.0).epsilon(1e-12));

    // Shift the inputs negative so every hidden unit is gated to zero:
    // output is the bias alone.
    const auto neg = windows_from(iota_values(12, -10.0), 3, 1);
    const auto p2 = model->predict(ones, neg.samples().front());
    CHECK(p2[0] == 1.0);
}

TEST_CASE("quantile models emit horizon x levels values row-major") {
    const auto set = windows_from(iota_values(12), 3, 2);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    spec.quantile_levels = {0.1, 0.5, 0.9};
    const auto model = models::make_model(spec, set, models::Scaler::identity(3));
    CHECK(model->outputDim() == 6);
    CHECK(model->paramCount() == 3 * 6 + 6);
    const auto z = model->predict(
        ParamVector::zeros(model->layoutTag(), model->paramCount()),
        set.samples().front());
    CHECK(z.size() == 6);
}

TEST_CASE("initial parameters are Glorot-bounded with zero biases") {
    const auto set = windows_from(iota_values(40), 6, 2);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Dense;
    spec.hidden = {5};
    const auto model = models::make_model(spec, set, models::Scaler::identity(6));
    const auto params = model->initParams(42);
    CHECK(params.layoutTag() == model->layoutTag());

    const double limit1 = std::sqrt(6.0 / (6 + 5));
    const double limit2 = std::sqrt(6.0 / (5 + 2));
    const double limit = std::max(limit1, limit2);
    std::size_t zero_count = 0;
    for (const double v : params.values()) {
        if (v == 0.0) {
            ++zero_count;
        } else {
            CHECK(std::fabs(v) <= limit);
        }
    }
    CHECK(zero_count == 5 + 2);  // one bias per unit, all zero-initialized

    CHECK(model->initParams(42) == params);
    CHECK_FALSE(model->initParams(43) == params);
}

TEST_CASE("seasonal naive repeats the last seen period") {
    // Perfect 24-periodic data: predictions equal the labels exactly.
    std::vector<double> values(24 * 6);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = 10.0 + std::sin(2.0 * 3.141592653589793 *
                                    static_cast<double>(i % 24) / 24.0);
    }
    const auto set = windows_from(values, 24, 6);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::SeasonalNaive;
    spec.period = 24;
    const auto model =
        models::make_model(spec, set, models::Scaler::identity(24));
    CHECK(model->name() == "snaive24");
    CHECK_FALSE(model->trainable());
    CHECK(model->paramCount() == 0);
    const auto params = model->initParams(0);
    for (const auto& s : set.samples()) {
        const auto p = model->predict(params, s);
        REQUIRE(p.size() == s.y_future.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] == s.y_future[i]);
        }
    }
}

TEST_CASE("seasonal naive reaches back whole periods for long horizons") {
    std::vector<double> values(24 * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<double>(i % 24);
    }
    // horizon 30 > period: steps 25..30 repeat the same slice again.
    const auto set = windows_from(values, 24, 30);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::SeasonalNaive;
    spec.period = 24;
    const auto model =
        models::make_model(spec, set, models::Scaler::identity(24));
    const auto params = model->initParams(0);
    for (const auto& s : set.samples()) {
        const auto p = model->predict(params, s);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] == s.y_future[i]);
        }
    }
}

TEST_CASE("seasonal naive refuses training and short lookbacks") {
    const auto set = windows_from(iota_values(80), 24, 2);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::SeasonalNaive;
    spec.period = 24;
    const auto model =
        models::make_model(spec, set, models::Scaler::identity(24));
    const auto params = model->initParams(0);
    CHECK_THROWS_AS(
        model->gradient(params, set.samples(), models::LossKind::Squared),
        NotTrainable);

    spec.period = 25;  // exceeds the lookback of 24
    CHECK_THROWS_AS(
        models::make_model(spec, set, models::Scaler::identity(24)),
        InvalidSpec);
}

TEST_CASE("make_model rejects a scaler of the wrong dimension") {
    const auto set = windows_from(iota_values(12), 3, 1);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    CHECK_THROWS_AS(models::make_model(spec, set, models::Scaler::identity(4)),
                    ShapeError);
}

TEST_CASE("training loss decreases monotonically on linear data") {
    // A pure trend is an exact affine function of the window, so SGD on a
    // linear model descends steadily at a small learning rate.
    const auto set = windows_from(iota_values(120, 0.1), 6, 2);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    const auto model = models::make_model(spec, set, models::Scaler::fit(set));
    models::TrainConfig cfg;
    cfg.eta_c = 0.01;
    cfg.epochs = 25;
    cfg.batch_size = 16;
    cfg.seed = 3;
    const auto result =
        models::train_local(*model, model->initParams(1), set, cfg);
    REQUIRE(result.curve.epoch_loss.size() == 25);
    for (std::size_t e = 1; e < result.curve.epoch_loss.size(); ++e) {
        CHECK(result.curve.epoch_loss[e] <= result.curve.epoch_loss[e - 1]);
    }
    CHECK(result.curve.epoch_loss.back() <
          0.5 * result.curve.epoch_loss.front());
}

TEST_CASE("training is bit-reproducible and seed-sensitive") {
    const auto set = windows_from(iota_values(90, 0.05), 4, 1);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    const auto model = models::make_model(spec, set, models::Scaler::fit(set));
    models::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.seed = 11;
    const auto init = model->initParams(2);
    const auto a = models::train_local(*model, init, set, cfg);
    const auto b = models::train_local(*model, init, set, cfg);
    CHECK(a.params == b.params);
    cfg.seed = 12;
    const auto c = models::train_local(*model, init, set, cfg);
    CHECK_FALSE(a.params == c.params);
}

TEST_CASE("an already-optimal model is a fixed point of training") {
    // All-zero record: the zero parameter vector predicts every label
    // exactly, the gradient vanishes, and SGD must not move a single bit.
    const auto set = windows_from(std::vector<double>(60, 0.0), 4, 1);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    const auto model = models::make_model(spec, set, models::Scaler::fit(set));
    models::TrainConfig cfg;
    cfg.epochs = 3;
    const auto init =
        models::ParamVector::zeros(model->layoutTag(), model->paramCount());
    const auto result = models::train_local(*model, init, set, cfg);
    CHECK(result.params == init);
    for (double loss : result.curve.epoch_loss) CHECK(loss == 0.0);
}

TEST_CASE("runaway learning rates raise a divergence error") {
    const auto set = windows_from(iota_values(60, 10.0), 4, 1);
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    const auto model =
        models::make_model(spec, set, models::Scaler::identity(4));
    models::TrainConfig cfg;
    cfg.eta_c = 1e12;
    cfg.epochs = 60;
    CHECK_THROWS_AS(
        models::train_local(*model, model->initParams(1), set, cfg), Diverged);
}

TEST_CASE("train config validation") {
    models::TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.eta_c = -0.1;
    CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
    cfg = {};
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
}
