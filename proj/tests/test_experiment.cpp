#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedcast/errors.hpp"
#include "fedcast/experiment.hpp"

using namespace fedcast;
namespace fs = std::filesystem;

namespace {

std::string minimal_config_text(const std::string& out_dir,
                                int clients = 2) {
    return R"({
      "mode": "local",
      "seed": 7,
      "out_dir": ")" + out_dir + R"(",
      "data": {
        "synthetic": {
          "days": 8,
          "channels": [
            {"id": "t_in", "kind": "temperature", "mean": 20.0,
             "daily_amp": 2.0, "noise_sd": 0.1}
          ]
        },
        "clients": )" + std::to_string(clients) + R"(
      },
      "window": {"lookback": 24, "horizon": 2, "target": "t_in"},
      "model": {"kind": "linear"},
      "train": {"epochs": 1}
    })";
}

fs::path fresh_dir(const std::string& leaf) {
    const auto dir = fs::temp_directory_path() / leaf;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("a minimal config parses with conventional defaults") {
    const auto cfg = config_from_json_text(minimal_config_text("out"));
    CHECK(cfg.mode == RunMode::Local);
    CHECK(cfg.seed == 7);
    CHECK(cfg.data.synthetic_clients == 2);
    CHECK(cfg.data.step_seconds == 3600);
    CHECK_FALSE(cfg.data.apply_cleaning);
    CHECK(cfg.window.lookback == 24);
    CHECK(cfg.window.horizon == 2);
    CHECK(cfg.window.target_id == "t_in");
    CHECK(cfg.model.kind == models::ModelSpec::Kind::Linear);
    CHECK(cfg.model.quantile_levels.empty());
    CHECK(cfg.train.eta_c == 0.01);
    CHECK(cfg.train.epochs == 1);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.loss == models::LossKind::Squared);
    CHECK(cfg.federated.strategy == fed::StrategyKind::FedAvg);
    CHECK(cfg.federated.rounds == 50);
    CHECK_FALSE(cfg.federated.eta_s.has_value());
    CHECK(cfg.split.train == 0.7);
    CHECK(cfg.split.val == 0.1);
}

TEST_CASE("config hashing ignores key order and tracks content") {
    const std::string body = R"("data": {
        "synthetic": {"days": 8, "channels": [
          {"id": "t_in", "kind": "temperature", "mean": 20.0}]},
        "clients": 1
      },
      "window": {"lookback": 24, "horizon": 2, "target": "t_in"})";
    const auto a =
        config_from_json_text("{\"seed\": 3, \"mode\": \"local\", " + body + "}");
    const auto b =
        config_from_json_text("{" + body + ", \"mode\": \"local\", \"seed\": 3}");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a).find_first_not_of("0123456789abcdef") ==
          std::string::npos);

    auto c = a;
    c.seed = 4;
    CHECK(config_hash(c) != config_hash(a));

    // The canonical rendering is a fixed point of parse -> render.
    const auto rendered = config_to_json(a);
    CHECK(config_to_json(config_from_json_text(rendered)) == rendered);
}

TEST_CASE("config parsing pinpoints unknown keys and bad types") {
    CHECK_THROWS_WITH_AS(config_from_json_text("{\"modes\": \"local\"}"),
                         doctest::Contains("modes"), ConfigError);
    const std::string bad_window = R"({
      "data": {"synthetic": {"days": 8, "channels": [
        {"id": "t", "kind": "temperature"}]}},
      "window": {"lookbak": 24, "horizon": 2, "target": "t"}
    })";
    CHECK_THROWS_WITH_AS(config_from_json_text(bad_window),
                         doctest::Contains("lookbak"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_json_text("{\"seed\": \"seven\"}"),
                         doctest::Contains("seed"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("[1, 2]"), ConfigError);
}

TEST_CASE("config validation enforces structural rules") {
    auto cfg = config_from_json_text(minimal_config_text("out", 1));

    SUBCASE("exactly one data source") {
        cfg.data.csv_paths = {"also.csv"};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.data.csv_paths.clear();
        cfg.data.synthetic.reset();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("window channels must be producible") {
        cfg.window.target_id = "nonexistent";
        CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("nonexistent"),
                             ConfigError);
    }
    SUBCASE("quantile loss and quantile heads come together") {
        cfg.train.loss = models::LossKind::Quantile;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.train.loss = models::LossKind::Squared;
        cfg.model.quantile_levels = {0.1, 0.5, 0.9};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("the seasonal baseline cannot be federated") {
        cfg.mode = RunMode::Federated;
        cfg.model.kind = models::ModelSpec::Kind::SeasonalNaive;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("federated knobs have ranges") {
        cfg.federated.sample_fraction = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.federated.sample_fraction = 1.0;
        cfg.federated.transport_loss_prob = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.federated.transport_loss_prob = 0.0;
        cfg.federated.eta_s = -0.1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("split fractions must leave room for a test partition") {
        cfg.split.train = 0.9;
        cfg.split.val = 0.1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}

TEST_CASE("synthetic materialization is reproducible and per-client distinct") {
    const auto cfg = config_from_json_text(minimal_config_text("out"));
    const auto once = materialize_synthetic(cfg.data, cfg.seed);
    const auto again = materialize_synthetic(cfg.data, cfg.seed);
    REQUIRE(once.size() == 2);
    CHECK(once[0].first == "client0");
    CHECK(once[1].first == "client1");
    REQUIRE(once[0].second.size() == 1);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& s1 = once[c].second[0];
        const auto& s2 = again[c].second[0];
        REQUIRE(s1.size() == s2.size());
        for (std::size_t i = 0; i < s1.size(); ++i) {
            CHECK(*s1.at(i) == *s2.at(i));
        }
    }
    // Clients draw independent noise streams from the shared recipe.
    bool differs = false;
    for (std::size_t i = 0; i < once[0].second[0].size(); ++i) {
        if (*once[0].second[0].at(i) != *once[1].second[0].at(i)) {
            differs = true;
            break;
        }
    }
    CHECK(differs);

    auto other = cfg;
    other.seed = cfg.seed + 1;
    const auto reseeded = materialize_synthetic(other.data, other.seed);
    CHECK(*reseeded[0].second[0].at(0) != *once[0].second[0].at(0));

    DataConfig csv_only;
    csv_only.csv_paths = {"a.csv"};
    CHECK_THROWS_AS(materialize_synthetic(csv_only, 1), ConfigError);
}

TEST_CASE("a local run writes config, reports and checkpoints") {
    const auto dir = fresh_dir("fedcast_test_local_run");
    const auto cfg = config_from_json_text(minimal_config_text(dir.string()));
    const auto report = run_experiment(cfg);
    CHECK(report.mode == RunMode::Local);
    CHECK(report.config_hash == config_hash(cfg));
    REQUIRE(report.clients.size() == 2);
    CHECK(report.clients[0].client_id == "client0");
    CHECK(std::isfinite(report.clients[0].report.cv_rmse_pct));

    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "eval_local_client0.json"));
    CHECK(fs::exists(dir / "eval_local_client1.json"));
    CHECK(fs::exists(dir / "params_local_client0.bin"));
    CHECK(fs::exists(dir / "params_local_client1.bin"));

    const auto eval = nlohmann::json::parse(slurp(dir / "eval_local_client0.json"));
    CHECK(eval.at("mode") == "local");
    CHECK(eval.at("client") == "client0");
    CHECK(eval.at("target") == "t_in");
    CHECK(eval.at("config_hash") == config_hash(cfg));
    CHECK(eval.at("cv_rmse_pct").is_number());

    // The stored config is the canonical rendering of what we ran.
    CHECK(slurp(dir / "config.json") == config_to_json(cfg) + "\n");
}

TEST_CASE("checkpoint evaluation reproduces the training-time report") {
    const auto dir = fresh_dir("fedcast_test_checkpoint");
    const auto cfg = config_from_json_text(minimal_config_text(dir.string()));
    const auto trained = run_experiment(cfg);
    const auto checkpoint = (dir / "params_local_client0.bin").string();
    const auto evald = evaluate_checkpoint(cfg, checkpoint);
    REQUIRE(evald.clients.size() == 2);
    CHECK(evald.clients[0].report.cv_rmse_pct ==
          trained.clients[0].report.cv_rmse_pct);
    CHECK(evald.clients[0].report.nmbe_pct ==
          trained.clients[0].report.nmbe_pct);
    CHECK(fs::exists(dir / "eval_checkpoint_client0.json"));
    CHECK(fs::exists(dir / "eval_checkpoint_client1.json"));
}

TEST_CASE("one federated client with one round matches plain local training") {
    const auto local_dir = fresh_dir("fedcast_test_single_local");
    const auto fed_dir = fresh_dir("fedcast_test_single_fed");
    auto local_cfg =
        config_from_json_text(minimal_config_text(local_dir.string(), 1));
    auto fed_cfg = local_cfg;
    fed_cfg.mode = RunMode::Federated;
    fed_cfg.out_dir = fed_dir.string();
    fed_cfg.federated.rounds = 1;

    run_experiment(local_cfg);
    run_experiment(fed_cfg);
    const auto local_params =
        models::ParamVector::load((local_dir / "params_local_client0.bin").string());
    const auto fed_params =
        models::ParamVector::load((fed_dir / "params_federated.bin").string());
    REQUIRE(local_params.layoutTag() == fed_params.layoutTag());
    REQUIRE(local_params.size() == fed_params.size());
    for (std::size_t i = 0; i < local_params.size(); ++i) {
        CHECK(std::fabs(local_params[i] - fed_params[i]) < 1e-12);
    }
    CHECK(fs::exists(fed_dir / "rounds_federated.csv"));
}

TEST_CASE("compare produces one row per mode, client and target") {
    const auto dir = fresh_dir("fedcast_test_compare");
    auto cfg = config_from_json_text(minimal_config_text(dir.string()));
    cfg.federated.rounds = 2;
    const auto reports = run_compare(cfg);
    REQUIRE(reports.size() == 3);

    std::ifstream in(dir / "compare.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "mode,client,target,model,cv_rmse_pct,nmbe_pct,"
          "compliant_whole_building,compliant_indoor_t_rh,compliant_co2,"
          "config_hash");
    std::size_t local_rows = 0, central_rows = 0, fed_rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("local,", 0) == 0) ++local_rows;
        if (line.rfind("centralized,", 0) == 0) ++central_rows;
        if (line.rfind("federated,", 0) == 0) ++fed_rows;
        CHECK(line.find(",t_in,") != std::string::npos);
    }
    CHECK(local_rows == 2);
    CHECK(central_rows == 2);
    CHECK(fed_rows == 2);
}

TEST_CASE("climate report configs validate their field combinations") {
    ClimateReportConfig cfg;
    cfg.csv_paths = {"site.csv"};
    cfg.indoor_t = "t_in";
    cfg.indoor_rh = "rh_in";
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("requires at least one file") {
        cfg.csv_paths.clear();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("indoor channels are mandatory") {
        cfg.indoor_rh.clear();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("the outdoor pair comes whole or not at all") {
        cfg.outdoor_t = "t_out";
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.outdoor_rh = "rh_out";
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("smoothing and flag parameters have ranges") {
        cfg.ma_days = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.ma_days = 7;
        cfg.moisture_flag_fraction = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.moisture_flag_fraction = 0.9;
        cfg.step_seconds = 7000;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}
