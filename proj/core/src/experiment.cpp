#include "fedcast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fedcast/cleaning.hpp"
#include "fedcast/csv.hpp"
#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"

namespace fedcast {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            config_fail(path.empty() ? it.key() : path + "." + it.key(),
                        "unknown key");
        }
    }
}

template <typename T>
T get_field(const json& obj, const std::string& path, const char* key,
            T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_fail(path + "." + key, "wrong type");
    }
}

std::int64_t get_time_field(const json& obj, const std::string& path,
                            const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) {
        try {
            return ingest::parse_iso8601(v.get<std::string>());
        } catch (const Error& e) {
            config_fail(path + "." + key, e.what());
        }
    }
    config_fail(path + "." + key, "expected epoch seconds or ISO-8601 string");
}

ingest::SyntheticSpec parse_synthetic(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"days", "seed", "start_time", "channels", "occupancy_spikes",
                "opening_hour", "closing_hour", "spike_amplitude",
                "spike_probability"});
    ingest::SyntheticSpec spec;
    spec.days = get_field(obj, path, "days", spec.days);
    spec.seed = get_field(obj, path, "seed", spec.seed);
    spec.start_time = get_time_field(obj, path, "start_time", spec.start_time);
    spec.occupancy_spikes =
        get_field(obj, path, "occupancy_spikes", spec.occupancy_spikes);
    spec.opening_hour = get_field(obj, path, "opening_hour", spec.opening_hour);
    spec.closing_hour = get_field(obj, path, "closing_hour", spec.closing_hour);
    spec.spike_amplitude =
        get_field(obj, path, "spike_amplitude", spec.spike_amplitude);
    spec.spike_probability =
        get_field(obj, path, "spike_probability", spec.spike_probability);
    if (obj.contains("channels")) {
        if (!obj.at("channels").is_array()) {
            config_fail(path + ".channels", "expected an array");
        }
        std::size_t i = 0;
        for (const auto& c : obj.at("channels")) {
            const std::string cpath = path + ".channels[" + std::to_string(i++) + "]";
            check_keys(c, cpath,
                       {"id", "kind", "mean", "daily_amp", "weekly_amp",
                        "noise_sd"});
            ingest::SyntheticChannel ch;
            ch.id = get_field<std::string>(c, cpath, "id", "");
            if (ch.id.empty()) config_fail(cpath + ".id", "required");
            ch.kind = ingest::channel_kind_from_name(
                get_field<std::string>(c, cpath, "kind", "temperature"));
            ch.mean = get_field(c, cpath, "mean", ch.mean);
            ch.daily_amp = get_field(c, cpath, "daily_amp", ch.daily_amp);
            ch.weekly_amp = get_field(c, cpath, "weekly_amp", ch.weekly_amp);
            ch.noise_sd = get_field(c, cpath, "noise_sd", ch.noise_sd);
            spec.channels.push_back(std::move(ch));
        }
    }
    return spec;
}

json synthetic_to_json(const ingest::SyntheticSpec& spec) {
    json channels = json::array();
    for (const auto& c : spec.channels) {
        channels.push_back({{"id", c.id},
                            {"kind", ingest::channel_kind_name(c.kind)},
                            {"mean", c.mean},
                            {"daily_amp", c.daily_amp},
                            {"weekly_amp", c.weekly_amp},
                            {"noise_sd", c.noise_sd}});
    }
    return json{{"days", spec.days},
                {"seed", spec.seed},
                {"start_time", ingest::format_iso8601_utc(spec.start_time)},
                {"channels", channels},
                {"occupancy_spikes", spec.occupancy_spikes},
                {"opening_hour", spec.opening_hour},
                {"closing_hour", spec.closing_hour},
                {"spike_amplitude", spec.spike_amplitude},
                {"spike_probability", spec.spike_probability}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

std::string sanitize_name(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return out;
}

}  // namespace

RunMode run_mode_from_name(const std::string& name) {
    if (name == "local") return RunMode::Local;
    if (name == "centralized") return RunMode::Centralized;
    if (name == "federated") return RunMode::Federated;
    throw ConfigError("mode: unknown value '" + name +
                      "' (expected local, centralized or federated)");
}

std::string run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::Local: return "local";
        case RunMode::Centralized: return "centralized";
        case RunMode::Federated: return "federated";
    }
    throw ConfigError("mode: unhandled value");
}

void ExperimentConfig::validate() const {
    const bool has_csv = !data.csv_paths.empty();
    const bool has_synth = data.synthetic.has_value();
    if (has_csv == has_synth) {
        config_fail("data", "exactly one of csv_paths or synthetic is required");
    }
    if (has_synth) {
        if (data.synthetic_clients < 1) {
            config_fail("data.clients", "must be >= 1");
        }
        try {
            data.synthetic->validate();
        } catch (const Error& e) {
            config_fail("data.synthetic", e.what());
        }
        std::set<std::string> ids;
        for (const auto& c : data.synthetic->channels) ids.insert(c.id);
        const auto resolvable = [&](const std::string& id) {
            if (!ids.count(id)) {
                config_fail("window", "channel '" + id +
                                          "' is not produced by data.synthetic");
            }
        };
        resolvable(window.target_id);
        for (const auto& id : window.past_covariate_ids) resolvable(id);
        for (const auto& id : window.future_covariate_ids) resolvable(id);
    }
    if (data.step_seconds <= 0) config_fail("data.step_seconds", "must be positive");
    for (const auto& [id, kind] : data.channel_kinds) {
        try {
            ingest::channel_kind_from_name(kind);
        } catch (const Error& e) {
            config_fail("data.channel_kinds." + id, e.what());
        }
    }

    try {
        window.validate();
    } catch (const Error& e) {
        config_fail("window", e.what());
    }
    try {
        model.validate();
    } catch (const Error& e) {
        config_fail("model", e.what());
    }
    try {
        train.validate();
    } catch (const Error& e) {
        config_fail("train", e.what());
    }
    if ((train.loss == models::LossKind::Quantile) !=
        !model.quantile_levels.empty()) {
        config_fail("train.loss", "quantile loss and model.quantiles must be "
                                  "used together");
    }

    if (!(split.train > 0.0) || !(split.val >= 0.0) ||
        !(split.train + split.val < 1.0)) {
        config_fail("split", "need train > 0, val >= 0, train + val < 1");
    }

    if (federated.rounds < 1) config_fail("federated.rounds", "must be >= 1");
    if (!(federated.sample_fraction > 0.0 && federated.sample_fraction <= 1.0)) {
        config_fail("federated.sample_fraction", "must lie in (0, 1]");
    }
    if (!(federated.transport_loss_prob >= 0.0 &&
          federated.transport_loss_prob <= 1.0)) {
        config_fail("federated.transport_loss_prob", "must lie in [0, 1]");
    }
    if (federated.eta_s && !(*federated.eta_s > 0.0)) {
        config_fail("federated.eta_s", "must be positive");
    }
    for (auto [value, name] : {std::pair<double, const char*>{federated.beta, "beta"},
                               {federated.beta1, "beta1"},
                               {federated.beta2, "beta2"}}) {
        if (!(value >= 0.0 && value < 1.0)) {
            config_fail(std::string("federated.") + name, "must lie in [0, 1)");
        }
    }
    if (!(federated.tau > 0.0)) config_fail("federated.tau", "must be positive");
    if (mode == RunMode::Federated &&
        model.kind == models::ModelSpec::Kind::SeasonalNaive) {
        config_fail("model.kind", "the seasonal baseline has no parameters to "
                                  "federate");
    }
    if (out_dir.empty()) config_fail("out_dir", "must not be empty");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    check_keys(j, "",
               {"mode", "seed", "out_dir", "data", "window", "model", "train",
                "federated", "split"});

    ExperimentConfig cfg;
    cfg.mode = run_mode_from_name(get_field<std::string>(j, "", "mode", "local"));
    cfg.seed = get_field<std::uint64_t>(j, "", "seed", 0);
    cfg.out_dir = get_field<std::string>(j, "", "out_dir", cfg.out_dir);

    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d, "data",
                   {"csv_paths", "synthetic", "clients", "apply_cleaning",
                    "channel_kinds", "step_seconds"});
        cfg.data.csv_paths = get_field(d, "data", "csv_paths", cfg.data.csv_paths);
        if (d.contains("synthetic")) {
            cfg.data.synthetic = parse_synthetic(d.at("synthetic"), "data.synthetic");
        }
        cfg.data.synthetic_clients =
            get_field(d, "data", "clients", cfg.data.synthetic_clients);
        cfg.data.apply_cleaning =
            get_field(d, "data", "apply_cleaning", cfg.data.apply_cleaning);
        cfg.data.channel_kinds =
            get_field(d, "data", "channel_kinds", cfg.data.channel_kinds);
        cfg.data.step_seconds =
            get_field(d, "data", "step_seconds", cfg.data.step_seconds);
    }

    if (j.contains("window")) {
        const auto& w = j.at("window");
        check_keys(w, "window",
                   {"lookback", "horizon", "target", "past_covariates",
                    "future_covariates"});
        cfg.window.lookback = get_field(w, "window", "lookback", cfg.window.lookback);
        cfg.window.horizon = get_field(w, "window", "horizon", cfg.window.horizon);
        cfg.window.target_id =
            get_field(w, "window", "target", cfg.window.target_id);
        cfg.window.past_covariate_ids =
            get_field(w, "window", "past_covariates", cfg.window.past_covariate_ids);
        cfg.window.future_covariate_ids = get_field(
            w, "window", "future_covariates", cfg.window.future_covariate_ids);
    }

    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, "model", {"kind", "period", "hidden", "quantiles"});
        cfg.model.kind = models::model_kind_from_name(
            get_field<std::string>(m, "model", "kind", "linear"));
        cfg.model.period = get_field(m, "model", "period", cfg.model.period);
        cfg.model.hidden = get_field(m, "model", "hidden", cfg.model.hidden);
        cfg.model.quantile_levels =
            get_field(m, "model", "quantiles", cfg.model.quantile_levels);
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, "train", {"eta_c", "epochs", "batch_size", "loss"});
        cfg.train.eta_c = get_field(t, "train", "eta_c", cfg.train.eta_c);
        cfg.train.epochs = get_field(t, "train", "epochs", cfg.train.epochs);
        cfg.train.batch_size =
            get_field(t, "train", "batch_size", cfg.train.batch_size);
        const auto loss = get_field<std::string>(t, "train", "loss", "squared");
        if (loss == "squared") {
            cfg.train.loss = models::LossKind::Squared;
        } else if (loss == "quantile") {
            cfg.train.loss = models::LossKind::Quantile;
        } else {
            config_fail("train.loss", "expected squared or quantile");
        }
    }

    if (j.contains("federated")) {
        const auto& f = j.at("federated");
        check_keys(f, "federated",
                   {"strategy", "eta_s", "beta", "beta1", "beta2", "tau",
                    "rounds", "sample_fraction", "transport_loss_prob"});
        cfg.federated.strategy = fed::strategy_from_name(
            get_field<std::string>(f, "federated", "strategy", "fedavg"));
        // null marks "use the strategy's conventional step size", which is
        // how the canonical rendering spells an unset value.
        if (f.contains("eta_s") && !f.at("eta_s").is_null()) {
            cfg.federated.eta_s = get_field<double>(f, "federated", "eta_s", 1.0);
        }
        cfg.federated.beta = get_field(f, "federated", "beta", cfg.federated.beta);
        cfg.federated.beta1 = get_field(f, "federated", "beta1", cfg.federated.beta1);
        cfg.federated.beta2 = get_field(f, "federated", "beta2", cfg.federated.beta2);
        cfg.federated.tau = get_field(f, "federated", "tau", cfg.federated.tau);
        cfg.federated.rounds =
            get_field(f, "federated", "rounds", cfg.federated.rounds);
        cfg.federated.sample_fraction = get_field(
            f, "federated", "sample_fraction", cfg.federated.sample_fraction);
        cfg.federated.transport_loss_prob =
            get_field(f, "federated", "transport_loss_prob",
                      cfg.federated.transport_loss_prob);
    }

    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, "split", {"train", "val"});
        cfg.split.train = get_field(s, "split", "train", cfg.split.train);
        cfg.split.val = get_field(s, "split", "val", cfg.split.val);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["mode"] = run_mode_name(cfg.mode);
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["data"] = {{"csv_paths", cfg.data.csv_paths},
                 {"synthetic", cfg.data.synthetic
                                   ? synthetic_to_json(*cfg.data.synthetic)
                                   : json(nullptr)},
                 {"clients", cfg.data.synthetic_clients},
                 {"apply_cleaning", cfg.data.apply_cleaning},
                 {"channel_kinds", cfg.data.channel_kinds},
                 {"step_seconds", cfg.data.step_seconds}};
    j["window"] = {{"lookback", cfg.window.lookback},
                   {"horizon", cfg.window.horizon},
                   {"target", cfg.window.target_id},
                   {"past_covariates", cfg.window.past_covariate_ids},
                   {"future_covariates", cfg.window.future_covariate_ids}};
    j["model"] = {{"kind", models::model_kind_name(cfg.model.kind)},
                  {"period", cfg.model.period},
                  {"hidden", cfg.model.hidden},
                  {"quantiles", cfg.model.quantile_levels}};
    j["train"] = {{"eta_c", cfg.train.eta_c},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"loss", cfg.train.loss == models::LossKind::Squared
                               ? "squared"
                               : "quantile"}};
    j["federated"] = {
        {"strategy", fed::strategy_name(cfg.federated.strategy)},
        {"eta_s", cfg.federated.eta_s ? json(*cfg.federated.eta_s) : json(nullptr)},
        {"beta", cfg.federated.beta},
        {"beta1", cfg.federated.beta1},
        {"beta2", cfg.federated.beta2},
        {"tau", cfg.federated.tau},
        {"rounds", cfg.federated.rounds},
        {"sample_fraction", cfg.federated.sample_fraction},
        {"transport_loss_prob", cfg.federated.transport_loss_prob}};
    j["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}};
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(config_to_json(cfg));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::pair<std::string, std::vector<core::TimeSeries>>>
materialize_synthetic(const DataConfig& data, std::uint64_t master_seed) {
    if (!data.synthetic) {
        throw ConfigError("data.synthetic: required for synthetic generation");
    }
    auto spec = *data.synthetic;
    const std::uint64_t base =
        derive_stream(master_seed, fnv1a64("data")) ^ spec.seed;
    std::vector<std::pair<std::string, std::vector<core::TimeSeries>>> out;
    out.reserve(static_cast<std::size_t>(data.synthetic_clients));
    for (int c = 0; c < data.synthetic_clients; ++c) {
        spec.seed = derive_stream(base, fnv1a64("client/" + std::to_string(c)));
        out.emplace_back("client" + std::to_string(c), ingest::synthesize(spec));
    }
    return out;
}

namespace {

struct ClientParts {
    std::string id;
    core::SplitResult split;
};

ingest::ChannelKind kind_for_channel(const ExperimentConfig& cfg,
                                     const std::string& id) {
    if (auto it = cfg.data.channel_kinds.find(id);
        it != cfg.data.channel_kinds.end()) {
        return ingest::channel_kind_from_name(it->second);
    }
    if (cfg.data.synthetic) {
        for (const auto& c : cfg.data.synthetic->channels) {
            if (c.id == id) return c.kind;
        }
    }
    throw ConfigError("data.channel_kinds." + id +
                      ": required to clean this channel");
}

std::vector<ClientParts> assemble_clients(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::vector<core::TimeSeries>>> raw;
    if (!cfg.data.csv_paths.empty()) {
        std::set<std::string> seen;
        for (const auto& p : cfg.data.csv_paths) {
            auto id = std::filesystem::path(p).stem().string();
            if (!seen.insert(id).second) {
                throw ConfigError("data.csv_paths: two files share the client "
                                  "name '" + id + "'");
            }
            raw.emplace_back(std::move(id), ingest::read_long_csv(p));
        }
    } else {
        raw = materialize_synthetic(cfg.data, cfg.seed);
    }

    std::vector<ClientParts> out;
    out.reserve(raw.size());
    for (auto& [id, channels] : raw) {
        if (cfg.data.apply_cleaning) {
            for (auto& ch : channels) {
                const auto policy =
                    ingest::default_cleaning_policy(kind_for_channel(cfg, ch.channelId()));
                ch = ingest::clean(ch, policy).series;
            }
        }
        const auto aligned = core::align(channels, cfg.data.step_seconds);
        const auto windows = core::make_windows(aligned, cfg.window);
        out.push_back({id, core::chronological_split(windows, cfg.split.train,
                                                     cfg.split.val)});
    }
    return out;
}

void write_eval_json(const ExperimentConfig& cfg, const std::string& tag,
                     const std::string& client,
                     const metrics::EvalReport& report,
                     const std::string& hash) {
    json j = json::parse(report.toJson());
    j["mode"] = tag;
    j["client"] = client;
    j["target"] = cfg.window.target_id;
    j["config_hash"] = hash;
    const auto path = std::filesystem::path(cfg.out_dir) /
                      ("eval_" + tag + "_" + sanitize_name(client) + ".json");
    write_text_file(path.string(), j.dump(2) + "\n");
}

/// Seed schedule shared by every mode: one base for model init, one for
/// training.  Local and centralized training use the round-0 seed of the
/// federated schedule, so a one-round, one-client federated run matches
/// local training bit for bit.
struct SeedPlan {
    std::uint64_t init;
    std::uint64_t train_base;
    std::uint64_t fed_infra;

    explicit SeedPlan(std::uint64_t master)
        : init(derive_stream(master, fnv1a64("init"))),
          train_base(derive_stream(master, fnv1a64("train"))),
          fed_infra(derive_stream(master, fnv1a64("fed-infra"))) {}
};

models::Scaler scaler_for(const ExperimentConfig& cfg,
                          const core::SupervisedWindowSet& train) {
    if (cfg.model.kind == models::ModelSpec::Kind::SeasonalNaive) {
        return models::Scaler::identity(train.featureDim());
    }
    return models::Scaler::fit(train);
}

std::pair<double, double> pooled_point_metrics(
    const std::vector<std::pair<const models::ForecastModel*,
                                const core::SupervisedWindowSet*>>& parts,
    const models::ParamVector& params) {
    std::vector<double> point, truth;
    for (const auto& [model, data] : parts) {
        const auto& levels = model->quantileLevels();
        std::size_t median_idx = levels.size();
        for (std::size_t q = 0; q < levels.size(); ++q) {
            if (levels[q] == 0.5) median_idx = q;
        }
        if (!levels.empty() && median_idx == levels.size()) {
            return {std::nan(""), std::nan("")};
        }
        for (const auto& s : data->samples()) {
            const auto pred = model->predict(params, s);
            truth.insert(truth.end(), s.y_future.begin(), s.y_future.end());
            if (levels.empty()) {
                point.insert(point.end(), pred.begin(), pred.end());
            } else {
                for (std::size_t t = 0; t < s.y_future.size(); ++t) {
                    point.push_back(pred[t * levels.size() + median_idx]);
                }
            }
        }
    }
    if (point.empty()) return {std::nan(""), std::nan("")};
    try {
        return {metrics::cv_rmse(point, truth), metrics::nmbe(point, truth)};
    } catch (const Error&) {
        return {std::nan(""), std::nan("")};
    }
}

fed::ServerStrategy strategy_from_config(const FederatedConfig& f) {
    auto s = fed::ServerStrategy::make(f.strategy);
    if (f.eta_s) s.eta_s = *f.eta_s;
    s.beta = f.beta;
    s.beta1 = f.beta1;
    s.beta2 = f.beta2;
    s.tau = f.tau;
    return s;
}

ExperimentReport run_local_mode(const ExperimentConfig& cfg,
                                std::vector<ClientParts>& clients,
                                const SeedPlan& seeds,
                                const std::string& hash) {
    ExperimentReport report{cfg.mode, hash, {}};
    for (auto& client : clients) {
        const auto model = models::make_model(
            cfg.model, client.split.train, scaler_for(cfg, client.split.train));
        models::ParamVector params = model->initParams(seeds.init);
        if (model->trainable()) {
            auto train_cfg = cfg.train;
            train_cfg.seed = fed::round_seed(seeds.train_base, 0);
            params = models::train_local(*model, params, client.split.train,
                                         train_cfg)
                         .params;
        }
        params.save((std::filesystem::path(cfg.out_dir) /
                     ("params_local_" + sanitize_name(client.id) + ".bin"))
                        .string());
        auto eval = metrics::evaluate(*model, params, client.split.test);
        write_eval_json(cfg, "local", client.id, eval, hash);
        report.clients.push_back({client.id, std::move(eval)});
    }
    return report;
}

ExperimentReport run_centralized_mode(const ExperimentConfig& cfg,
                                      std::vector<ClientParts>& clients,
                                      const SeedPlan& seeds,
                                      const std::string& hash) {
    core::SupervisedWindowSet pooled = clients.front().split.train;
    for (std::size_t c = 1; c < clients.size(); ++c) {
        pooled = pooled.concat(clients[c].split.train);
    }

    const auto model =
        models::make_model(cfg.model, pooled, scaler_for(cfg, pooled));
    models::ParamVector params = model->initParams(seeds.init);
    if (model->trainable()) {
        auto train_cfg = cfg.train;
        train_cfg.seed = fed::round_seed(seeds.train_base, 0);
        params = models::train_local(*model, params, pooled, train_cfg).params;
    }
    params.save(
        (std::filesystem::path(cfg.out_dir) / "params_centralized.bin").string());

    ExperimentReport report{cfg.mode, hash, {}};
    for (auto& client : clients) {
        auto eval = metrics::evaluate(*model, params, client.split.test);
        write_eval_json(cfg, "centralized", client.id, eval, hash);
        report.clients.push_back({client.id, std::move(eval)});
    }
    return report;
}

ExperimentReport run_federated_mode(const ExperimentConfig& cfg,
                                    std::vector<ClientParts>& clients,
                                    const SeedPlan& seeds,
                                    const std::string& hash) {
    std::vector<std::shared_ptr<const models::ForecastModel>> client_models;
    std::vector<fed::ClientHandle> handles;
    client_models.reserve(clients.size());
    handles.reserve(clients.size());
    for (auto& client : clients) {
        client_models.push_back(models::make_model(
            cfg.model, client.split.train, scaler_for(cfg, client.split.train)));
        handles.emplace_back(client.id, client_models.back(),
                             client.split.train);
    }

    fed::FedRoundState state;
    state.global_params = handles.front().model().initParams(seeds.init);
    state.strategy = strategy_from_config(cfg.federated);
    state.sample_fraction = cfg.federated.sample_fraction;
    state.transport_loss_prob = cfg.federated.transport_loss_prob;
    state.seed = seeds.fed_infra;

    fed::EvalHook hook;
    bool have_val = true;
    for (const auto& client : clients) {
        have_val = have_val && !client.split.val.empty();
    }
    if (have_val) {
        std::vector<std::pair<const models::ForecastModel*,
                              const core::SupervisedWindowSet*>> parts;
        for (std::size_t c = 0; c < clients.size(); ++c) {
            parts.emplace_back(client_models[c].get(), &clients[c].split.val);
        }
        hook = [parts](const models::ParamVector& params) {
            return pooled_point_metrics(parts, params);
        };
    }

    auto train_cfg = cfg.train;
    train_cfg.seed = seeds.train_base;
    fed::RoundLog log;
    const auto final_params = fed::run_rounds(
        state, handles, cfg.federated.rounds, train_cfg, &log, hook, true);

    log.writeCsv(
        (std::filesystem::path(cfg.out_dir) / "rounds_federated.csv").string());
    final_params.save(
        (std::filesystem::path(cfg.out_dir) / "params_federated.bin").string());

    ExperimentReport report{cfg.mode, hash, {}};
    for (std::size_t c = 0; c < clients.size(); ++c) {
        auto eval = metrics::evaluate(*client_models[c], final_params,
                                      clients[c].split.test);
        write_eval_json(cfg, "federated", clients[c].id, eval, hash);
        report.clients.push_back({clients[c].id, std::move(eval)});
    }
    return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const auto hash = config_hash(cfg);
    write_text_file(
        (std::filesystem::path(cfg.out_dir) / "config.json").string(),
        config_to_json(cfg) + "\n");

    auto clients = assemble_clients(cfg);
    const SeedPlan seeds(cfg.seed);
    switch (cfg.mode) {
        case RunMode::Local:
            return run_local_mode(cfg, clients, seeds, hash);
        case RunMode::Centralized:
            return run_centralized_mode(cfg, clients, seeds, hash);
        case RunMode::Federated:
            return run_federated_mode(cfg, clients, seeds, hash);
    }
    throw ConfigError("mode: unhandled value");
}

ExperimentReport evaluate_checkpoint(const ExperimentConfig& cfg,
                                     const std::string& checkpoint_path) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const auto hash = config_hash(cfg);
    const auto params = models::ParamVector::load(checkpoint_path);

    auto clients = assemble_clients(cfg);

    // Centralized checkpoints were produced with the pooled scaler;
    // everything else uses per-client scalers, matching how the
    // checkpoint's mode standardized its inputs.
    std::optional<models::Scaler> pooled_scaler;
    if (cfg.mode == RunMode::Centralized) {
        core::SupervisedWindowSet pooled = clients.front().split.train;
        for (std::size_t c = 1; c < clients.size(); ++c) {
            pooled = pooled.concat(clients[c].split.train);
        }
        pooled_scaler = scaler_for(cfg, pooled);
    }

    ExperimentReport report{cfg.mode, hash, {}};
    for (auto& client : clients) {
        const auto model = models::make_model(
            cfg.model, client.split.train,
            pooled_scaler ? *pooled_scaler
                          : scaler_for(cfg, client.split.train));
        auto eval = metrics::evaluate(*model, params, client.split.test);
        write_eval_json(cfg, "checkpoint", client.id, eval, hash);
        report.clients.push_back({client.id, std::move(eval)});
    }
    return report;
}

std::vector<ExperimentReport> run_compare(const ExperimentConfig& cfg) {
    std::vector<ExperimentReport> reports;
    for (auto mode :
         {RunMode::Local, RunMode::Centralized, RunMode::Federated}) {
        auto sub = cfg;
        sub.mode = mode;
        reports.push_back(run_experiment(sub));
    }

    std::string csv =
        "mode,client,target,model,cv_rmse_pct,nmbe_pct,"
        "compliant_whole_building,compliant_indoor_t_rh,compliant_co2,"
        "config_hash\n";
    for (const auto& report : reports) {
        for (const auto& client : report.clients) {
            const auto& ev = client.report;
            csv += run_mode_name(report.mode);
            csv += ',' + client.client_id;
            csv += ',' + cfg.window.target_id;
            csv += ',' + ev.model_name;
            csv += ',';
            if (std::isfinite(ev.cv_rmse_pct)) {
                csv += ingest::format_double(ev.cv_rmse_pct);
            }
            csv += ',';
            if (std::isfinite(ev.nmbe_pct)) {
                csv += ingest::format_double(ev.nmbe_pct);
            }
            for (const char* task : {"whole_building", "indoor_t_rh", "co2"}) {
                csv += ',';
                if (auto it = ev.compliance.find(task); it != ev.compliance.end()) {
                    csv += it->second ? '1' : '0';
                }
            }
            csv += ',' + report.config_hash + '\n';
        }
    }
    write_text_file(
        (std::filesystem::path(cfg.out_dir) / "compare.csv").string(), csv);
    return reports;
}

void ClimateReportConfig::validate() const {
    if (csv_paths.empty()) config_fail("csv_paths", "at least one file required");
    if (indoor_t.empty()) config_fail("indoor_t", "required");
    if (indoor_rh.empty()) config_fail("indoor_rh", "required");
    if (outdoor_t.empty() != outdoor_rh.empty()) {
        config_fail("outdoor_t/outdoor_rh", "configure both or neither");
    }
    if (!(pressure_hpa > 0.0)) config_fail("pressure_hpa", "must be positive");
    if (ma_days < 1) config_fail("ma_days", "must be >= 1");
    if (!(moisture_flag_fraction >= 0.0 && moisture_flag_fraction <= 1.0)) {
        config_fail("moisture_flag_fraction", "must lie in [0, 1]");
    }
    if (step_seconds <= 0 || 86400 % step_seconds != 0) {
        config_fail("step_seconds", "must be positive and divide one day");
    }
    if (en15757.window_days < 1) config_fail("en15757.window_days", "must be >= 1");
    if (out_dir.empty()) config_fail("out_dir", "must not be empty");
}

ClimateReportConfig climate_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "",
               {"csv_paths", "indoor_t", "indoor_rh", "outdoor_t", "outdoor_rh",
                "pressure_hpa", "ma_days", "moisture_flag_fraction", "en15757",
                "step_seconds", "out_dir"});
    ClimateReportConfig cfg;
    cfg.csv_paths = get_field(j, "", "csv_paths", cfg.csv_paths);
    cfg.indoor_t = get_field(j, "", "indoor_t", cfg.indoor_t);
    cfg.indoor_rh = get_field(j, "", "indoor_rh", cfg.indoor_rh);
    cfg.outdoor_t = get_field(j, "", "outdoor_t", cfg.outdoor_t);
    cfg.outdoor_rh = get_field(j, "", "outdoor_rh", cfg.outdoor_rh);
    cfg.pressure_hpa = get_field(j, "", "pressure_hpa", cfg.pressure_hpa);
    cfg.ma_days = get_field(j, "", "ma_days", cfg.ma_days);
    cfg.moisture_flag_fraction =
        get_field(j, "", "moisture_flag_fraction", cfg.moisture_flag_fraction);
    if (j.contains("en15757")) {
        const auto& e = j.at("en15757");
        check_keys(e, "en15757",
                   {"window_days", "band_low_pct", "band_high_pct",
                    "max_missing_frac"});
        cfg.en15757.window_days =
            get_field(e, "en15757", "window_days", cfg.en15757.window_days);
        cfg.en15757.band_low_pct =
            get_field(e, "en15757", "band_low_pct", cfg.en15757.band_low_pct);
        cfg.en15757.band_high_pct =
            get_field(e, "en15757", "band_high_pct", cfg.en15757.band_high_pct);
        cfg.en15757.max_missing_frac = get_field(e, "en15757", "max_missing_frac",
                                                 cfg.en15757.max_missing_frac);
    }
    cfg.step_seconds = get_field(j, "", "step_seconds", cfg.step_seconds);
    cfg.out_dir = get_field(j, "", "out_dir", cfg.out_dir);
    cfg.validate();
    return cfg;
}

namespace {

std::string climate_config_hash(const ClimateReportConfig& cfg) {
    json j{{"csv_paths", cfg.csv_paths},
           {"indoor_t", cfg.indoor_t},
           {"indoor_rh", cfg.indoor_rh},
           {"outdoor_t", cfg.outdoor_t},
           {"outdoor_rh", cfg.outdoor_rh},
           {"pressure_hpa", cfg.pressure_hpa},
           {"ma_days", cfg.ma_days},
           {"moisture_flag_fraction", cfg.moisture_flag_fraction},
           {"en15757",
            {{"window_days", cfg.en15757.window_days},
             {"band_low_pct", cfg.en15757.band_low_pct},
             {"band_high_pct", cfg.en15757.band_high_pct},
             {"max_missing_frac", cfg.en15757.max_missing_frac}}},
           {"step_seconds", cfg.step_seconds},
           {"out_dir", cfg.out_dir}};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

const core::TimeSeries& channel_by_id(const std::vector<core::TimeSeries>& all,
                                      const std::string& id) {
    for (const auto& s : all) {
        if (s.channelId() == id) return s;
    }
    throw UnknownChannel("climate_report: no channel named '" + id + "'");
}

void write_decomposition_csv(const std::string& out_dir,
                             const core::TimeSeries& rh,
                             const climate::SeasonalDecomposition& d) {
    std::string csv = "timestamp,rh,cma,deviation\n";
    for (std::size_t i = 0; i < rh.size(); ++i) {
        csv += ingest::format_iso8601_utc(rh.timeAt(i));
        csv += ',';
        if (rh.present(i)) csv += ingest::format_double(*rh.at(i));
        csv += ',';
        if (d.seasonal.present(i)) csv += ingest::format_double(*d.seasonal.at(i));
        csv += ',';
        if (d.deviations.present(i)) {
            csv += ingest::format_double(*d.deviations.at(i));
        }
        csv += '\n';
    }
    const auto path =
        std::filesystem::path(out_dir) /
        ("decomposition_" + sanitize_name(rh.channelId()) + ".csv");
    write_text_file(path.string(), csv);
}

}  // namespace

void climate_report(const ClimateReportConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const auto hash = climate_config_hash(cfg);

    std::vector<core::TimeSeries> channels;
    std::set<std::string> seen;
    for (const auto& path : cfg.csv_paths) {
        for (auto& s : ingest::read_long_csv(path)) {
            if (!seen.insert(s.channelId()).second) {
                throw DuplicateKey("climate_report: channel '" + s.channelId() +
                                   "' appears in more than one input file");
            }
            channels.push_back(std::move(s));
        }
    }
    channels = core::align(channels, cfg.step_seconds);

    const auto& indoor_t = channel_by_id(channels, cfg.indoor_t);
    const auto& indoor_rh = channel_by_id(channels, cfg.indoor_rh);

    json summary;
    summary["config_hash"] = hash;

    const auto indoor_decomp = climate::en15757_decompose(indoor_rh, cfg.en15757);
    write_decomposition_csv(cfg.out_dir, indoor_rh, indoor_decomp);
    summary["en15757"][indoor_rh.channelId()] = {
        {"annual_mean_rh", indoor_decomp.annual_mean_rh},
        {"band_low", indoor_decomp.band_low},
        {"band_high", indoor_decomp.band_high}};

    const auto lim = climate::lim_exceedance(indoor_t, indoor_rh);
    summary["lim_exceedance"] = {{"evaluated", lim.evaluated},
                                 {"exceeding", lim.exceeding},
                                 {"fraction", lim.fraction}};

    if (!cfg.outdoor_t.empty()) {
        const auto& outdoor_t = channel_by_id(channels, cfg.outdoor_t);
        const auto& outdoor_rh = channel_by_id(channels, cfg.outdoor_rh);

        const auto outdoor_decomp =
            climate::en15757_decompose(outdoor_rh, cfg.en15757);
        write_decomposition_csv(cfg.out_dir, outdoor_rh, outdoor_decomp);
        summary["en15757"][outdoor_rh.channelId()] = {
            {"annual_mean_rh", outdoor_decomp.annual_mean_rh},
            {"band_low", outdoor_decomp.band_low},
            {"band_high", outdoor_decomp.band_high}};

        const auto mr_in =
            climate::mixing_ratio_series(indoor_t, indoor_rh, cfg.pressure_hpa);
        const auto mr_out = climate::mixing_ratio_series(outdoor_t, outdoor_rh,
                                                         cfg.pressure_hpa);
        const auto ma_in = climate::centered_moving_average(
            mr_in, cfg.ma_days, cfg.en15757.max_missing_frac);
        const auto ma_out = climate::centered_moving_average(
            mr_out, cfg.ma_days, cfg.en15757.max_missing_frac);

        std::string csv =
            "timestamp,mr_indoor,mr_outdoor,mr_indoor_ma,mr_outdoor_ma\n";
        for (std::size_t i = 0; i < mr_in.size(); ++i) {
            csv += ingest::format_iso8601_utc(mr_in.timeAt(i));
            csv += ',';
            if (mr_in.present(i)) csv += ingest::format_double(*mr_in.at(i));
            csv += ',';
            if (mr_out.present(i)) csv += ingest::format_double(*mr_out.at(i));
            csv += ',';
            if (ma_in.present(i)) csv += ingest::format_double(*ma_in.at(i));
            csv += ',';
            if (ma_out.present(i)) csv += ingest::format_double(*ma_out.at(i));
            csv += '\n';
        }
        write_text_file(
            (std::filesystem::path(cfg.out_dir) / "mr_comparison.csv").string(),
            csv);

        const auto mr_exceed = climate::series_exceedance(ma_in, ma_out);
        summary["mr"] = {
            {"evaluated", mr_exceed.evaluated},
            {"exceeding", mr_exceed.exceeding},
            {"fraction", mr_exceed.fraction},
            {"internal_moisture_source",
             mr_exceed.evaluated > 0 &&
                 mr_exceed.fraction >= cfg.moisture_flag_fraction}};
    }

    write_text_file(
        (std::filesystem::path(cfg.out_dir) / "climate_summary.json").string(),
        summary.dump(2) + "\n");
}

}  // namespace fedcast
