#include "fits_cli/commands.hpp"

#include "fits/anomaly.hpp"
#include "fits/checkpoint.hpp"
#include "fits/data.hpp"
#include "fits/model.hpp"
#include "fits/training.hpp"
#include "fits_cli/run_dir.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fits::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using model::FitsConfig;
using model::Supervision;

namespace {

fs::path resolve_data(const std::string& given, const fs::path& root) {
    const fs::path p(given);
    if (p.is_absolute() || fs::exists(p)) return p;
    if (!root.empty() && fs::exists(root / p)) return root / p;
    throw Error("data file not found: " + given + (root.empty() ? "" : " (data root " + root.string() + ")"));
}

Supervision supervision_of(const std::string& s) {
    return s == "forecast" ? Supervision::ForecastOnly : Supervision::BackcastAndForecast;
}

std::string supervision_text(Supervision s) {
    return s == Supervision::ForecastOnly ? "forecast" : "backcast_forecast";
}

/// Converts validation failures of core value objects into config errors.
template <class F>
auto as_config(F&& make) {
    try {
        return make();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

training::TrainSpec train_spec(const Config& cfg) {
    training::TrainSpec spec;
    spec.learning_rate = cfg.get_real("lr");
    spec.batch_size = cfg.get_count("batch_size");
    spec.max_epochs = cfg.get_count("epochs");
    spec.patience = cfg.get_count("patience");
    const auto seeds = cfg.get_counts("seeds");
    spec.seeds_for_reporting.assign(seeds.begin(), seeds.end());
    spec.seed = spec.seeds_for_reporting.empty() ? 0 : spec.seeds_for_reporting.front();
    as_config([&] {
        spec.validate();
        return 0;
    });
    return spec;
}

data::DatasetProfile profile_of(const Config& cfg) {
    data::DatasetProfile profile{"custom", 0, data::SplitRule::Ratio70_10_20};
    if (const auto& name = cfg.get_string("profile"); !name.empty()) {
        const auto found = data::find_profile(name);
        if (!found) throw ConfigError("unknown profile '" + name + "'");
        profile = *found;
    }
    if (const auto& split = cfg.get_string("split"); !split.empty()) {
        if (split == "etth") profile.split_rule = data::SplitRule::EttH;
        else if (split == "ettm") profile.split_rule = data::SplitRule::EttM;
        else if (split == "ratio") profile.split_rule = data::SplitRule::Ratio70_10_20;
        else throw ConfigError("key 'split': expected etth | ettm | ratio, got '" + split + "'");
    }
    if (cfg.has("period") && cfg.get_count("period") > 0) profile.period = cfg.get_count("period");
    return profile;
}

training::ForecastDataset load_forecast(const Config& cfg, const fs::path& data_root, const data::DatasetProfile& profile) {
    const auto frame = data::load_csv(resolve_data(cfg.get_string("data"), data_root), cfg.get_bool("timestamp"));
    const auto splits = data::chrono_split(frame.length(), profile);
    auto [scaled, scaler] = data::standardize(frame, splits.train);
    return {std::make_shared<const RealMatrix>(std::move(scaled.values)), splits, profile.period};
}

std::string history_csv(const training::TrainResult& r) {
    std::string out = "epoch,train_mse,val_mse\n";
    for (const auto& h : r.history)
        out += std::to_string(h.epoch) + "," + format_double(h.train_mse) + "," + format_double(h.val_mse) + "\n";
    return out;
}

json config_json(const Config& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

json params_json(const FitsConfig& cfg) {
    const auto p = model::param_count(cfg);
    return {{"complex_entries", p.complex_entries}, {"real_scalars", p.real_scalars}};
}

json model_json(const FitsConfig& cfg) {
    return {{"input_len", cfg.input_len}, {"output_len", cfg.output_len}, {"period", cfg.period},
            {"harmonic", harmonic_text(cfg.harmonic)}, {"k_cut", cfg.k_cut},  {"n_in", cfg.n_in},
            {"n_out", cfg.n_out},   {"channels", cfg.channels}};
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double population_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path cmd_train(const Invocation& inv, std::ostream& log) {
    const Config& cfg = inv.config;
    const auto profile = profile_of(cfg);
    if (profile.period == 0) throw ConfigError("key 'period' is required without a profile");
    const auto spec = train_spec(cfg);
    const auto dataset = load_forecast(cfg, inv.data_root, profile);
    const auto fits_cfg = as_config([&] {
        return FitsConfig::forecasting(cfg.get_count("look_back"), cfg.get_count("horizon"), profile.period,
                                       cfg.get_harmonic("harmonic"), supervision_of(cfg.get_string("supervision")),
                                       dataset.values->cols());
    });

    RunDirectory run(inv.out_root, "train");
    write_text(run.file("config.txt"), cfg.to_text());
    log << "training " << spec.seeds_for_reporting.size() << " seed(s), " << model::param_count(fits_cfg).complex_entries
        << " complex parameters\n";
    const auto runs = training::run_forecast(dataset, fits_cfg, spec);

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].val.mse < runs[best].val.mse) best = i;
    model::save_checkpoint(run.file("model.ckpt"), fits_cfg, runs[best].result.layer);
    write_text(run.file("history.csv"), history_csv(runs[best].result));

    json seeds = json::array();
    std::vector<double> val_mse, val_mae, test_mse, test_mae;
    for (const auto& r : runs) {
        write_text(run.file("history_seed" + std::to_string(r.seed) + ".csv"), history_csv(r.result));
        seeds.push_back({{"seed", r.seed},
                         {"best_epoch", r.result.best_epoch},
                         {"epochs_ran", r.result.history.size()},
                         {"val_mse", r.val.mse},
                         {"val_mae", r.val.mae},
                         {"test_mse", r.test.mse},
                         {"test_mae", r.test.mae}});
        val_mse.push_back(r.val.mse);
        val_mae.push_back(r.val.mae);
        test_mse.push_back(r.test.mse);
        test_mae.push_back(r.test.mae);
        log << "seed " << r.seed << ": val mse " << r.val.mse << ", test mse " << r.test.mse << "\n";
    }
    const json metrics{
        {"command", "train"},
        {"config", config_json(cfg)},
        {"model", model_json(fits_cfg)},
        {"params", params_json(fits_cfg)},
        {"seeds", seeds},
        {"mean",
         {{"val_mse", mean_of(val_mse)}, {"val_mae", mean_of(val_mae)}, {"test_mse", mean_of(test_mse)}, {"test_mae", mean_of(test_mae)}}},
        {"std",
         {{"val_mse", population_std(val_mse)},
          {"val_mae", population_std(val_mae)},
          {"test_mse", population_std(test_mse)},
          {"test_mae", population_std(test_mae)}}},
        {"checkpoint_seed", runs[best].seed},
    };
    write_json(run.file("metrics.json"), metrics);
    return run.commit();
}

constexpr std::string_view kGridHeader = "look_back,harmonic,supervision,val_mse,test_mse,complex_entries,epochs_ran";

std::string grid_line(const training::GridRow& r) {
    return std::to_string(r.look_back) + "," + harmonic_text(r.harmonic) + "," + supervision_text(r.supervision) + "," +
           format_double(r.val_mse) + "," + format_double(r.test_mse) + "," + std::to_string(r.complex_entries) + "," +
           std::to_string(r.epochs_ran) + "\n";
}

std::vector<training::GridRow> read_grid_rows(const fs::path& path) {
    std::vector<training::GridRow> rows;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
        try {
            training::GridRow r;
            r.look_back = std::stoull(f[0]);
            r.harmonic = f[1] == "none" ? 0 : std::stoull(f[1]);
            r.supervision = supervision_of(f[2]);
            r.val_mse = std::stod(f[3]);
            r.test_mse = std::stod(f[4]);
            r.complex_entries = std::stoull(f[5]);
            r.epochs_ran = std::stoull(f[6]);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed grid row");
        }
    }
    return rows;
}

std::vector<training::GridRow> load_resume(const fs::path& dir, const Config& cfg) {
    if (!fs::exists(dir / "config.txt")) throw ConfigError("--resume: no config.txt in " + dir.string());
    auto previous = Config::load(dir / "config.txt");
    for (const auto& [k, v] : cfg.entries()) {
        if (k == "threads") continue;
        if (!previous.has(k) || previous.raw(k) != v)
            throw ConfigError("--resume: key '" + k + "' differs from the earlier run");
    }
    std::vector<training::GridRow> rows;
    for (const auto* name : {"grid.csv", "grid.partial.csv"}) {
        if (fs::exists(dir / name)) {
            rows = read_grid_rows(dir / name);
            break;
        }
    }
    return rows;
}

fs::path cmd_grid(const Invocation& inv, std::ostream& log) {
    const Config& cfg = inv.config;
    const auto profile = profile_of(cfg);
    if (profile.period == 0) throw ConfigError("key 'period' is required without a profile");
    const auto spec = train_spec(cfg);
    training::GridSpec grid;
    grid.look_backs = cfg.get_counts("look_backs");
    grid.harmonics = cfg.get_harmonics("harmonics");
    grid.supervisions.clear();
    for (const auto& s : cfg.get_strings("supervisions")) grid.supervisions.push_back(supervision_of(s));
    grid.horizon = cfg.get_count("horizon");
    grid.threads = std::max<std::size_t>(1, cfg.get_count("threads"));
    for (auto lb : grid.look_backs)
        for (auto n : grid.harmonics)
            as_config([&] { return FitsConfig::forecasting(lb, grid.horizon, profile.period, n, Supervision::BackcastAndForecast, 1); });

    std::vector<training::GridRow> cached;
    if (inv.resume) cached = load_resume(*inv.resume, cfg);
    const auto dataset = load_forecast(cfg, inv.data_root, profile);

    RunDirectory run(inv.out_root, "grid");
    write_text(run.file("config.txt"), cfg.to_text());
    std::ofstream partial(run.file("grid.partial.csv"));
    partial << kGridHeader << "\n";
    for (const auto& r : cached) partial << grid_line(r);
    partial.flush();
    log << "grid: " << grid.look_backs.size() * grid.harmonics.size() * grid.supervisions.size() << " combinations, "
        << cached.size() << " cached\n";
    const auto result = training::grid_search(dataset, grid, spec, cached, [&](const training::GridRow& r) {
        partial << grid_line(r);
        partial.flush();
        log << "L=" << r.look_back << " n=" << harmonic_text(r.harmonic) << " " << supervision_text(r.supervision)
            << ": val mse " << r.val_mse << "\n";
    });
    partial.close();
    fs::remove(run.file("grid.partial.csv"));

    std::string csv(kGridHeader);
    csv += "\n";
    for (const auto& r : result.rows) csv += grid_line(r);
    write_text(run.file("grid.csv"), csv);

    const auto& sel = result.rows[result.selected];
    const json selected{
        {"look_back", sel.look_back},
        {"harmonic", harmonic_text(sel.harmonic)},
        {"supervision", supervision_text(sel.supervision)},
        {"horizon", grid.horizon},
        {"period", profile.period},
        {"val_mse", sel.val_mse},
        {"test_mse", sel.test_mse},
        {"complex_entries", sel.complex_entries},
        {"epochs_ran", sel.epochs_ran},
    };
    write_json(run.file("selected.json"), selected);
    return run.commit();
}

fs::path cmd_eval(const Invocation& inv, std::ostream& log) {
    const Config& cfg = inv.config;
    const auto ckpt = model::load_checkpoint(cfg.get_string("checkpoint"));
    if (ckpt.config.task != model::Task::Forecast) throw ConfigError("eval: checkpoint is not a forecasting model");
    const auto& part = cfg.get_string("part");
    if (part != "val" && part != "test") throw ConfigError("key 'part': expected val | test");
    auto profile = profile_of(cfg);
    profile.period = ckpt.config.period;
    const auto dataset = load_forecast(cfg, inv.data_root, profile);
    if (dataset.values->cols() != ckpt.config.channels)
        throw ConfigError("eval: checkpoint has " + std::to_string(ckpt.config.channels) + " channels, data has " +
                          std::to_string(dataset.values->cols()));
    const auto& fc = ckpt.config;
    const auto range = part == "val" ? dataset.splits.val : dataset.splits.test;
    const data::SlidingWindows windows(dataset.values, data::window_range(range, fc.input_len), fc.input_len, fc.horizon(),
                                       fc.supervision);
    const auto m = training::evaluate(ckpt.layer, windows, fc);
    log << part << " mse " << m.mse << ", mae " << m.mae << "\n";

    RunDirectory run(inv.out_root, "eval");
    write_text(run.file("config.txt"), cfg.to_text());
    write_json(run.file("metrics.json"), json{{"command", "eval"},
                                              {"config", config_json(cfg)},
                                              {"model", model_json(fc)},
                                              {"params", params_json(fc)},
                                              {"part", part},
                                              {"mse", m.mse},
                                              {"mae", m.mae},
                                              {"count", m.count}});
    return run.commit();
}

struct DetectInput {
    RealMatrix train;
    RealMatrix eval;
    std::vector<bool> labels;
    std::size_t row_offset = 0; ///< row of eval[0] in the source file
};

DetectInput detect_input(const Config& cfg, const fs::path& data_root) {
    DetectInput in;
    const auto& source = cfg.get_string("source");
    if (source == "synth") {
        data::SynthSpec s;
        s.length = cfg.get_count("length");
        s.channels = cfg.get_count("channels");
        s.rate = cfg.get_real("rate");
        s.train_len = cfg.get_count("train_len");
        s.seed = cfg.get_counts("seeds").front();
        const auto ds = as_config([&] { return data::synth_anomaly(s); });
        in.train = data::slice_rows(ds.series.values, {0, ds.train_len});
        in.eval = data::slice_rows(ds.series.values, {ds.train_len, s.length});
        in.labels.assign(ds.series.labels.begin() + static_cast<std::ptrdiff_t>(ds.train_len), ds.series.labels.end());
        in.row_offset = ds.train_len;
        return in;
    }
    if (source != "csv") throw ConfigError("key 'source': expected synth | csv, got '" + source + "'");
    if (cfg.get_string("values").empty()) throw ConfigError("key 'values' is required when source = csv");
    const bool ts = cfg.get_bool("timestamp");
    auto frame = data::load_csv(resolve_data(cfg.get_string("values"), data_root), ts);
    std::vector<bool> labels = cfg.get_string("labels").empty()
                                   ? data::take_label_column(frame, cfg.get_string("label_column"))
                                   : data::load_labels(resolve_data(cfg.get_string("labels"), data_root));
    if (labels.size() != frame.length())
        throw Error("labels have " + std::to_string(labels.size()) + " rows, values have " + std::to_string(frame.length()));
    if (!cfg.get_string("train_values").empty()) {
        auto train_frame = data::load_csv(resolve_data(cfg.get_string("train_values"), data_root), ts);
        if (train_frame.channels() != frame.channels()) throw Error("train_values and values differ in channel count");
        in.train = std::move(train_frame.values);
        in.eval = std::move(frame.values);
        in.labels = std::move(labels);
        return in;
    }
    const std::size_t train_len = cfg.get_count("train_len");
    if (train_len >= frame.length())
        throw ConfigError("key 'train_len' (" + std::to_string(train_len) + ") must be below the series length " +
                          std::to_string(frame.length()));
    in.train = data::slice_rows(frame.values, {0, train_len});
    in.eval = data::slice_rows(frame.values, {train_len, frame.length()});
    in.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(train_len), labels.end());
    in.row_offset = train_len;
    return in;
}

fs::path cmd_detect(const Invocation& inv, std::ostream& log) {
    const Config& cfg = inv.config;
    const std::size_t window = cfg.get_count("window");
    const std::size_t factor = cfg.get_count("factor");
    if (factor == 0 || window == 0 || window % factor != 0)
        throw ConfigError("window (" + std::to_string(window) + ") must be a positive multiple of factor (" +
                          std::to_string(factor) + ")");
    const bool have_ckpt = !cfg.get_string("checkpoint").empty();
    const bool train_first = cfg.get_bool("train_first");
    if (have_ckpt == train_first) throw ConfigError("detect needs exactly one of 'checkpoint' or 'train_first = true'");
    const auto spec = train_spec(cfg);

    auto in = detect_input(cfg, inv.data_root);
    const std::size_t channels = in.eval.cols();
    const auto shape = as_config([&] { return FitsConfig::reconstruction(window, factor, channels); });
    if (!std::any_of(in.labels.begin(), in.labels.end(), [](bool b) { return b; }))
        throw Error("no anomalous rows in the evaluated range; F1 is undefined");

    // Scale with statistics of the training rows only.
    data::SeriesFrame train_frame;
    train_frame.values = in.train;
    const auto scaler = data::standardize(train_frame, {0, in.train.rows()}).second;
    const auto train_scaled = std::make_shared<const RealMatrix>(scaler.apply(in.train));
    const RealMatrix eval_scaled = scaler.apply(in.eval);

    FitsConfig model_cfg = shape;
    model::ComplexLinear layer;
    if (have_ckpt) {
        auto ckpt = model::load_checkpoint(cfg.get_string("checkpoint"));
        if (!(ckpt.config == shape))
            throw ConfigError("checkpoint does not match a window " + std::to_string(window) + " / factor " +
                              std::to_string(factor) + " reconstruction model over " + std::to_string(channels) +
                              " channel(s)");
        layer = std::move(ckpt.layer);
    }

    RunDirectory run(inv.out_root, "detect");
    write_text(run.file("config.txt"), cfg.to_text());
    if (!have_ckpt) {
        log << "training reconstruction model on " << in.train.rows() << " rows\n";
        auto fit = anomaly::fit_detector(train_scaled, in.train.rows(), window, factor, spec);
        model_cfg = fit.config;
        layer = std::move(fit.result.layer);
        model::save_checkpoint(run.file("model.ckpt"), model_cfg, layer);
        write_text(run.file("history.csv"), history_csv(fit.result));
    }

    const auto d = anomaly::detect(model_cfg, layer, eval_scaled, in.labels, window, factor);
    log << "threshold " << d.report.threshold << ": precision " << d.report.precision << ", recall " << d.report.recall
        << ", F1 " << d.report.f1 << "\n";
    const json report{
        {"threshold", d.report.threshold},
        {"precision", d.report.precision},
        {"recall", d.report.recall},
        {"f1", d.report.f1},
        {"accuracy", d.report.accuracy},
        {"window", window},
        {"factor", factor},
        {"params", params_json(model_cfg)},
        {"adjusted", d.report.adjusted},
        {"protocol", "threshold selected by point-adjusted F1 on the labeled evaluation rows"},
        {"evaluated_rows", in.eval.rows()},
        {"config", config_json(cfg)},
    };
    write_json(run.file("report.json"), report);
    if (cfg.get_bool("scores")) {
        std::string csv = "row,score,label\n";
        for (std::size_t t = 0; t < d.scores.scores.size(); ++t)
            csv += std::to_string(in.row_offset + t) + "," + format_double(d.scores.scores[t]) + "," +
                   (in.labels[t] ? "1" : "0") + "\n";
        write_text(run.file("scores.csv"), csv);
    }
    return run.commit();
}

fs::path cmd_synth(const Invocation& inv, std::ostream& log) {
    const Config& cfg = inv.config;
    data::SynthSpec s;
    s.length = cfg.get_count("length");
    s.channels = cfg.get_count("channels");
    s.rate = cfg.get_real("rate");
    s.train_len = cfg.get_count("train_len");
    s.period = cfg.get_count("period");
    s.noise_std = cfg.get_real("noise_std");
    s.segment_len = cfg.get_count("segment_len");
    s.seed = cfg.get_counts("seeds").front();
    const auto ds = as_config([&] { return data::synth_anomaly(s); });

    RunDirectory run(inv.out_root, "synth");
    write_text(run.file("config.txt"), cfg.to_text());
    const auto& v = ds.series.values;
    std::string values;
    for (std::size_t c = 0; c < v.cols(); ++c) values += (c ? ",ch" : "ch") + std::to_string(c);
    values += "\n";
    for (std::size_t t = 0; t < v.rows(); ++t) {
        for (std::size_t c = 0; c < v.cols(); ++c) values += (c ? "," : "") + format_double(v(t, c));
        values += "\n";
    }
    write_text(run.file("synth_values.csv"), values);
    std::string labels;
    for (bool b : ds.series.labels) labels += b ? "1\n" : "0\n";
    write_text(run.file("synth_labels.csv"), labels);
    std::string outliers = "kind,channel,begin,end\n";
    for (const auto& o : ds.outliers)
        outliers += std::string(data::to_string(o.kind)) + "," + std::to_string(o.channel) + "," +
                    std::to_string(o.rows.begin) + "," + std::to_string(o.rows.end) + "\n";
    write_text(run.file("outliers.csv"), outliers);
    log << "synth: " << v.rows() << " rows, " << ds.outliers.size() << " outliers\n";
    return run.commit();
}

} // namespace

fs::path run_command(const Invocation& inv, std::ostream& log) {
    if (inv.command == "train") return cmd_train(inv, log);
    if (inv.command == "grid") return cmd_grid(inv, log);
    if (inv.command == "eval") return cmd_eval(inv, log);
    if (inv.command == "detect") return cmd_detect(inv, log);
    if (inv.command == "synth") return cmd_synth(inv, log);
    throw ConfigError("unknown command '" + inv.command + "'");
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frequency-interpolation forecasting and anomaly detection"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::string out_dir = "runs";
        std::string seeds;
        std::vector<std::string> sets;
        std::string data_root;
        std::string resume;
        bool train_first = false;
    } flags;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"train", "train a forecasting model over one or more seeds"},
        {"grid", "grid search over look-back, cutoff harmonic and supervision"},
        {"eval", "score a forecasting checkpoint on the val or test split"},
        {"detect", "reconstruction-based anomaly detection"},
        {"synth", "write a synthetic labeled anomaly dataset"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "key = value config file");
        sub->add_option("--out", flags.out_dir, "directory receiving run directories")->capture_default_str();
        sub->add_option("--seed", flags.seeds, "seed or comma-separated seeds (overrides 'seeds')");
        sub->add_option("--set", flags.sets, "override a config key (key=value); repeatable");
        sub->add_option("--data-root", flags.data_root, "data root (default: $FITS_DATA_ROOT)");
        if (name == "grid") sub->add_option("--resume", flags.resume, "earlier grid run directory to reuse rows from");
        if (name == "detect") sub->add_flag("--train-first", flags.train_first, "train a reconstruction model first");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Invocation inv;
        inv.command = app.get_subcommands().front()->get_name();
        if (!flags.config.empty()) inv.config = Config::load(flags.config);
        for (const auto& s : flags.sets) inv.config.set_assignment(s);
        if (!flags.seeds.empty()) inv.config.set("seeds", flags.seeds);
        if (flags.train_first) inv.config.set("train_first", "true");
        inv.config.resolve(schema_for(inv.command));
        inv.out_root = flags.out_dir;
        if (!flags.data_root.empty()) inv.data_root = flags.data_root;
        else if (const char* env = std::getenv("FITS_DATA_ROOT")) inv.data_root = env;
        if (!flags.resume.empty()) inv.resume = fs::path(flags.resume);
        const auto dir = run_command(inv, err);
        out << dir.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace fits::cli
