// sphecox: batch front-end for the simulation / distance / summary pipeline.
// Every subcommand reads one JSON config (or a metadata sidecar of a previous
// run), writes CSV data files plus a JSON sidecar per file, and exits 0 on
// success, 2 on a configuration error, 3 on a runtime failure. Data files are
// deterministic for a fixed config; sidecars differ only in wall_time_s.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sphecox/field.hpp"
#include "sphecox/cox.hpp"
#include "sphecox/distances.hpp"
#include "sphecox/fit.hpp"
#include "sphecox/io.hpp"
#include "sphecox/moments.hpp"
#include "sphecox/summaries.hpp"
#include "sphecox/version.hpp"

using nlohmann::json;
using namespace sphecox;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int workers = 1;
    std::string baseline;
    std::string bq;
    // flag presence; every subcommand registers its own copy of the options,
    // so presence is recorded by the option that actually parsed
    bool seed_given = false;
    bool workers_given = false;
    bool baseline_given = false;
    bool bq_given = false;
};

void add_common(CLI::App* sc, CommonOpts& o) {
    sc->add_option("--config", o.config_path,
                   "run configuration or metadata sidecar (JSON)")
        ->required();
    sc->add_option("--out-dir", o.out_dir, "directory for output files");
    sc->add_option("--seed", o.seed, "override the config seed")
        ->each([&o](const std::string&) { o.seed_given = true; });
    sc->add_option("--workers", o.workers, "override the worker count")
        ->each([&o](const std::string&) { o.workers_given = true; });
    sc->add_option("--baseline", o.baseline, "K baseline for differences")
        ->check(CLI::IsMember({"selfconsistent", "paper"}))
        ->each([&o](const std::string&) { o.baseline_given = true; });
    sc->add_option("--bq-convention", o.bq, "per-scale coefficient convention")
        ->check(CLI::IsMember({"weighted", "raw"}))
        ->each([&o](const std::string&) { o.bq_given = true; });
}

std::vector<int> json_ints(const json& a) {
    std::vector<int> v;
    for (const auto& x : a)
        v.push_back(x.get<int>());
    return v;
}

std::vector<double> json_doubles(const json& a) {
    std::vector<double> v;
    for (const auto& x : a)
        v.push_back(x.get<double>());
    return v;
}

// Materialize every key the tool reads, so a resolved config re-resolves to
// itself and a sidecar can drive an identical rerun.
json resolve_config(const std::string& path, const CommonOpts& o) {
    json raw = json::parse(read_file(path));
    if (raw.contains("resolved_config"))
        raw = raw["resolved_config"];
    if (!raw.is_object())
        throw std::runtime_error("config: top level must be a JSON object");

    json c;
    const json jm = raw.contains("model") ? raw["model"] : json::object();
    c["model"]["theta"] = jm.value("theta", 1.0);
    c["model"]["truncation"] = jm.value("truncation", 5);
    c["model"]["variance_scale"] = jm.value("variance_scale", 1.0);
    const json jw = raw.contains("window") ? raw["window"] : json::object();
    c["window"]["t0"] = jw.value("t0", 0.0);
    c["window"]["t1"] = jw.value("t1", 10.0);
    c["time_grid_nodes"] = raw.value("time_grid_nodes", 100);
    c["replicates"] = raw.value("replicates", 1);
    c["seed"] = raw.value("seed", std::uint64_t{0});
    c["workers"] = raw.value("workers", 1);
    c["baseline"] = raw.value("baseline", "selfconsistent");
    c["bq_convention"] = raw.value("bq_convention", "weighted");

    if (raw.contains("qs")) {
        c["qs"] = raw["qs"];
    } else {
        json qs = json::array();
        for (int q = 0; q <= 30; ++q)
            qs.push_back(q);
        c["qs"] = qs;
    }
    c["h_orders"] = raw.contains("h_orders") ? raw["h_orders"] : json::array();
    c["smooth_degree"] = raw.value("smooth_degree", 0);

    const json ji = raw.contains("integration") ? raw["integration"] : json::object();
    c["integration"]["method"] = ji.value("method", "monte_carlo");
    c["integration"]["samples"] = ji.value("samples", static_cast<long long>(1000));
    c["integration"]["nodes_per_axis"] = ji.value("nodes_per_axis", 8);
    c["integration"]["n"] = ji.value("n", 2);

    const json jk = raw.contains("kfun") ? raw["kfun"] : json::object();
    if (jk.contains("qs")) {
        c["kfun"]["qs"] = jk["qs"];
    } else {
        c["kfun"]["qs"] = json::array({1, 7, 13, 19, 25});
    }
    c["kfun"]["estimator"] = jk.value("estimator", "scale");
    c["kfun"]["pattern_file"] = jk.value("pattern_file", "");
    c["kfun"]["rho_known"] = jk.value("rho_known", 0.0);
    c["kfun"]["theta_nodes"] =
        jk.contains("theta_nodes") ? jk["theta_nodes"] : json::array();
    c["kfun"]["time_nodes"] =
        jk.contains("time_nodes") ? jk["time_nodes"] : json::array();

    const json jf = raw.contains("fit") ? raw["fit"] : json::object();
    c["fit"]["l_max"] = jf.value("l_max", 3);
    if (jf.contains("lag_indices")) {
        c["fit"]["lag_indices"] = jf["lag_indices"];
    } else {
        c["fit"]["lag_indices"] = json::array({0, 1, 2, 3, 4, 6, 8, 10, 13, 16, 20, 25});
    }
    c["fit"]["n_pairs"] = jf.value("n_pairs", 2000);
    c["fit"]["n_bins"] = jf.value("n_bins", 64);
    c["fit"]["replicates"] = jf.value("replicates", 100);
    c["fit"]["pair_seed"] = jf.value("pair_seed", std::uint64_t{12345});
    const json js = jf.contains("sphere") ? jf["sphere"] : json::object();
    c["fit"]["sphere"]["n_bands"] = js.value("n_bands", 48);
    c["fit"]["sphere"]["n_lon"] = js.value("n_lon", 96);
    c["fit"]["field_files"] =
        jf.contains("field_files") ? jf["field_files"] : json::array();

    const json jc = raw.contains("classify") ? raw["classify"] : json::object();
    c["classify"]["z"] = jc.value("z", 3.0);

    // flag overrides beat both defaults and the config file
    if (o.seed_given)
        c["seed"] = o.seed;
    if (o.workers_given)
        c["workers"] = o.workers;
    if (o.baseline_given)
        c["baseline"] = o.baseline;
    if (o.bq_given)
        c["bq_convention"] = o.bq;
    return c;
}

struct Setup {
    json config;
    std::string command;
    std::string out_dir;
    CovarianceModel model;
    TimeGrid grid;
    IntegrationSpec spec;
    Baseline baseline = Baseline::selfconsistent;
    std::uint64_t seed = 0;
    int workers = 1;
    std::chrono::steady_clock::time_point started;
};

Setup build_setup(const CommonOpts& o, const std::string& command) {
    Setup s;
    s.command = command;
    s.out_dir = o.out_dir;
    s.config = resolve_config(o.config_path, o);
    s.started = std::chrono::steady_clock::now();
    const json& c = s.config;

    s.model.theta = c["model"]["theta"].get<double>();
    s.model.truncation = c["model"]["truncation"].get<int>();
    s.model.variance_scale = c["model"]["variance_scale"].get<double>();
    const std::string bq = c["bq_convention"].get<std::string>();
    if (bq != "weighted" && bq != "raw")
        throw std::runtime_error("config: bq_convention must be weighted or raw");
    s.model.convention =
        bq == "raw" ? BqConvention::raw : BqConvention::weighted;
    s.model.validate();

    s.grid.t0 = c["window"]["t0"].get<double>();
    s.grid.t1 = c["window"]["t1"].get<double>();
    s.grid.nodes = c["time_grid_nodes"].get<int>();
    s.grid.validate();

    const std::string bl = c["baseline"].get<std::string>();
    if (bl != "selfconsistent" && bl != "paper")
        throw std::runtime_error("config: baseline must be selfconsistent or paper");
    s.baseline = bl == "paper" ? Baseline::paper : Baseline::selfconsistent;

    s.seed = c["seed"].get<std::uint64_t>();
    s.workers = c["workers"].get<int>();

    const std::string method = c["integration"]["method"].get<std::string>();
    if (method != "monte_carlo" && method != "trapezoid")
        throw std::runtime_error("config: integration.method must be monte_carlo or trapezoid");
    s.spec.method = method == "trapezoid" ? IntegrationMethod::trapezoid
                                          : IntegrationMethod::monte_carlo;
    s.spec.samples = c["integration"]["samples"].get<long long>();
    s.spec.nodes_per_axis = c["integration"]["nodes_per_axis"].get<int>();
    s.spec.order_n = c["integration"]["n"].get<int>();
    s.spec.seed = s.seed;
    s.spec.workers = s.workers;
    s.spec.t0 = s.grid.t0;
    s.spec.t1 = s.grid.t1;
    s.spec.validate();
    return s;
}

// Collects every file written; removes all of them unless committed, so a
// failed run leaves nothing behind.
class OutputTracker {
  public:
    explicit OutputTracker(std::string out_dir) : out_dir_(std::move(out_dir)) {
        std::filesystem::create_directories(out_dir_);
    }

    OutputTracker(const OutputTracker&) = delete;
    OutputTracker& operator=(const OutputTracker&) = delete;

    ~OutputTracker() {
        if (committed_)
            return;
        for (const std::string& p : written_)
            std::remove(p.c_str());
    }

    std::string path(const std::string& name) const { return out_dir_ + "/" + name; }

    void write(const std::string& name, const std::string& content) {
        const std::string p = path(name);
        write_text_atomic(p, content);
        written_.push_back(p);
    }

    void commit() { committed_ = true; }

  private:
    std::string out_dir_;
    std::vector<std::string> written_;
    bool committed_ = false;
};

std::string sidecar_name(const std::string& data_name) {
    const std::string suffix = ".csv";
    if (data_name.size() > suffix.size() &&
        data_name.compare(data_name.size() - suffix.size(), suffix.size(), suffix) == 0)
        return data_name.substr(0, data_name.size() - suffix.size()) + ".meta.json";
    return data_name + ".meta.json";
}

void write_with_sidecar(OutputTracker& tr, const Setup& s, const std::string& name,
                        const std::string& content, const json& extra = json::object()) {
    tr.write(name, content);
    json meta;
    meta["tool"] = "sphecox";
    meta["version"] = version_string;
    meta["command"] = s.command;
    meta["resolved_config"] = s.config;
    meta["seed"] = s.seed;
    meta["workers"] = s.workers;
    meta["baseline"] = s.config["baseline"];
    meta["bq_convention"] = s.config["bq_convention"];
    meta["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s.started)
            .count();
    for (auto it = extra.begin(); it != extra.end(); ++it)
        meta[it.key()] = it.value();
    tr.write(sidecar_name(name), meta.dump(2) + "\n");
}

std::string numbered(const char* stem, int index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04d%s", stem, index, ext);
    return std::string(buf);
}

int cmd_simulate(const CommonOpts& o) {
    Setup s;
    int replicates = 0;
    try {
        s = build_setup(o, "simulate");
        replicates = s.config["replicates"].get<int>();
        if (replicates < 1)
            throw std::runtime_error("config: replicates must be >= 1");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    OutputTracker tr(s.out_dir);
    try {
        const RandomStream base(s.seed);
        for (int r = 0; r < replicates; ++r) {
            RandomStream sub = base.split(static_cast<std::uint64_t>(r));
            const FieldRealization f = simulate_coefficients(s.model, s.grid, sub);
            const PointPattern p = sample_pattern(f, sub);
            json fx;
            fx["kind"] = "field";
            fx["replicate"] = r + 1;
            fx["pole"] = json::array({f.pole.x, f.pole.y, f.pole.z});
            fx["jitter_used"] = f.jitter_used;
            write_with_sidecar(tr, s, numbered("field", r + 1, ".csv"),
                               format_field_csv(f), fx);
            json px;
            px["kind"] = "pattern";
            px["replicate"] = r + 1;
            px["events"] = p.size();
            write_with_sidecar(tr, s, numbered("pattern", r + 1, ".csv"),
                               format_pattern_csv(p), px);
        }
        tr.commit();
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

int run_distance_table(const CommonOpts& o, const std::string& command) {
    Setup s;
    std::vector<int> qs;
    std::vector<double> hs;
    int smooth_degree = 0;
    double z = 3.0;
    try {
        s = build_setup(o, command);
        qs = json_ints(s.config["qs"]);
        hs = json_doubles(s.config["h_orders"]);
        smooth_degree = s.config["smooth_degree"].get<int>();
        z = s.config["classify"]["z"].get<double>();
        if (qs.empty())
            throw std::runtime_error("config: qs must be nonempty");
        if (!(z > 0.0))
            throw std::runtime_error("config: classify.z must be positive");
        for (double h : hs)
            if (!(h > 0.0) || h == 1.0)
                throw std::runtime_error(
                    "config: h_orders must be positive and different from 1");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    OutputTracker tr(s.out_dir);
    try {
        const DistanceTable t = compute_distances(s.model, qs, hs, s.spec);
        if (command == "distances") {
            write_with_sidecar(tr, s, "shannon.csv", format_shannon_csv(t));
            if (!hs.empty())
                write_with_sidecar(tr, s, "renyi.csv", format_renyi_csv(t));
            if (smooth_degree > 0) {
                std::vector<double> xs, ys;
                for (const auto& row : t.rows) {
                    xs.push_back(static_cast<double>(row.q));
                    ys.push_back(row.shannon.value_rel);
                }
                const PolyFit pf = polyfit_smooth(xs, ys, smooth_degree);
                std::string csv = "power,coeff\n";
                for (std::size_t k = 0; k < pf.coeffs.size(); ++k) {
                    csv += std::to_string(k);
                    csv += ',';
                    csv += format_double(pf.coeffs[k]);
                    csv += '\n';
                }
                json extra;
                extra["residual_norm"] = pf.residual_norm;
                write_with_sidecar(tr, s, "shannon_smooth.csv", csv, extra);
            }
        } else {
            // classify: three-way call per scale on the volume-normalized value
            std::string csv = "q,value_rel,se_rel,label\n";
            for (const auto& row : t.rows) {
                csv += std::to_string(row.q);
                csv += ',';
                csv += format_double(row.shannon.value_rel);
                csv += ',';
                csv += format_double(row.shannon.se_rel);
                csv += ',';
                csv += to_string(classify_scale(row.shannon.value_rel,
                                                row.shannon.se_rel, z));
                csv += '\n';
            }
            json extra;
            extra["z"] = z;
            extra["statistic"] = "shannon value_rel";
            write_with_sidecar(tr, s, "classify.csv", csv, extra);
        }
        tr.commit();
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

int cmd_kfun(const CommonOpts& o) {
    Setup s;
    std::vector<int> qs;
    std::vector<double> thetas, times;
    std::string estimator, pattern_file;
    double rho_known = 0.0, z = 3.0;
    PointPattern pattern;
    try {
        s = build_setup(o, "kfun");
        const json& jk = s.config["kfun"];
        qs = json_ints(jk["qs"]);
        estimator = jk["estimator"].get<std::string>();
        pattern_file = jk["pattern_file"].get<std::string>();
        rho_known = jk["rho_known"].get<double>();
        z = s.config["classify"]["z"].get<double>();
        thetas = jk["theta_nodes"].empty() ? default_theta_nodes()
                                           : json_doubles(jk["theta_nodes"]);
        times = jk["time_nodes"].empty()
                    ? default_time_nodes(s.grid.t1 - s.grid.t0)
                    : json_doubles(jk["time_nodes"]);
        if (estimator != "scale" && estimator != "model" && estimator != "empirical")
            throw std::runtime_error(
                "config: kfun.estimator must be scale, model or empirical");
        if (estimator == "scale" && qs.empty())
            throw std::runtime_error("config: kfun.qs must be nonempty");
        if (estimator == "empirical") {
            if (pattern_file.empty())
                throw std::runtime_error("config: kfun.estimator empirical needs a pattern_file");
            pattern = parse_pattern_csv(read_file(pattern_file), s.grid.t0, s.grid.t1);
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    OutputTracker tr(s.out_dir);
    try {
        const double span = s.grid.t1 - s.grid.t0;
        const KGrid null_g = null_kgrid(thetas, times, span, s.baseline);
        std::string labels = "name,label\n";
        auto emit = [&](const std::string& stem, const std::string& name,
                        const std::string& diff_stem, const KGrid& grid,
                        const KGrid& diff, bool with_errors) {
            write_with_sidecar(tr, s, stem + ".csv", format_kgrid_csv(grid));
            if (with_errors)
                write_with_sidecar(tr, s, stem + "_stderr.csv",
                                   format_kgrid_csv(grid, true));
            write_with_sidecar(tr, s, diff_stem + ".csv", format_kgrid_csv(diff));
            if (with_errors)
                write_with_sidecar(tr, s, diff_stem + "_stderr.csv",
                                   format_kgrid_csv(diff, true));
            KGrid shifted = null_g;
            shifted.values += diff.values;
            shifted.std_errors = diff.std_errors;
            labels += name;
            labels += ',';
            labels += to_string(classify_from_k(shifted, null_g, z));
            labels += '\n';
        };

        if (estimator == "scale") {
            if (s.baseline == Baseline::selfconsistent) {
                // coupled estimator: difference first, surface = null + diff
                const std::vector<KGrid> diffs =
                    k_scale_minus_null_multi(s.model, qs, thetas, times, span, s.spec);
                for (std::size_t k = 0; k < qs.size(); ++k) {
                    const std::string tag = "q" + std::to_string(qs[k]);
                    KGrid abs_g = null_g;
                    abs_g.values += diffs[k].values;
                    abs_g.std_errors = diffs[k].std_errors;
                    emit("kfun_scale_" + tag, tag, "kfun_diff_" + tag, abs_g,
                         diffs[k], true);
                }
            } else {
                for (int q : qs) {
                    const std::string tag = "q" + std::to_string(q);
                    const KGrid abs_g =
                        k_scale(s.model, q, thetas, times, span, s.spec);
                    KGrid diff = abs_g;
                    diff.values -= null_g.values;
                    emit("kfun_scale_" + tag, tag, "kfun_diff_" + tag, abs_g,
                         diff, true);
                }
            }
        } else if (estimator == "model") {
            const KGrid abs_g = k_model(s.model, thetas, times, span, s.spec);
            KGrid diff = abs_g;
            diff.values -= null_g.values;
            emit("kfun_model", "model", "kfun_diff", abs_g, diff, true);
        } else {
            const KGrid abs_g =
                rho_known > 0.0 ? k_empirical(pattern, thetas, times, rho_known)
                                : k_empirical(pattern, thetas, times);
            KGrid diff = abs_g;
            diff.values -= null_g.values;
            emit("kfun_empirical", "empirical", "kfun_diff", abs_g, diff, false);
        }
        json extra;
        extra["z"] = z;
        write_with_sidecar(tr, s, "kfun_labels.csv", labels, extra);
        tr.commit();
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

int cmd_fit(const CommonOpts& o) {
    Setup s;
    int l_max = 0, n_pairs = 0, n_bins = 0, replicates = 0;
    std::uint64_t pair_seed = 0;
    std::vector<int> lag_indices;
    SphereGrid sg;
    std::vector<std::string> field_files;
    std::vector<FieldRealization> loaded;
    TimeGrid fit_grid;
    try {
        s = build_setup(o, "fit");
        const json& jf = s.config["fit"];
        l_max = jf["l_max"].get<int>();
        lag_indices = json_ints(jf["lag_indices"]);
        n_pairs = jf["n_pairs"].get<int>();
        n_bins = jf["n_bins"].get<int>();
        replicates = jf["replicates"].get<int>();
        pair_seed = jf["pair_seed"].get<std::uint64_t>();
        sg.n_bands = jf["sphere"]["n_bands"].get<int>();
        sg.n_lon = jf["sphere"]["n_lon"].get<int>();
        sg.validate();
        for (const auto& x : jf["field_files"])
            field_files.push_back(x.get<std::string>());
        fit_grid = s.grid;
        // replicates may come from files written by cmd_simulate; each data
        // file's sidecar carries the model, grid and pole that produced it
        for (std::size_t i = 0; i < field_files.size(); ++i) {
            const std::string& file = field_files[i];
            std::string meta_path = file;
            if (meta_path.size() > 4 &&
                meta_path.compare(meta_path.size() - 4, 4, ".csv") == 0)
                meta_path = meta_path.substr(0, meta_path.size() - 4);
            meta_path += ".meta.json";
            const json meta = json::parse(read_file(meta_path));
            const json& rc = meta.at("resolved_config");
            CovarianceModel fm;
            fm.theta = rc.at("model").at("theta").get<double>();
            fm.truncation = rc.at("model").at("truncation").get<int>();
            fm.variance_scale = rc.at("model").at("variance_scale").get<double>();
            fm.convention =
                rc.at("bq_convention").get<std::string>() == "raw"
                    ? BqConvention::raw
                    : BqConvention::weighted;
            fm.validate();
            TimeGrid fg;
            fg.t0 = rc.at("window").at("t0").get<double>();
            fg.t1 = rc.at("window").at("t1").get<double>();
            fg.nodes = rc.at("time_grid_nodes").get<int>();
            fg.validate();
            if (i == 0)
                fit_grid = fg;
            else if (fg.t0 != fit_grid.t0 || fg.t1 != fit_grid.t1 ||
                     fg.nodes != fit_grid.nodes)
                throw std::runtime_error("config: field_files use different time grids");
            const json& jp = meta.at("pole");
            const SpherePoint pole(jp.at(0).get<double>(), jp.at(1).get<double>(),
                                   jp.at(2).get<double>());
            loaded.push_back(parse_field_csv(read_file(file), fm, fg, pole,
                                             meta.value("seed", std::uint64_t{0}),
                                             meta.value("jitter_used", 0.0)));
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    OutputTracker tr(s.out_dir);
    try {
        CoefCovAccumulator acc(fit_grid, sg, l_max, lag_indices, n_pairs, n_bins,
                               pair_seed);
        if (!field_files.empty()) {
            for (const FieldRealization& f : loaded)
                acc.add(lattice_field_values(f, sg));
        } else {
            const RandomStream base(s.seed);
            for (int r = 0; r < replicates; ++r) {
                RandomStream sub = base.split(static_cast<std::uint64_t>(r));
                const FieldRealization f = simulate_coefficients(s.model, fit_grid, sub);
                acc.add(lattice_field_values(f, sg));
            }
        }
        const CoefCovTable table = acc.finalize();
        const FitResult fit = fit_theta(table, s.model, l_max);

        std::string csv = "l\\lag";
        for (double lag : table.lags) {
            csv += ',';
            csv += format_double(lag);
        }
        csv += '\n';
        for (int l = 0; l <= l_max; ++l) {
            csv += std::to_string(l);
            for (Eigen::Index i = 0; i < table.bhat.cols(); ++i) {
                csv += ',';
                csv += format_double(table.bhat(l, i));
            }
            csv += '\n';
        }
        write_with_sidecar(tr, s, "bhat.csv", csv);

        json report;
        report["theta_hat"] = fit.theta_hat;
        report["residual"] = fit.residual;
        report["l_max"] = l_max;
        report["replicates"] = static_cast<long long>(acc.count());
        write_with_sidecar(tr, s, "fit_report.json", report.dump(2) + "\n");
        tr.commit();
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal log-Gaussian Cox processes on the sphere"};
    app.require_subcommand(1);
    CommonOpts o;
    CLI::App* sc_sim = app.add_subcommand("simulate", "draw fields and point patterns");
    CLI::App* sc_dist = app.add_subcommand("distances", "per-scale divergence tables");
    CLI::App* sc_kfun = app.add_subcommand("kfun", "K summaries and difference grids");
    CLI::App* sc_fit = app.add_subcommand("fit", "recover theta from replicated fields");
    CLI::App* sc_cls = app.add_subcommand("classify", "label scales from distances");
    for (CLI::App* sc : {sc_sim, sc_dist, sc_kfun, sc_fit, sc_cls})
        add_common(sc, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (app.got_subcommand(sc_sim))
        return cmd_simulate(o);
    if (app.got_subcommand(sc_dist))
        return run_distance_table(o, "distances");
    if (app.got_subcommand(sc_cls))
        return run_distance_table(o, "classify");
    if (app.got_subcommand(sc_kfun))
        return cmd_kfun(o);
    return cmd_fit(o);
}
