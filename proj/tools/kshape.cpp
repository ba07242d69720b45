// Command-line front end: landmark extraction from masks, synthetic data
// generation, the full evaluation protocol, and DeLong comparison of two
// score tables.
//
// Exit codes: 0 success, 1 partial per-file failures, 2 configuration or
// usage errors.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kshape/kshape.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct extract_args {
    std::string mask_dir;
    std::string out_dir;
    int landmarks = 100;
};

struct synth_args {
    std::string out_dir;
    kshape::synth_config cfg;
};

struct evaluate_args {
    std::string manifest;
    std::string out_dir;
    std::string config_file;
    std::string grid; // "s1,s2,...:c1,c2,..."
    std::vector<int> landmark_counts{25, 50, 100, 200};
    double sigma = 0.0; // 0 = not pinned
    double C = 0.0;     // 0 = not pinned
    std::uint64_t seed = 1;
    int bootstrap = 2000;
    bool nested_cv = false;
    bool no_bias = false;
    bool cyclic = false;
};

struct compare_args {
    std::string scores_a;
    std::string scores_b;
    std::string out_file;
};

// Label from the file name when it is self-describing; 0 means unknown and
// must be filled in before the manifest can be evaluated.
int label_from_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name.find("malig") != std::string::npos) return 1;
    if (name.find("benign") != std::string::npos) return -1;
    return 0;
}

void write_run_manifest(const fs::path& out_dir, const json& resolved) {
    kshape::io::detail::write_text(out_dir / "run_manifest.json",
                                   resolved.dump(2) + "\n");
}

int run_extract(const extract_args& a) {
    if (a.landmarks < 3)
        throw kshape::error("--landmarks must be >= 3");
    std::vector<fs::path> masks;
    for (const fs::directory_entry& e : fs::directory_iterator(a.mask_dir))
        if (e.is_regular_file() && (e.path().extension() == ".pgm" ||
                                    e.path().extension() == ".csv"))
            masks.push_back(e.path());
    std::sort(masks.begin(), masks.end());
    if (masks.empty())
        throw kshape::error("no .pgm or .csv masks in " + a.mask_dir);

    fs::create_directories(a.out_dir);
    std::vector<kshape::io::manifest_entry> entries;
    std::string error_rows;
    for (const fs::path& mask_path : masks) {
        const std::string id = mask_path.stem().string();
        try {
            const kshape::binary_mask mask = kshape::io::read_mask(mask_path);
            const kshape::boundary_contour bc = kshape::trace_boundary(mask);
            const kshape::landmark_set lm = kshape::canonical_start(
                kshape::resample_equidistant(bc, a.landmarks));
            const std::string file = id + "_landmarks.csv";
            kshape::io::write_landmarks_csv(fs::path(a.out_dir) / file, lm);
            entries.push_back({id, label_from_name(id), file});
        } catch (const kshape::error& e) {
            std::cerr << "extract: " << mask_path.string() << ": " << e.what()
                      << "\n";
            error_rows += id;
            error_rows += ',';
            error_rows += e.what();
            error_rows += '\n';
        }
    }
    kshape::io::write_manifest(fs::path(a.out_dir) / "manifest.csv", entries);
    if (!error_rows.empty())
        kshape::io::detail::write_text(fs::path(a.out_dir) / "errors.csv",
                                       "id,error\n" + error_rows);
    write_run_manifest(a.out_dir, json{{"command", "extract"},
                                       {"mask_dir", a.mask_dir},
                                       {"out", a.out_dir},
                                       {"landmarks", a.landmarks}});
    std::cout << "extracted " << entries.size() << " of " << masks.size()
              << " masks -> " << a.out_dir << "\n";
    if (entries.size() < masks.size()) {
        std::cout << "failures listed in "
                  << (fs::path(a.out_dir) / "errors.csv").string() << "\n";
        return 1;
    }
    return 0;
}

int run_synth(const synth_args& a) {
    kshape::validate(a.cfg);
    const kshape::shape_dataset ds = kshape::gen_dataset(a.cfg);
    fs::create_directories(a.out_dir);
    std::vector<kshape::io::manifest_entry> entries;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const std::string file = ds.ids[k] + ".csv";
        kshape::io::write_landmarks_csv(fs::path(a.out_dir) / file,
                                        ds.shapes[k]);
        entries.push_back({ds.ids[k], ds.labels[k], file});
    }
    kshape::io::write_manifest(fs::path(a.out_dir) / "manifest.csv", entries);
    write_run_manifest(
        a.out_dir,
        json{{"command", "synth"},
             {"out", a.out_dir},
             {"benign", a.cfg.n_benign},
             {"malignant", a.cfg.n_malignant},
             {"landmarks", a.cfg.n_landmarks},
             {"noise", a.cfg.noise},
             {"lobes", {a.cfg.lobes_min, a.cfg.lobes_max}},
             {"lobe_amplitude", {a.cfg.lobe_amp_min, a.cfg.lobe_amp_max}},
             {"eccentricity", {a.cfg.ecc_min, a.cfg.ecc_max}},
             {"seed", a.cfg.seed}});
    std::cout << "wrote " << ds.size() << " shapes and manifest.csv -> "
              << a.out_dir << "\n";
    return 0;
}

// --grid "0.1,0.3:1,10" -> sigma grid {0.1, 0.3}, C grid {1, 10}.
void apply_grid(const std::string& grid, kshape::eval_options& opt) {
    const std::size_t colon = grid.find(':');
    if (colon == std::string::npos)
        throw kshape::error("--grid wants 'sigmas:Cs', e.g. '0.1,0.3:1,10'");
    const auto nums = [](const std::string& s) {
        std::vector<double> out;
        for (const std::string& cell : kshape::io::detail::split(s, ','))
            out.push_back(kshape::io::detail::parse_double(cell, "--grid"));
        return out;
    };
    opt.sigma_grid = nums(grid.substr(0, colon));
    opt.c_grid = nums(grid.substr(colon + 1));
}

int run_evaluate(evaluate_args a, const CLI::App* cmd) {
    // Optional JSON config supplies anything not given on the command line.
    json cfg = json::object();
    if (!a.config_file.empty()) {
        try {
            cfg = json::parse(kshape::io::detail::read_text(a.config_file));
        } catch (const json::exception& e) {
            throw kshape::io_error(a.config_file + ": " + e.what());
        }
    }
    const auto given = [&](const std::string& flag) {
        return cmd->get_option(flag)->count() > 0;
    };
    try {
        if (!given("--manifest") && cfg.contains("manifest"))
            a.manifest = cfg["manifest"].get<std::string>();
        if (!given("--out") && cfg.contains("out"))
            a.out_dir = cfg["out"].get<std::string>();
        if (!given("--landmarks") && cfg.contains("landmark_counts"))
            a.landmark_counts = cfg["landmark_counts"].get<std::vector<int>>();
        if (!given("--sigma") && cfg.contains("sigma"))
            a.sigma = cfg["sigma"].get<double>();
        if (!given("--C") && cfg.contains("C"))
            a.C = cfg["C"].get<double>();
        if (!given("--seed") && cfg.contains("seed"))
            a.seed = cfg["seed"].get<std::uint64_t>();
        if (!given("--bootstrap") && cfg.contains("bootstrap"))
            a.bootstrap = cfg["bootstrap"].get<int>();
        if (!given("--nested-cv") && cfg.contains("nested_cv"))
            a.nested_cv = cfg["nested_cv"].get<bool>();
        if (!given("--no-bias") && cfg.contains("no_bias"))
            a.no_bias = cfg["no_bias"].get<bool>();
        if (!given("--cyclic-distance") && cfg.contains("cyclic_distance"))
            a.cyclic = cfg["cyclic_distance"].get<bool>();
    } catch (const json::exception& e) {
        throw kshape::io_error(a.config_file + ": " + e.what());
    }
    if (a.manifest.empty())
        throw kshape::error("evaluate needs --manifest (or a config file)");
    if (a.out_dir.empty())
        throw kshape::error("evaluate needs --out (or a config file)");

    kshape::eval_options opt;
    opt.landmark_counts = a.landmark_counts;
    std::sort(opt.landmark_counts.begin(), opt.landmark_counts.end());
    opt.landmark_counts.erase(std::unique(opt.landmark_counts.begin(),
                                          opt.landmark_counts.end()),
                              opt.landmark_counts.end());
    opt.seed = a.seed;
    opt.nested_cv = a.nested_cv;
    opt.train.fit_bias = !a.no_bias;
    opt.metric = a.cyclic ? kshape::shape_metric::cyclic
                          : kshape::shape_metric::indexed;
    opt.bootstrap_resamples = a.bootstrap;
    if (!a.grid.empty()) {
        apply_grid(a.grid, opt);
    } else {
        try {
            if (cfg.contains("sigma_grid"))
                opt.sigma_grid = cfg["sigma_grid"].get<std::vector<double>>();
            if (cfg.contains("c_grid"))
                opt.c_grid = cfg["c_grid"].get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw kshape::io_error(a.config_file + ": " + e.what());
        }
    }
    if (a.sigma > 0.0) opt.sigma_grid = {a.sigma};
    if (a.C > 0.0) opt.c_grid = {a.C};

    const kshape::shape_dataset ds = kshape::io::load_dataset(a.manifest);
    const kshape::evaluation_run run = kshape::evaluate_dataset(ds, opt);

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    std::string summary = "n_landmarks,sigma,C,auc,auc_sd,cutoff,accuracy,"
                          "accuracy_sd,sensitivity,sensitivity_sd,"
                          "specificity,specificity_sd\n";
    using kshape::io::format_double;
    for (const kshape::count_evaluation& ev : run.per_count) {
        const std::string n = std::to_string(ev.n_landmarks);
        kshape::io::write_scores_csv(out / ("scores_" + n + ".csv"),
                                     ev.scores);
        kshape::io::write_roc_json(out / ("roc_" + n + ".json"), ev.roc);
        kshape::io::write_roc_points_csv(out / ("roc_points_" + n + ".csv"),
                                         ev.roc);
        summary += n + ',' + format_double(ev.sigma) + ',' +
                   format_double(ev.C) + ',' + format_double(ev.roc.auc) +
                   ',' + format_double(ev.spread.auc_sd) + ',' +
                   format_double(ev.roc.cutoff) + ',' +
                   format_double(ev.roc.accuracy) + ',' +
                   format_double(ev.spread.accuracy_sd) + ',' +
                   format_double(ev.roc.sensitivity) + ',' +
                   format_double(ev.spread.sensitivity_sd) + ',' +
                   format_double(ev.roc.specificity) + ',' +
                   format_double(ev.spread.specificity_sd) + '\n';
    }
    kshape::io::detail::write_text(out / "summary.csv", summary);

    std::string delong = "count_a,count_b,auc_a,auc_b,z,p\n";
    for (const kshape::pairwise_delong& pd : run.pairs)
        delong += std::to_string(pd.count_a) + ',' +
                  std::to_string(pd.count_b) + ',' +
                  format_double(pd.test.auc_a) + ',' +
                  format_double(pd.test.auc_b) + ',' +
                  format_double(pd.test.z_statistic) + ',' +
                  format_double(pd.test.p_value) + '\n';
    kshape::io::detail::write_text(out / "delong.csv", delong);

    write_run_manifest(
        a.out_dir,
        json{{"command", "evaluate"},
             {"manifest", a.manifest},
             {"out", a.out_dir},
             {"landmark_counts", opt.landmark_counts},
             {"sigma_grid", opt.sigma_grid},
             {"c_grid", opt.c_grid},
             {"seed", opt.seed},
             {"nested_cv", opt.nested_cv},
             {"fit_bias", opt.train.fit_bias},
             {"metric", opt.metric == kshape::shape_metric::cyclic
                            ? "cyclic"
                            : "indexed"},
             {"bootstrap", opt.bootstrap_resamples},
             {"kkt_tolerance", opt.train.kkt_tolerance},
             {"max_passes", opt.train.max_passes}});

    std::printf("%11s %14s %9s %12s %12s %7s %6s\n", "n_landmarks", "AUC",
                "accuracy", "sensitivity", "specificity", "sigma", "C");
    for (const kshape::count_evaluation& ev : run.per_count)
        std::printf("%11d %6.3f +- %5.3f %9.3f %12.3f %12.3f %7.3g %6.3g\n",
                    ev.n_landmarks, ev.roc.auc, ev.spread.auc_sd,
                    ev.roc.accuracy, ev.roc.sensitivity, ev.roc.specificity,
                    ev.sigma, ev.C);
    for (const kshape::pairwise_delong& pd : run.pairs)
        std::printf("DeLong %d vs %d: AUC %.3f vs %.3f, z = %+.3f, p = %.3f\n",
                    pd.count_a, pd.count_b, pd.test.auc_a, pd.test.auc_b,
                    pd.test.z_statistic, pd.test.p_value);
    std::cout << "results -> " << a.out_dir << "\n";
    return 0;
}

int run_compare(const compare_args& a) {
    const kshape::score_table ta = kshape::io::read_scores_csv(a.scores_a);
    const kshape::score_table tb = kshape::io::read_scores_csv(a.scores_b);
    const kshape::delong_result r = kshape::delong_test(ta, tb);
    std::printf("AUC a = %.6f\nAUC b = %.6f\nz = %+.6f\np = %.6f\n", r.auc_a,
                r.auc_b, r.z_statistic, r.p_value);
    if (!a.out_file.empty()) {
        kshape::io::detail::write_text(
            a.out_file, json{{"auc_a", r.auc_a},
                             {"auc_b", r.auc_b},
                             {"variance_diff", r.variance_diff},
                             {"z", r.z_statistic},
                             {"p", r.p_value}}
                                .dump(2) +
                            "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-contour shape classification with a full Procrustes "
                 "kernel SVM"};
    app.require_subcommand(1);

    extract_args ex;
    CLI::App* extract = app.add_subcommand(
        "extract", "Trace masks and write equidistant landmark CSVs");
    extract->add_option("--masks", ex.mask_dir, "directory of .pgm/.csv masks")
        ->required();
    extract->add_option("--out", ex.out_dir, "output directory")->required();
    extract->add_option("--landmarks", ex.landmarks,
                        "landmarks per contour (default 100)");

    synth_args sy;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a labeled synthetic shape dataset");
    synth->add_option("--out", sy.out_dir, "output directory")->required();
    synth->add_option("--benign", sy.cfg.n_benign, "benign count");
    synth->add_option("--malignant", sy.cfg.n_malignant, "malignant count");
    synth->add_option("--landmarks", sy.cfg.n_landmarks,
                      "landmarks per shape (default 400)");
    synth->add_option("--noise", sy.cfg.noise, "radial noise SD");
    synth->add_option("--lobes-min", sy.cfg.lobes_min, "min lobe count");
    synth->add_option("--lobes-max", sy.cfg.lobes_max, "max lobe count");
    synth->add_option("--amp-min", sy.cfg.lobe_amp_min, "min lobe amplitude");
    synth->add_option("--amp-max", sy.cfg.lobe_amp_max, "max lobe amplitude");
    synth->add_option("--ecc-min", sy.cfg.ecc_min, "min eccentricity");
    synth->add_option("--ecc-max", sy.cfg.ecc_max, "max eccentricity");
    synth->add_option("--seed", sy.cfg.seed, "RNG seed");

    evaluate_args ev;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Hyperparameters, LOOCV, ROC/AUC, DeLong across "
                    "landmark counts");
    evaluate->add_option("--manifest", ev.manifest, "dataset manifest CSV");
    evaluate->add_option("--out", ev.out_dir, "output directory");
    evaluate->add_option("--config", ev.config_file,
                         "JSON config supplying any unset flags");
    evaluate
        ->add_option("--landmarks", ev.landmark_counts,
                     "landmark counts, comma separated (default "
                     "25,50,100,200)")
        ->delimiter(',');
    evaluate->add_option("--sigma", ev.sigma, "pin kernel width (skip grid)");
    evaluate->add_option("--C", ev.C, "pin SVM C (skip grid)");
    evaluate->add_option("--grid", ev.grid,
                         "search grids as 'sigmas:Cs', e.g. '0.1,0.3:1,10'");
    evaluate->add_option("--seed", ev.seed, "RNG seed");
    evaluate->add_option("--bootstrap", ev.bootstrap,
                         "bootstrap resamples for metric SDs");
    evaluate->add_flag("--nested-cv", ev.nested_cv,
                       "re-select sigma/C inside every LOOCV fold");
    evaluate->add_flag("--no-bias", ev.no_bias,
                       "train without the intercept term");
    evaluate->add_flag("--cyclic-distance", ev.cyclic,
                       "minimize the metric over cyclic landmark shifts");

    compare_args cp;
    CLI::App* compare = app.add_subcommand(
        "compare", "Paired DeLong test between two score tables");
    compare->add_option("--scores-a", cp.scores_a, "first score CSV")
        ->required();
    compare->add_option("--scores-b", cp.scores_b, "second score CSV")
        ->required();
    compare->add_option("--out", cp.out_file, "also write the result as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (extract->parsed()) return run_extract(ex);
        if (synth->parsed()) return run_synth(sy);
        if (evaluate->parsed()) return run_evaluate(ev, evaluate);
        if (compare->parsed()) return run_compare(cp);
    } catch (const kshape::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
