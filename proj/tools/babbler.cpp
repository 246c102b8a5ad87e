// babbler: command-line driver for the vowel acquisition experiments.

#include "babbler/ambient.hpp"
#include "babbler/analysis.hpp"
#include "babbler/caregiver.hpp"
#include "babbler/config.hpp"
#include "babbler/errors.hpp"
#include "babbler/learner.hpp"
#include "babbler/parallel.hpp"
#include "babbler/pipeline.hpp"
#include "babbler/random.hpp"
#include "babbler/speakers.hpp"
#include "babbler/wav.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace babbler;

namespace {

constexpr std::uint64_t learner_tag = 0x1ea7;
constexpr std::uint64_t caregiver_tag = 0xca2e;

struct context {
    run_config cfg;
    fs::path out_dir;
    std::uint64_t seed = 1;
    unsigned jobs = 1;

    fs::path path(const std::string& key) const { return out_dir / cfg.text(key); }
    std::string header() const { return provenance_header(cfg); }
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Creates the parent directories of an output path.
const fs::path& writable(const fs::path& p)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    return p;
}

std::ofstream open_out(const fs::path& p)
{
    writable(p);
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw format_error("cannot write " + p.string());
    return out;
}

std::vector<vowel> parse_vowels(const std::vector<std::string>& names, const std::string& key)
{
    std::vector<vowel> out;
    for (const auto& n : names) {
        auto v = parse_vowel(n);
        if (!v)
            throw config_invalid("unknown vowel '" + n + "' in " + key);
        out.push_back(*v);
    }
    return out;
}

learn_mode mode_of(const context& ctx, const std::string& key)
{
    auto m = parse_learn_mode(ctx.cfg.text(key));
    if (!m)
        throw config_invalid(key + " must be full16 or guided13");
    return *m;
}

esn_params esn_params_of(const context& ctx)
{
    esn_params p;
    p.size = ctx.cfg.unsigned_integer("esn.size");
    p.spectral_radius = ctx.cfg.real("esn.spectral_radius");
    p.leak = ctx.cfg.real("esn.leak");
    p.density = ctx.cfg.real("esn.density");
    p.input_scale = ctx.cfg.real("esn.input_scale");
    p.ridge = ctx.cfg.real("esn.ridge");
    if (p.size == 0 || p.leak <= 0 || p.leak > 1 || p.density <= 0 || p.density > 1 || p.ridge < 0)
        throw config_invalid("ESN parameters out of range");
    return p;
}

std::vector<speaker> load_series(const context& ctx)
{
    const auto p = ctx.path("paths.speakers");
    if (!fs::exists(p))
        throw format_error("speaker series " + p.string() + " not found; run gen-speakers first");
    return read_speaker_series(p);
}

dataset_manifest load_manifest(const context& ctx, const std::vector<speaker>& series)
{
    const auto p = ctx.path("paths.manifest");
    if (!fs::exists(p))
        throw format_error("manifest " + p.string() + " not found; run gen-ambient first");
    return read_manifest(p, series);
}

std::vector<feature_stream> load_features(const context& ctx, const dataset_manifest& m,
                                          const std::vector<speaker>& series)
{
    return dataset_features(m, series, ctx.cfg.real("ambient.clip_seconds"), ctx.jobs, ctx.path("paths.features"));
}

// ---------------------------------------------------------------- gen-speakers

int cmd_gen_speakers(const context& ctx)
{
    const auto ages = ctx.cfg.int_list("speakers.ages");
    const auto& sex_filter = ctx.cfg.text("speakers.sex");
    if (sex_filter != "both" && sex_filter != "male" && sex_filter != "female")
        throw config_invalid("speakers.sex must be male, female or both");

    std::vector<speaker> series;
    for (const auto& s : make_speaker_series()) {
        if (!ages.empty() && std::find(ages.begin(), ages.end(), s.age) == ages.end())
            continue;
        if (sex_filter != "both" && std::string(to_string(s.sex)) != sex_filter)
            continue;
        series.push_back(s);
    }
    if (series.empty())
        throw config_invalid("speaker filter selects no speakers");

    calibration_options opts;
    opts.budget = static_cast<int>(ctx.cfg.integer("calibration.budget"));
    opts.max_objective = ctx.cfg.real("calibration.max_objective");
    if (opts.budget < 1)
        throw config_invalid("calibration.budget must be positive");

    std::vector<std::string> messages(series.size());
    parallel_for(series.size(), ctx.jobs, [&](std::size_t i) {
        series[i] = calibrate_prototypes_flagged(series[i], scaled_targets(series[i]), opts, &messages[i]);
    });

    write_speaker_series(writable(ctx.path("paths.speakers")), series, ctx.cfg.hash());

    auto report = open_out(ctx.path("paths.reports") / "calibration.csv");
    report << ctx.header() << "\n";
    report << "speaker,age,sex,tract_length,f0,vowel,target_f1,target_f2,f1,f2,objective,calibrated\n";
    std::size_t failed = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const auto targets = scaled_targets(s);
        for (const auto& t : targets) {
            const auto f = s.prototype_formants.count(t.v) ? s.prototype_formants.at(t.v) : formant_pair{};
            report << s.id() << "," << s.age << "," << to_string(s.sex) << "," << fmt(s.tract_length) << ","
                   << fmt(s.f0) << "," << to_string(t.v) << "," << fmt(t.f1) << "," << fmt(t.f2) << ","
                   << fmt(f.f1) << "," << fmt(f.f2) << "," << fmt(s.residuals.at(t.v)) << ","
                   << (s.calibration_ok ? "true" : "false") << "\n";
        }
        if (!s.calibration_ok) {
            ++failed;
            std::cerr << "calibration failed for " << s.id() << ": " << messages[i] << "\n";
        }
    }
    std::cout << "calibrated " << series.size() - failed << "/" << series.size() << " speakers -> "
              << ctx.path("paths.speakers").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- gen-ambient

int cmd_gen_ambient(const context& ctx)
{
    const auto series = load_series(ctx);
    ambient_options opts;
    opts.per_class = static_cast<int>(ctx.cfg.integer("ambient.per_class"));
    opts.nulls = static_cast<int>(ctx.cfg.integer("ambient.nulls"));
    opts.sigma_in = ctx.cfg.real("ambient.sigma_in");
    opts.sigma_null = ctx.cfg.real("ambient.sigma_null");
    opts.tau_in = ctx.cfg.real("ambient.tau");
    opts.max_draws = static_cast<int>(ctx.cfg.integer("ambient.max_draws"));
    opts.clip_seconds = ctx.cfg.real("ambient.clip_seconds");
    opts.jobs = ctx.jobs;
    if (opts.per_class < 0 || opts.nulls < 0 || opts.max_draws < 1 || opts.sigma_in <= 0 || opts.sigma_null <= 0)
        throw config_invalid("ambient parameters out of range");

    auto manifest = generate_dataset(series, ctx.seed, opts);
    assign_clip_paths(manifest, series);

    if (ctx.cfg.boolean("ambient.write_wav")) {
        parallel_for(manifest.samples.size(), ctx.jobs, [&](std::size_t i) {
            const auto& s = manifest.samples[i];
            const fs::path p = ctx.out_dir / s.clip_path;
            fs::create_directories(p.parent_path());
            write_wav(writable(p), synthesize_vowel(s.motor, series[s.speaker_index], opts.clip_seconds));
        });
    }
    write_manifest(writable(ctx.path("paths.manifest")), manifest, series, ctx.cfg.hash());

    const auto classes = six_classes();
    auto counts = open_out(ctx.path("paths.reports") / "ambient_counts.csv");
    counts << ctx.header() << "\n";
    counts << "speaker";
    for (vowel v : classes)
        counts << "," << to_string(v);
    counts << ",filled\n";
    std::vector<std::size_t> total(classes.size(), 0);
    for (std::size_t k = 0; k < series.size(); ++k) {
        std::vector<std::size_t> c(classes.size(), 0);
        std::size_t filled = 0;
        bool any = false;
        for (const auto& s : manifest.samples) {
            if (s.speaker_index != k)
                continue;
            any = true;
            auto it = std::find(classes.begin(), classes.end(), s.label);
            if (it != classes.end())
                ++c[static_cast<std::size_t>(it - classes.begin())];
            filled += s.filled;
        }
        if (!any)
            continue;
        counts << series[k].id();
        for (std::size_t j = 0; j < c.size(); ++j) {
            counts << "," << c[j];
            total[j] += c[j];
        }
        counts << "," << filled << "\n";
    }

    auto scatter = open_out(ctx.path("paths.reports") / "formant_scatter.csv");
    scatter << ctx.header() << "\n";
    scatter << "sample_id,speaker,age,sex,intended,label,sigma,f1,f2,valid\n";
    for (const auto& s : manifest.samples) {
        const auto& spk = series[s.speaker_index];
        scatter << s.id << "," << spk.id() << "," << spk.age << "," << to_string(spk.sex) << ","
                << to_string(s.intended) << "," << to_string(s.label) << "," << fmt(s.sigma) << ","
                << fmt(s.formants.f1) << "," << fmt(s.formants.f2) << "," << (s.formants_valid ? 1 : 0) << "\n";
    }

    for (int p = 1; p <= 4; ++p) {
        const auto split = make_split(manifest, series, p, derive_seed(ctx.seed, {static_cast<std::uint64_t>(p), 0}));
        const auto path = ctx.path("paths.manifest").parent_path() / "splits" / ("paradigm" + std::to_string(p) + ".csv");
        write_split_csv(writable(path), split, ctx.header());
    }

    std::cout << manifest.samples.size() << " samples;";
    for (std::size_t j = 0; j < classes.size(); ++j)
        std::cout << " " << to_string(classes[j]) << "=" << total[j];
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct sweep_cell {
    std::vector<double> errors;
    Eigen::MatrixXi counts;
};

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_train(const context& ctx)
{
    const auto series = load_series(ctx);
    const auto manifest = load_manifest(ctx, series);
    const auto feats = load_features(ctx, manifest, series);
    const auto params = esn_params_of(ctx);
    const auto sizes = ctx.cfg.int_list("train.sizes");
    const auto paradigms = ctx.cfg.int_list("train.paradigms");
    const auto trials = ctx.cfg.unsigned_integer("train.trials");
    const auto grid_trials = ctx.cfg.unsigned_integer("train.grid_trials");
    if (sizes.empty() || trials == 0)
        throw config_invalid("train.sizes and train.trials must be non-empty");
    for (auto n : sizes)
        if (n < 1)
            throw config_invalid("reservoir sizes must be positive");
    for (auto p : paradigms)
        if (p < 1 || p > 4)
            throw config_invalid("train.paradigms entries must be 1..4");

    const fs::path reports = ctx.path("paths.reports");
    const fs::path models = ctx.path("paths.models");
    fs::create_directories(models);

    auto curve = open_out(reports / "error_curve.csv");
    curve << ctx.header() << "\n";
    curve << "paradigm,size,trials,mean_error,std_error,median_error,chance\n";

    for (auto p : paradigms) {
        std::vector<dataset_manifest> splits;
        for (std::size_t t = 0; t < trials; ++t)
            splits.push_back(make_split(manifest, series, static_cast<int>(p),
                                        derive_seed(ctx.seed, {static_cast<std::uint64_t>(p), t})));
        const auto& classes = splits.front().classes;
        const auto c = static_cast<Eigen::Index>(classes.size());
        for (auto n : sizes) {
            sweep_cell cell;
            cell.counts = Eigen::MatrixXi::Zero(c, c);
            for (std::size_t t = 0; t < trials; ++t) {
                auto res = run_trial(splits[t], feats, static_cast<std::size_t>(n),
                                     derive_seed(ctx.seed, {static_cast<std::uint64_t>(p),
                                                            static_cast<std::uint64_t>(n), t, 1}),
                                     params, ctx.jobs);
                cell.errors.push_back(res.eval.error_rate);
                cell.counts += res.eval.counts;
                if (t == 0)
                    save_model(writable(models / ("paradigm" + std::to_string(p) + "_n" + std::to_string(n) + ".besn")),
                               res.model);
            }
            curve << p << "," << n << "," << trials << "," << fmt(mean_of(cell.errors)) << ","
                  << fmt(std_of(cell.errors)) << "," << fmt(median_of(cell.errors)) << ","
                  << fmt(1.0 - 1.0 / static_cast<double>(c)) << "\n";

            auto conf = open_out(reports / "confusion" /
                                 ("paradigm" + std::to_string(p) + "_n" + std::to_string(n) + ".csv"));
            conf << ctx.header() << "\n";
            conf << "true";
            for (vowel v : classes)
                conf << "," << to_string(v);
            conf << ",samples\n";
            for (Eigen::Index i = 0; i < c; ++i) {
                const int row = cell.counts.row(i).sum();
                conf << to_string(classes[static_cast<std::size_t>(i)]);
                for (Eigen::Index j = 0; j < c; ++j)
                    conf << "," << fmt(row ? static_cast<double>(cell.counts(i, j)) / row : 0.0);
                conf << "," << row << "\n";
            }
            std::cout << "paradigm " << p << " N=" << n << " error " << fmt(mean_of(cell.errors)) << "\n";
        }
    }

    if (grid_trials > 0) {
        const auto bands = leave_out_bands();
        const auto splits = leave_out_splits(manifest, series);
        auto grid = open_out(reports / "leave_out_grid.csv");
        grid << ctx.header() << "\n";
        grid << "size";
        for (const auto& b : bands)
            grid << "," << b.name();
        grid << ",chance\n";
        for (auto n : sizes) {
            grid << n;
            for (std::size_t b = 0; b < splits.size(); ++b) {
                std::vector<double> errors;
                if (splits[b].indices(split_role::test).empty() || splits[b].indices(split_role::train).empty()) {
                    grid << ",";
                    continue;
                }
                for (std::size_t t = 0; t < grid_trials; ++t)
                    errors.push_back(run_trial(splits[b], feats, static_cast<std::size_t>(n),
                                               derive_seed(ctx.seed, {99, static_cast<std::uint64_t>(n), b, t}),
                                               params, ctx.jobs)
                                         .eval.error_rate);
                grid << "," << fmt(mean_of(errors));
            }
            grid << "," << fmt(5.0 / 6.0) << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- learn

imitation_options learner_options(const context& ctx)
{
    imitation_options o;
    o.mode = mode_of(ctx, "learn.mode");
    o.budget = ctx.cfg.unsigned_integer("learn.budget");
    o.cma.lambda = ctx.cfg.unsigned_integer("learn.lambda");
    o.cma.mu = ctx.cfg.unsigned_integer("learn.mu");
    o.cma.sigma0 = ctx.cfg.real("learn.sigma0");
    o.learned_threshold = ctx.cfg.real("learn.threshold");
    o.target_switching = ctx.cfg.boolean("learn.switching");
    o.weights.effort = ctx.cfg.real("learn.effort");
    o.weights.boundary = ctx.cfg.real("learn.boundary");
    o.clip_seconds = ctx.cfg.real("learn.clip_seconds");
    o.jobs = ctx.jobs;
    if (o.cma.lambda < 2 || o.cma.mu > o.cma.lambda || o.cma.sigma0 <= 0)
        throw config_invalid("CMA-ES parameters out of range");
    return o;
}

void write_history(const fs::path& p, const context& ctx, const imitation_run& run)
{
    auto out = open_out(p);
    out << ctx.header() << "\n";
    out << "generation,target,best_reward,best_confidence,sigma,switched_flag\n";
    char buf[160];
    for (const auto& h : run.history) {
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%d\n", h.generation,
                      std::string(to_string(h.target)).c_str(), h.best_reward, h.best_confidence, h.sigma,
                      h.switched ? 1 : 0);
        out << buf;
    }
}

int cmd_learn(const context& ctx)
{
    const auto series = load_series(ctx);
    const speaker& spk = find_speaker(series, ctx.cfg.text("learn.speaker"));
    const auto model_path = ctx.out_dir / ctx.cfg.text("learn.model");
    if (!fs::exists(model_path))
        throw format_error("model " + model_path.string() + " not found; run train first");
    const auto model = load_model(model_path);
    const auto targets = parse_vowels(ctx.cfg.text_list("learn.targets"), "learn.targets");
    const auto opts = learner_options(ctx);

    const auto run = run_imitation(model, spk, targets, opts, derive_seed(ctx.seed, {learner_tag}));

    const fs::path dir = ctx.path("paths.runs") / "learn";
    write_history(dir / "history.csv", ctx, run);

    nlohmann::json best;
    best["config_hash"] = ctx.cfg.hash();
    best["synth_version"] = synth_version_hash();
    best["speaker"] = spk.id();
    best["mode"] = std::string(to_string(run.mode));
    auto formants = open_out(dir / "learned_formants.csv");
    formants << ctx.header() << "\n";
    formants << "vowel,learned,generations,best_reward,best_confidence,max_confidence,f1,f2,prototype_f1,"
                "prototype_f2,valid\n";
    for (const auto& [v, r] : run.results) {
        const auto clip = synthesize_vowel(r.best_motor, spk, opts.clip_seconds);
        const auto f = extract_formants(clip, formant_options_for(spk, {}));
        const auto proto = spk.formants_of(v);
        formants << to_string(v) << "," << (r.learned ? 1 : 0) << "," << r.generations << ","
                 << fmt(r.best_reward) << "," << fmt(r.best_confidence) << "," << fmt(r.max_confidence) << ","
                 << fmt(f.f1) << "," << fmt(f.f2) << "," << fmt(proto.f1) << "," << fmt(proto.f2) << ","
                 << (f.valid ? 1 : 0) << "\n";
        nlohmann::json e;
        e["learned"] = r.learned;
        e["visited"] = r.visited;
        e["generations"] = r.generations;
        e["best_reward"] = r.best_reward;
        e["best_confidence"] = r.best_confidence;
        e["max_confidence"] = r.max_confidence;
        e["peak_confidence"] = r.peak_confidence;
        e["motor"] = r.best_motor.values;
        best["targets"][std::string(to_string(v))] = e;
        if (r.visited)
            write_wav(writable(dir / ("best_" + std::string(to_string(v)) + ".wav")), clip);
    }
    open_out(dir / "best_motors.json") << best.dump(2) << "\n";

    if (run.mode == learn_mode::guided13) {
        auto clamps = open_out(dir / "clamps.csv");
        clamps << ctx.header() << "\n";
        clamps << "target,articulator,value\n";
        for (const auto& [v, dims] : run.clamps)
            for (const auto& [i, value] : dims.clamped)
                clamps << to_string(v) << "," << articulator_names[i] << "," << fmt(value) << "\n";
    }

    std::cout << "learned " << run.learned_count() << "/" << run.results.size() << " targets in "
              << run.history.size() << " generations\n";
    return 0;
}

// ---------------------------------------------------------------- caregiver

int cmd_caregiver(const context& ctx)
{
    const auto series = load_series(ctx);
    const auto manifest = load_manifest(ctx, series);
    const auto feats = load_features(ctx, manifest, series);
    const auto params = esn_params_of(ctx);
    const speaker& infant_spk = find_speaker(series, ctx.cfg.text("caregiver.infant"));
    const speaker& adult = find_speaker(series, ctx.cfg.text("caregiver.adult"));
    const auto min_age = ctx.cfg.integer("caregiver.infant_min_age");

    caregiver_options co;
    co.generations = ctx.cfg.unsigned_integer("caregiver.generations");
    co.generation_size = ctx.cfg.unsigned_integer("caregiver.generation_size");
    co.imitations = ctx.cfg.unsigned_integer("caregiver.imitations");
    co.window_cap = ctx.cfg.unsigned_integer("caregiver.window_cap");
    co.presence = parse_presence(ctx.cfg.text("caregiver.schedule"));
    co.ridge = params.ridge;
    co.learner = learner_options(ctx);
    co.learner.mode = mode_of(ctx, "caregiver.mode");
    if (co.imitations > co.generation_size)
        throw config_invalid("caregiver.imitations exceeds caregiver.generation_size");
    const auto targets = parse_vowels(ctx.cfg.text_list("caregiver.targets"), "caregiver.targets");

    const auto classes = six_classes();
    std::vector<training_sample> core, everything, self_test;
    std::vector<std::size_t> core_ids;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        const auto& s = manifest.samples[i];
        const auto& spk = series[s.speaker_index];
        everything.push_back({&feats[i], s.label});
        if (spk.age >= min_age) {
            core.push_back({&feats[i], s.label});
            core_ids.push_back(s.id);
        }
        if (spk.id() == infant_spk.id() && s.intended != vowel::null)
            self_test.push_back({&feats[i], s.label});
    }
    if (core.empty())
        throw config_invalid("no ambient samples at or above caregiver.infant_min_age");
    if (self_test.empty())
        throw config_invalid("the infant speaker has no ambient samples to test on");

    const auto infant_reservoir = init_reservoir(params.size, derive_seed(ctx.seed, {caregiver_tag, 1}), params, classes);
    auto infant = make_infant_state(infant_reservoir, accumulate_readout(infant_reservoir, core, ctx.jobs), core_ids,
                                    co.window_cap, params.ridge);
    const auto caregiver_model =
        train_readout(init_reservoir(params.size, derive_seed(ctx.seed, {caregiver_tag, 2}), params, classes),
                      everything, params.ridge, ctx.jobs);
    save_model(writable(ctx.path("paths.models") / "infant.besn"), infant.model);
    save_model(writable(ctx.path("paths.models") / "caregiver.besn"), caregiver_model);

    const auto run = caregiver_loop(infant, caregiver_model, infant_spk, adult, self_test, targets, co,
                                    derive_seed(ctx.seed, {learner_tag}));

    const fs::path dir = ctx.path("paths.runs") / "caregiver";
    auto hist = open_out(dir / "history.csv");
    hist << ctx.header() << "\n";
    hist << "generation,caregiver_present,n_imitated,infant_self_error,best_reward,window_size\n";
    for (const auto& r : run.history)
        hist << r.generation << "," << (r.caregiver_present ? 1 : 0) << "," << r.n_imitated << ","
             << fmt(r.infant_self_error) << "," << fmt(r.best_reward) << "," << r.window_size << "\n";
    write_history(dir / "learn_history.csv", ctx, run.learning);

    auto pairs = open_out(dir / "pairings.csv");
    pairs << ctx.header() << "\n";
    pairs << "generation,offspring_index,caregiver_label,infant_label,adult_clip\n";
    for (const auto& e : run.imitated)
        pairs << e.generation << "," << e.offspring_index << "," << to_string(e.caregiver_label) << ","
              << to_string(e.label) << "," << e.adult_clip << "\n";

    const double final_error = run.history.empty() ? run.initial_self_error : run.history.back().infant_self_error;
    auto summary = open_out(dir / "summary.csv");
    summary << ctx.header() << "\n";
    summary << "initial_self_error,final_self_error,generations,imitations,learned\n";
    summary << fmt(run.initial_self_error) << "," << fmt(final_error) << "," << run.history.size() << ","
            << run.imitated.size() << "," << run.learning.learned_count() << "\n";

    std::cout << "infant self error " << fmt(run.initial_self_error) << " -> " << fmt(final_error) << " over "
              << run.history.size() << " generations\n";
    return 0;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const context& ctx, const std::string& wav)
{
    if (!wav.empty()) {
        const auto clip = read_wav(wav);
        const auto f = extract_formants(clip);
        std::cout << "duration," << fmt(clip.duration()) << "\nf1," << fmt(f.f1) << "\nf2," << fmt(f.f2)
                  << "\nvalid," << (f.valid ? 1 : 0) << "\n";
        return 0;
    }

    const auto series = load_series(ctx);
    const fs::path reports = ctx.path("paths.reports");

    auto protos = open_out(reports / "prototype_formants.csv");
    protos << ctx.header() << "\n";
    protos << "speaker,age,sex,vowel,f1,f2,objective\n";
    for (const auto& s : series)
        for (vowel v : prototype_vowels)
            if (s.prototype_formants.count(v))
                protos << s.id() << "," << s.age << "," << to_string(s.sex) << "," << to_string(v) << ","
                       << fmt(s.prototype_formants.at(v).f1) << "," << fmt(s.prototype_formants.at(v).f2) << ","
                       << fmt(s.residuals.count(v) ? s.residuals.at(v) : 0.0) << "\n";

    const fs::path best_path = ctx.path("paths.runs") / "learn" / "best_motors.json";
    if (!fs::exists(best_path) || !fs::exists(ctx.path("paths.manifest"))) {
        std::cout << "wrote prototype formants; no learner run to compare\n";
        return 0;
    }
    const auto manifest = load_manifest(ctx, series);
    std::ifstream in(best_path);
    const auto best = nlohmann::json::parse(in);
    const speaker& spk = find_speaker(series, best.at("speaker").get<std::string>());

    auto out = open_out(reports / "learned_vs_ambient.csv");
    out << ctx.header() << "\n";
    out << "vowel,learned,f1,f2,hull_points,inside_expanded_hull\n";
    for (const auto& [name, entry] : best.at("targets").items()) {
        const vowel v = *parse_vowel(name);
        std::vector<formant_pair> pts;
        for (const auto& s : manifest.samples)
            if (s.label == v && s.formants_valid)
                pts.push_back(s.formants);
        const auto hull = expand_polygon(convex_hull(pts), 0.2);
        motor_vector m;
        const auto values = entry.at("motor").get<std::vector<double>>();
        std::copy(values.begin(), values.end(), m.values.begin());
        const auto f = extract_formants(synthesize_vowel(m, spk, ctx.cfg.real("learn.clip_seconds")),
                                        formant_options_for(spk, {}));
        const bool inside = f.valid && polygon_contains(hull, {f.f1, f.f2});
        out << name << "," << (entry.at("learned").get<bool>() ? 1 : 0) << "," << fmt(f.f1) << "," << fmt(f.f2)
            << "," << pts.size() << "," << (inside ? 1 : 0) << "\n";
    }
    std::cout << "wrote " << (reports / "learned_vs_ambient.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Infant vowel acquisition simulator"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir = ".";
    std::int64_t seed = -1;
    int jobs = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_file, "key = value configuration file");
    app.add_option("--out-dir", out_dir, "root for every input and output path");
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--jobs", jobs, "worker threads (overrides the config)");
    app.add_option("--set", overrides, "key=value override, repeatable");

    auto* gen_speakers = app.add_subcommand("gen-speakers", "calibrate the speaker series");
    std::string ages, sex_filter;
    gen_speakers->add_option("--ages", ages, "comma-separated ages");
    gen_speakers->add_option("--sex", sex_filter, "male, female or both");
    auto* gen_ambient = app.add_subcommand("gen-ambient", "sample and label the ambient dataset");
    auto* train = app.add_subcommand("train", "reservoir size / paradigm sweeps and leave-out grid");
    auto* learn = app.add_subcommand("learn", "CMA-ES imitation learning");
    auto* caregiver = app.add_subcommand("caregiver", "imitation learning with caregiver feedback");
    auto* analyze = app.add_subcommand("analyze", "formant-space reports");
    std::string wav;
    analyze->add_option("--wav", wav, "print the formants of one WAV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    context ctx;
    try {
        ctx.cfg = config_file.empty() ? run_config{} : run_config::from_file(config_file);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw config_invalid("--set expects key=value, got '" + kv + "'");
            ctx.cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0)
            ctx.cfg.set("seed", std::to_string(seed));
        if (jobs > 0)
            ctx.cfg.set("jobs", std::to_string(jobs));
        if (!ages.empty())
            ctx.cfg.set("speakers.ages", ages);
        if (!sex_filter.empty())
            ctx.cfg.set("speakers.sex", sex_filter);
        ctx.out_dir = out_dir;
        ctx.seed = ctx.cfg.unsigned_integer("seed");
        ctx.jobs = static_cast<unsigned>(std::max<std::int64_t>(1, ctx.cfg.integer("jobs")));

        if (gen_speakers->parsed())
            return cmd_gen_speakers(ctx);
        if (gen_ambient->parsed())
            return cmd_gen_ambient(ctx);
        if (train->parsed())
            return cmd_train(ctx);
        if (learn->parsed())
            return cmd_learn(ctx);
        if (caregiver->parsed())
            return cmd_caregiver(ctx);
        if (analyze->parsed())
            return cmd_analyze(ctx, wav);
    } catch (const config_invalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
