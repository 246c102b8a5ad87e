// Acceptance run: one PASS/FAIL line per criterion. Expensive fixtures (the
// calibrated speaker series, the ambient dataset and its features) are cached
// under --cache so repeated runs only pay for the experiments.

#include "babbler/ambient.hpp"
#include "babbler/auditory.hpp"
#include "babbler/caregiver.hpp"
#include "babbler/cma.hpp"
#include "babbler/errors.hpp"
#include "babbler/esn.hpp"
#include "babbler/learner.hpp"
#include "babbler/parallel.hpp"
#include "babbler/pipeline.hpp"
#include "babbler/speakers.hpp"
#include "babbler/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

using namespace babbler;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t base_seed = 20240;
constexpr std::uint64_t dataset_seed = 7;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds)
{
    if (!pass)
        ++failures;
    std::printf("%s %d  %s  (%.1fs)\n", pass ? "PASS" : "FAIL", criterion, detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------- fixtures

std::vector<speaker> calibrated_series(const fs::path& cache, unsigned jobs)
{
    const fs::path path = cache / "speakers.jsonl";
    if (fs::exists(path)) {
        try {
            auto series = read_speaker_series(path);
            if (series.size() == 22)
                return series;
        } catch (const format_error&) {
        }
    }
    auto series = make_speaker_series();
    parallel_for(series.size(), jobs, [&](std::size_t i) {
        series[i] = calibrate_prototypes_flagged(series[i], scaled_targets(series[i]));
    });
    write_speaker_series(path, series, "acceptance");
    return series;
}

dataset_manifest ambient_dataset(const fs::path& cache, const std::vector<speaker>& series, unsigned jobs)
{
    const fs::path path = cache / "manifest.jsonl";
    if (fs::exists(path)) {
        try {
            return read_manifest(path, series);
        } catch (const format_error&) {
        }
    }
    ambient_options opts;
    opts.jobs = jobs;
    auto m = generate_dataset(series, dataset_seed, opts);
    assign_clip_paths(m, series);
    write_manifest(path, m, series, "acceptance");
    return read_manifest(path, series);
}

double tube_f1(double length)
{
    const auto clip = synthesize_area(uniform_tube(length), 100.0, 0.5);
    formant_options o;
    o.analysis_rate = std::min(output_rate, 10000.0 * 17.5 / length);
    return aggregate_formants(frame_formants(clip, o), 3, o.analysis_rate / 2).f1;
}

audio_clip two_resonances(double f1, double f2)
{
    const double rate = output_rate;
    const auto n = static_cast<std::size_t>(0.5 * rate);
    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < n; k += static_cast<std::size_t>(rate / 100.0))
        x[k] = 1.0;
    for (auto [f, bw] : {std::pair{f1, 60.0}, std::pair{f2, 90.0}}) {
        const double r = std::exp(-M_PI * bw / rate);
        const double c1 = 2.0 * r * std::cos(2.0 * M_PI * f / rate);
        std::vector<double> y(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            y[k] = x[k] + (k >= 1 ? c1 * y[k - 1] : 0.0) - (k >= 2 ? r * r * y[k - 2] : 0.0);
        x = y;
    }
    const double peak = std::abs(*std::max_element(x.begin(), x.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    audio_clip c;
    for (double v : x)
        c.samples.push_back(0.9 * v / peak);
    return c;
}

// ---------------------------------------------------------------- criteria

void criterion_1()
{
    const auto t0 = clock_type::now();
    const double oracle = tract::sound_speed / (4.0 * 17.5);
    const double f1 = tube_f1(17.5);
    const double half = tube_f1(8.75);
    const double err = std::abs(f1 - oracle) / oracle;
    const double ratio = half / f1;
    const double s = seconds_since(t0);
    report(1, err < 0.07 && std::abs(ratio - 2.0) / 2.0 < 0.10 && s < 5.0,
           "uniform tube F1 " + fmt("%.1f", f1) + " Hz vs " + fmt("%.0f", oracle) + " (" + fmt("%.1f", 100 * err) +
               "%), halved length ratio " + fmt("%.3f", ratio),
           s);
}

void criterion_2()
{
    const auto t0 = clock_type::now();
    const auto est = extract_formants(two_resonances(500.0, 1500.0));
    const double e1 = std::abs(est.f1 - 500.0) / 500.0, e2 = std::abs(est.f2 - 1500.0) / 1500.0;
    const double s = seconds_since(t0);
    report(2, est.valid && e1 < 0.05 && e2 < 0.05 && s < 5.0,
           "two-resonance signal F1 " + fmt("%.1f", est.f1) + " F2 " + fmt("%.1f", est.f2), s);
}

void criterion_3()
{
    const auto t0 = clock_type::now();
    rng gen(derive_seed(base_seed, {3}));
    std::normal_distribution<double> n(0.0, 10.0);
    double worst_sum = 0.0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> a(6);
        for (double& v : a)
            v = n(gen);
        const auto p = softmax(a);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    }
    const auto model = init_reservoir(100, derive_seed(base_seed, {3, 1}));
    const double rho = spectral_radius_of(model.w);

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd xa(100), xb(100);
    for (Eigen::Index i = 0; i < 100; ++i) {
        xa(i) = u(gen);
        xb(i) = u(gen);
    }
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(200, 50);
    const auto sa = run_reservoir(model, zero, xa);
    const auto sb = run_reservoir(model, zero, xb);
    const double contraction = (sa.row(199) - sb.row(199)).norm() / (xa - xb).norm();
    report(3, worst_sum < 1e-9 && std::abs(rho - 0.9) <= 1e-6 && contraction < 1e-3,
           "softmax sum error " + fmt("%.1e", worst_sum) + ", rho " + fmt("%.9f", rho) + ", contraction " +
               fmt("%.2e", contraction),
           seconds_since(t0));
}

struct trained_models {
    std::optional<esn_model> paradigm3_n100;
};

void criterion_4(const dataset_manifest& m, const std::vector<speaker>& series, const std::vector<feature_stream>& f,
                 unsigned jobs, trained_models& keep)
{
    const auto t0 = clock_type::now();
    constexpr int seeds = 10;
    const std::vector<std::size_t> sizes{1, 10, 50, 100};
    std::map<std::size_t, std::vector<double>> errors;
    for (int s = 0; s < seeds; ++s) {
        const auto split = make_split(m, series, 3, derive_seed(base_seed, {4, static_cast<std::uint64_t>(s)}));
        for (std::size_t n : sizes) {
            auto t = run_trial(split, f, n, derive_seed(base_seed, {4, static_cast<std::uint64_t>(s), n}), {}, jobs);
            errors[n].push_back(t.eval.error_rate);
            if (n == 100 && s == 0)
                keep.paradigm3_n100 = std::move(t.model);
        }
    }
    bool monotone = true;
    std::string detail = "median error";
    double prev = 1.0;
    for (std::size_t n : sizes) {
        const double med = median(errors[n]);
        monotone = monotone && med <= prev;
        prev = med;
        detail += " N=" + std::to_string(n) + " " + fmt("%.3f", med);
    }
    const double at100 = median(errors[100]);
    detail += " (chance " + fmt("%.3f", 5.0 / 6.0) + ")";
    report(4, monotone && at100 <= 0.25, detail, seconds_since(t0));
}

void criterion_5(const dataset_manifest& m, const std::vector<speaker>& series, const std::vector<feature_stream>& f,
                 unsigned jobs)
{
    const auto t0 = clock_type::now();
    const auto splits = leave_out_splits(m, series);
    const auto bands = leave_out_bands();
    std::vector<double> band_mean;
    std::string detail = "mean leave-out error";
    for (std::size_t b = 0; b < splits.size(); ++b) {
        std::vector<double> e;
        for (std::uint64_t t = 0; t < 10; ++t)
            e.push_back(run_trial(splits[b], f, 100, derive_seed(base_seed, {5, b, t}), {}, jobs).eval.error_rate);
        band_mean.push_back(mean(e));
        detail += " " + bands[b].name() + ":" + fmt("%.3f", band_mean.back());
    }
    report(5, band_mean[2] < band_mean[0], detail, seconds_since(t0));
}

void criterion_6()
{
    const auto t0 = clock_type::now();
    std::vector<double> gens;
    for (std::uint64_t s = 0; s < 10; ++s) {
        rng gen(derive_seed(base_seed, {6, s}));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::VectorXd target(16);
        for (auto& v : target)
            v = u(gen);
        cma_state state(Eigen::VectorXd::Constant(16, 0.5));
        std::size_t g = 0;
        while (g < 1000 && (state.mean() - target).norm() >= 1e-3) {
            const auto xs = state.sample(gen);
            std::vector<double> r;
            for (const auto& x : xs)
                r.push_back(-(x - target).squaredNorm());
            state.update(xs, r);
            ++g;
        }
        gens.push_back(static_cast<double>(g));
    }
    const double med = median(gens);
    report(6, med <= 300.0,
           "16-d sphere median generations to 1e-3: " + fmt("%.1f", med) + " (max " +
               fmt("%.0f", *std::max_element(gens.begin(), gens.end())) + ")",
           seconds_since(t0));
}

void criterion_7(const std::vector<speaker>& series, const esn_model& model, unsigned jobs)
{
    const auto t0 = clock_type::now();
    const speaker& adult = find_speaker(series, "m20");
    imitation_options o;
    o.mode = learn_mode::guided13;
    o.budget = 1000;
    o.jobs = jobs;
    const std::vector<vowel> targets(core_vowels.begin(), core_vowels.end());
    std::vector<double> reached;
    std::string detail;
    std::map<vowel, double> best, peak;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto run = run_imitation(model, adult, targets, o, derive_seed(base_seed, {7, s}));
        reached.push_back(static_cast<double>(run.reached_count(0.5)));
        for (const auto& [v, r] : run.results) {
            best[v] = std::max(best[v], r.max_confidence);
            peak[v] = std::max(peak[v], r.peak_confidence);
        }
    }
    const double med = median(reached);
    detail = "vowels reaching confidence 0.5, median of 5 seeds: " + fmt("%.0f", med) + "/5; peak while active";
    for (const auto& [v, c] : best)
        detail += " " + std::string(to_string(v)) + ":" + fmt("%.3f", c);
    detail += "; peak in any generation";
    for (const auto& [v, c] : peak)
        detail += " " + std::string(to_string(v)) + ":" + fmt("%.3f", c);
    report(7, med >= 3.0, detail, seconds_since(t0));
}

void criterion_8(const dataset_manifest& m, const std::vector<speaker>& series, const std::vector<feature_stream>& f,
                 unsigned jobs)
{
    const auto t0 = clock_type::now();
    const speaker& infant_spk = find_speaker(series, "m00");
    const speaker& adult = find_speaker(series, "m20");
    std::vector<training_sample> core, all, self_test;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
        const auto& s = m.samples[i];
        all.push_back({&f[i], s.label});
        if (series[s.speaker_index].age >= 4) {
            core.push_back({&f[i], s.label});
            ids.push_back(s.id);
        }
        if (series[s.speaker_index].id() == infant_spk.id() && s.intended != vowel::null)
            self_test.push_back({&f[i], s.label});
    }
    caregiver_options co;
    co.generations = 50;
    co.generation_size = 50;
    co.imitations = 5;
    co.learner.jobs = jobs;
    const std::vector<vowel> targets(core_vowels.begin(), core_vowels.end());

    std::vector<double> initial, final;
    bool identical = true;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto reservoir = init_reservoir(100, derive_seed(base_seed, {8, s, 1}));
        const auto infant = make_infant_state(reservoir, accumulate_readout(reservoir, core, jobs), ids);
        const auto caregiver = train_readout(init_reservoir(100, derive_seed(base_seed, {8, s, 2})), all, 1e-4, jobs);
        const std::uint64_t seed = derive_seed(base_seed, {8, s, 3});
        const auto run = caregiver_loop(infant, caregiver, infant_spk, adult, self_test, targets, co, seed);
        initial.push_back(run.initial_self_error);
        final.push_back(run.history.empty() ? run.initial_self_error : run.history.back().infant_self_error);

        if (s == 0) {
            auto off = co;
            off.presence = {false};
            const auto silent = caregiver_loop(infant, caregiver, infant_spk, adult, self_test, targets, off, seed);
            const auto plain = run_imitation(infant.model, infant_spk, targets, effective_learner_options(off), seed);
            identical = silent.learning.history.size() == plain.history.size();
            for (std::size_t g = 0; identical && g < plain.history.size(); ++g) {
                const auto& a = silent.learning.history[g];
                const auto& b = plain.history[g];
                identical = a.target == b.target && a.best_reward == b.best_reward &&
                            a.best_confidence == b.best_confidence && a.sigma == b.sigma && a.switched == b.switched;
            }
            for (const auto& [v, r] : plain.results)
                identical = identical && silent.learning.results.at(v).best_motor == r.best_motor;
        }
    }
    const double mi = median(initial), mf = median(final);
    std::vector<double> delta;
    for (std::size_t k = 0; k < initial.size(); ++k)
        delta.push_back(final[k] - initial[k]);
    const double md = median(delta);
    report(8, mf < mi && md < 0.0 && identical,
           "infant self error median " + fmt("%.3f", mi) + " -> " + fmt("%.3f", mf) + " (median change " +
               fmt("%+.3f", md) + "); caregiver-off run " + (identical ? "bit-identical" : "DIFFERS") +
               " to plain imitation",
           seconds_since(t0));
}

void criterion_9(const dataset_manifest& m, const std::vector<speaker>& series)
{
    const auto t0 = clock_type::now();
    bool ok = series.size() == 22;
    std::size_t calibrated = 0;
    for (const auto& s : series)
        calibrated += s.calibration_ok;
    ok = ok && calibrated == 22;

    std::map<std::pair<std::size_t, vowel>, int> cells;
    std::size_t vowel_samples = 0;
    for (const auto& s : m.samples)
        if (s.intended != vowel::null) {
            ++cells[{s.speaker_index, s.intended}];
            ++vowel_samples;
        }
    for (std::size_t sp = 0; sp < series.size(); ++sp)
        for (vowel v : core_vowels)
            ok = ok && cells[{sp, v}] == 16;
    ok = ok && vowel_samples == 1760;

    bool disjoint = true, stratified = true;
    auto check = [&](const dataset_manifest& split, bool ratio) {
        const auto train = split.indices(split_role::train);
        const auto test = split.indices(split_role::test);
        const std::set<std::size_t> tr(train.begin(), train.end());
        for (std::size_t i : test)
            disjoint = disjoint && tr.count(i) == 0;
        if (!ratio)
            return;
        std::map<vowel, std::pair<int, int>> per;
        for (std::size_t i : train)
            ++per[m.samples[i].label].first;
        for (std::size_t i : test)
            ++per[m.samples[i].label].second;
        for (const auto& [label, c] : per)
            stratified = stratified && c.first == static_cast<int>(std::llround(0.8 * (c.first + c.second)));
    };
    for (int p = 1; p <= 4; ++p)
        for (std::uint64_t s = 0; s < 3; ++s)
            check(make_split(m, series, p, s), p <= 3);
    for (const auto& split : leave_out_splits(m, series))
        check(split, false);

    report(9, ok && disjoint && stratified,
           std::to_string(series.size()) + " speakers (" + std::to_string(calibrated) + " calibrated), " +
               std::to_string(vowel_samples) + " vowel samples, splits " + (disjoint ? "disjoint" : "LEAK") +
               ", 80/20 stratification " + (stratified ? "exact" : "off"),
           seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string cache = "acceptance_cache";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--cache", cache, "directory for calibrated speakers, dataset and features");
    app.add_option("--jobs", jobs, "worker threads");
    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path dir(cache);
        fs::create_directories(dir / "features");

        criterion_1();
        criterion_2();
        criterion_3();

        const auto t0 = clock_type::now();
        const auto series = calibrated_series(dir, jobs);
        const auto manifest = ambient_dataset(dir, series, jobs);
        const auto feats = dataset_features(manifest, series, 0.5, jobs, dir / "features");
        std::printf("fixtures ready: %zu speakers, %zu samples (%.1fs)\n", series.size(), manifest.samples.size(),
                    seconds_since(t0));
        std::fflush(stdout);

        trained_models models;
        criterion_4(manifest, series, feats, jobs, models);
        criterion_5(manifest, series, feats, jobs);
        criterion_6();
        criterion_7(series, *models.paradigm3_n100, jobs);
        criterion_8(manifest, series, feats, jobs);
        criterion_9(manifest, series);
    } catch (const std::exception& e) {
        std::printf("FAIL  acceptance run aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
