#include "babbler/ambient.hpp"

#include "babbler/errors.hpp"
#include "babbler/parallel.hpp"
#include "babbler/random.hpp"
#include "babbler/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace babbler {

std::string_view to_string(split_role r)
{
    switch (r) {
    case split_role::train: return "train";
    case split_role::test: return "test";
    case split_role::unused: break;
    }
    return "unused";
}

std::vector<std::size_t> dataset_manifest::indices(split_role role) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles.size(); ++i)
        if (roles[i] == role)
            out.push_back(i);
    return out;
}

std::pair<vowel, double> nearest_prototype(const formant_pair& f, const speaker& spk)
{
    vowel best = vowel::null;
    double best_d = std::numeric_limits<double>::infinity();
    for (vowel v : core_vowels) {
        const double d = formant_distance(f, spk.formants_of(v));
        if (d < best_d) {
            best_d = d;
            best = v;
        }
    }
    return {best, best_d};
}

namespace {

struct heard {
    vowel label = vowel::null;
    formant_estimate formants;
};

heard listen(const audio_clip& clip, const speaker& spk, double tau_in)
{
    heard h;
    if (clip.empty() || clip.silent())
        return h;
    h.formants = extract_formants(clip, formant_options_for(spk));
    if (!h.formants.valid)
        return h;
    const auto [v, d] = nearest_prototype({h.formants.f1, h.formants.f2}, spk);
    if (d <= tau_in)
        h.label = v;
    return h;
}

labeled_sample make_sample(std::size_t speaker_index, const motor_vector& m, const heard& h,
                           vowel intended, double sigma)
{
    labeled_sample s;
    s.speaker_index = speaker_index;
    s.motor = m;
    s.label = h.label;
    s.intended = intended;
    s.sigma = sigma;
    s.formants_valid = h.formants.valid;
    if (h.formants.valid)
        s.formants = {h.formants.f1, h.formants.f2};
    return s;
}

motor_vector gaussian_draw(const motor_vector& center, double sigma, rng& gen)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    motor_vector m = center;
    for (double& v : m.values)
        v += sigma * normal(gen);
    return m;
}

std::vector<labeled_sample> vowel_cell(const speaker& spk, std::size_t speaker_index, vowel v,
                                       std::uint64_t seed, const ambient_options& opts)
{
    rng gen(seed);
    const motor_vector& proto = spk.prototype(v);
    const formant_pair& reference = spk.formants_of(v);

    std::vector<labeled_sample> kept;
    std::vector<std::pair<double, labeled_sample>> rejected;
    for (int draw = 0; draw < opts.max_draws && static_cast<int>(kept.size()) < opts.per_class; ++draw) {
        const motor_vector m = gaussian_draw(proto, opts.sigma_in, gen);
        const heard h = listen(synthesize_vowel(m, spk, opts.clip_seconds), spk, opts.tau_in);
        labeled_sample s = make_sample(speaker_index, m, h, v, opts.sigma_in);
        if (h.label == v) {
            kept.push_back(std::move(s));
        } else {
            const double score = h.formants.valid
                                     ? formant_distance({h.formants.f1, h.formants.f2}, reference)
                                     : std::numeric_limits<double>::infinity();
            rejected.emplace_back(score, std::move(s));
        }
    }
    if (static_cast<int>(kept.size()) < opts.per_class) {
        std::stable_sort(rejected.begin(), rejected.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [score, s] : rejected) {
            if (static_cast<int>(kept.size()) >= opts.per_class)
                break;
            s.label = v;
            s.filled = true;
            kept.push_back(std::move(s));
        }
    }
    return kept;
}

std::vector<labeled_sample> null_cell(const speaker& spk, std::size_t speaker_index, std::uint64_t seed,
                                      const ambient_options& opts)
{
    rng gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, prototype_vowels.size() - 1);
    std::vector<labeled_sample> out;
    for (int k = 0; k < opts.nulls; ++k) {
        const motor_vector& center = spk.prototype(prototype_vowels[pick(gen)]);
        const motor_vector m = gaussian_draw(center, opts.sigma_null, gen);
        const heard h = listen(synthesize_vowel(m, spk, opts.clip_seconds), spk, opts.tau_in);
        out.push_back(make_sample(speaker_index, m, h, vowel::null, opts.sigma_null));
    }
    return out;
}

}  // namespace

vowel label_sample(const audio_clip& clip, const speaker& spk, double tau_in)
{
    return listen(clip, spk, tau_in).label;
}

dataset_manifest generate_dataset(const std::vector<speaker>& series, std::uint64_t seed,
                                  const ambient_options& opts)
{
    std::vector<std::size_t> active;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const speaker& spk = series[s];
        if (!spk.calibrated())
            throw uncalibrated_speaker("speaker " + spk.id() + " has not been calibrated");
        for (vowel v : core_vowels)
            spk.formants_of(v);
        if (spk.calibration_ok)
            active.push_back(s);
    }

    constexpr std::size_t cells_per_speaker = core_vowels.size() + 1;
    std::vector<std::vector<labeled_sample>> cells(active.size() * cells_per_speaker);
    parallel_for(cells.size(), opts.jobs, [&](std::size_t c) {
        const std::size_t s = active[c / cells_per_speaker];
        const std::size_t k = c % cells_per_speaker;
        const std::uint64_t cell_seed = derive_seed(seed, {s, k});
        cells[c] = k < core_vowels.size() ? vowel_cell(series[s], s, core_vowels[k], cell_seed, opts)
                                          : null_cell(series[s], s, cell_seed, opts);
    });

    dataset_manifest m;
    m.seed = seed;
    for (auto& cell : cells)
        for (auto& sample : cell) {
            sample.id = m.samples.size();
            m.samples.push_back(std::move(sample));
        }
    return m;
}

namespace {

void stratified(dataset_manifest& out, const std::vector<std::size_t>& pool, std::uint64_t seed)
{
    std::map<vowel, std::vector<std::size_t>> strata;
    for (std::size_t i : pool)
        strata[out.samples[i].label].push_back(i);
    for (auto& [label, members] : strata) {
        rng gen(derive_seed(seed, {static_cast<std::uint64_t>(label)}));
        std::shuffle(members.begin(), members.end(), gen);
        const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(members.size())));
        for (std::size_t j = 0; j < members.size(); ++j)
            out.roles[members[j]] = j < n_train ? split_role::train : split_role::test;
    }
}

bool in_classes(const std::vector<vowel>& classes, vowel v)
{
    return std::find(classes.begin(), classes.end(), v) != classes.end();
}

}  // namespace

dataset_manifest make_split(const dataset_manifest& manifest, const std::vector<speaker>& series,
                            int paradigm, std::uint64_t seed)
{
    if (paradigm < 1 || paradigm > 4)
        throw unknown_paradigm("unknown training paradigm " + std::to_string(paradigm));

    dataset_manifest out = manifest;
    out.paradigm = paradigm;
    out.seed = seed;
    out.roles.assign(out.samples.size(), split_role::unused);
    out.classes = paradigm <= 2 ? four_classes() : six_classes();

    if (paradigm == 4) {
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            out.roles[i] = series.at(out.samples[i].speaker_index).age >= 4 ? split_role::train
                                                                            : split_role::test;
        return out;
    }

    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const labeled_sample& s = out.samples[i];
        const speaker& spk = series.at(s.speaker_index);
        if (paradigm == 1 && !(spk.sex == sex::male && (spk.age == 0 || spk.age == 20)))
            continue;
        if (!in_classes(out.classes, s.label))
            continue;
        pool.push_back(i);
    }
    stratified(out, pool, derive_seed(seed, {static_cast<std::uint64_t>(paradigm)}));
    return out;
}

std::vector<dataset_manifest> leave_out_splits(const dataset_manifest& manifest,
                                               const std::vector<speaker>& series)
{
    std::vector<dataset_manifest> out;
    for (const age_band& band : leave_out_bands()) {
        dataset_manifest m = manifest;
        m.paradigm = 0;
        m.classes = six_classes();
        m.roles.assign(m.samples.size(), split_role::train);
        for (std::size_t i = 0; i < m.samples.size(); ++i)
            if (band.contains(series.at(m.samples[i].speaker_index).age))
                m.roles[i] = split_role::test;
        out.push_back(std::move(m));
    }
    return out;
}

void assign_clip_paths(dataset_manifest& manifest, const std::vector<speaker>& series)
{
    std::map<std::pair<std::size_t, vowel>, int> counters;
    for (auto& s : manifest.samples) {
        const int n = counters[{s.speaker_index, s.label}]++;
        s.clip_path = "data/ambient/" + series.at(s.speaker_index).id() + "/" +
                      std::string(to_string(s.label)) + "/" + std::to_string(n) + ".wav";
    }
}

using nlohmann::json;

std::string sample_to_json(const labeled_sample& s, const std::vector<speaker>& series,
                           const std::string& config_hash)
{
    json j;
    j["id"] = s.id;
    j["speaker_id"] = series.at(s.speaker_index).id();
    j["motor"] = s.motor.values;
    j["clip_path"] = s.clip_path;
    j["label"] = std::string(to_string(s.label));
    j["intended"] = std::string(to_string(s.intended));
    j["sigma_used"] = s.sigma;
    j["formants"] = {s.formants.f1, s.formants.f2};
    j["formants_valid"] = s.formants_valid;
    j["filled"] = s.filled;
    j["config_hash"] = config_hash;
    return j.dump();
}

void write_manifest(const std::filesystem::path& path, const dataset_manifest& m,
                    const std::vector<speaker>& series, const std::string& config_hash)
{
    std::ofstream os(path);
    if (!os)
        throw format_error("cannot write " + path.string());
    for (const auto& s : m.samples)
        os << sample_to_json(s, series, config_hash) << '\n';
}

dataset_manifest read_manifest(const std::filesystem::path& path, const std::vector<speaker>& series)
{
    std::ifstream is(path);
    if (!is)
        throw format_error("cannot read " + path.string());
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < series.size(); ++i)
        by_id[series[i].id()] = i;

    dataset_manifest m;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const json j = json::parse(line);
        labeled_sample s;
        s.id = j.at("id").get<std::size_t>();
        auto it = by_id.find(j.at("speaker_id").get<std::string>());
        if (it == by_id.end())
            throw format_error("manifest references unknown speaker " + j.at("speaker_id").get<std::string>());
        s.speaker_index = it->second;
        s.motor.values = j.at("motor").get<std::array<double, motor_dims>>();
        s.clip_path = j.value("clip_path", std::string{});
        s.label = parse_vowel(j.at("label").get<std::string>()).value_or(vowel::null);
        s.intended = parse_vowel(j.value("intended", std::string{"null"})).value_or(vowel::null);
        s.sigma = j.at("sigma_used").get<double>();
        s.formants = {j.at("formants").at(0).get<double>(), j.at("formants").at(1).get<double>()};
        s.formants_valid = j.value("formants_valid", false);
        s.filled = j.value("filled", false);
        m.samples.push_back(std::move(s));
    }
    return m;
}

void write_split_csv(const std::filesystem::path& path, const dataset_manifest& m, const std::string& header)
{
    std::ofstream os(path);
    if (!os)
        throw format_error("cannot write " + path.string());
    if (!header.empty())
        os << header << '\n';
    os << "sample_id,role\n";
    for (std::size_t i = 0; i < m.samples.size(); ++i)
        os << m.samples[i].id << ',' << to_string(m.roles.at(i)) << '\n';
}

}  // namespace babbler
