#include "babbler/speakers.hpp"

#include "babbler/errors.hpp"
#include "babbler/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace babbler {

namespace {

// Monotone cubic Hermite (Fritsch-Carlson) through equally useful pitch anchors.
double pchip(std::span<const double> xs, std::span<const double> ys, double x)
{
    const std::size_t n = xs.size();
    if (x <= xs.front())
        return ys.front();
    if (x >= xs.back())
        return ys.back();

    std::vector<double> delta(n - 1), slope(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
        delta[k] = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    slope.front() = delta.front();
    slope.back() = delta.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) {
            slope[k] = 0.0;
        } else {
            const double h0 = xs[k] - xs[k - 1], h1 = xs[k + 1] - xs[k];
            const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
            slope[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }

    std::size_t k = 0;
    while (x > xs[k + 1])
        ++k;
    const double h = xs[k + 1] - xs[k];
    const double t = (x - xs[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ys[k] + (t3 - 2 * t2 + t) * h * slope[k] +
           (-2 * t3 + 3 * t2) * ys[k + 1] + (t3 - t2) * h * slope[k + 1];
}

constexpr std::array<double, 3> pitch_ages{0.0, 10.0, 20.0};
constexpr std::array<double, 3> male_pitch{450.0, 260.0, 125.0};
constexpr std::array<double, 3> female_pitch{450.0, 260.0, 210.0};

}  // namespace

std::vector<vowel_target> adult_reference_targets()
{
    return {{vowel::a, 730, 1090}, {vowel::e, 530, 1840}, {vowel::i, 270, 2290},
            {vowel::o, 570, 840},  {vowel::u, 300, 870}};
}

std::vector<vowel_target> scaled_targets(const speaker& spk, const std::vector<vowel_target>& adult)
{
    const double scale = 17.0 / spk.tract_length;
    std::vector<vowel_target> out = adult;
    for (auto& t : out) {
        t.f1 *= scale;
        t.f2 *= scale;
    }
    return out;
}

double speaker_f0(int age, sex s)
{
    return pchip(pitch_ages, s == sex::male ? male_pitch : female_pitch, static_cast<double>(age));
}

double speaker_tract_length(int age, sex s)
{
    const double adult = s == sex::male ? 17.0 : 15.0;
    const double t = std::clamp(static_cast<double>(age) / 20.0, 0.0, 1.0);
    return 8.0 + t * (adult - 8.0);
}

std::vector<speaker> make_speaker_series()
{
    std::vector<speaker> series;
    for (sex s : {sex::male, sex::female}) {
        for (int age = 0; age <= 20; age += 2) {
            speaker spk;
            spk.age = age;
            spk.sex = s;
            spk.f0 = speaker_f0(age, s);
            spk.tract_length = speaker_tract_length(age, s);
            series.push_back(std::move(spk));
        }
    }
    return series;
}

double calibration_objective(const motor_vector& m, const speaker& spk, const vowel_target& target,
                             const calibration_options& opts)
{
    const audio_clip clip = synthesize_vowel(m, spk, opts.clip_seconds);
    const formant_estimate est = extract_formants(clip, formant_options_for(spk, opts.formants));
    if (!est.valid)
        return 10.0;
    return formant_distance({est.f1, est.f2}, {target.f1, target.f2});
}

calibration_result calibrate_vowel(const speaker& spk, const vowel_target& target,
                                   const calibration_options& opts)
{
    calibration_result r;
    r.best = motor_vector::neutral();
    r.objective = calibration_objective(r.best, spk, target, opts);
    r.evaluations = 1;

    double step = opts.initial_step;
    while (r.evaluations < opts.budget && step >= opts.min_step) {
        bool improved = false;
        for (std::size_t d = 0; d < motor_dims && r.evaluations < opts.budget; ++d) {
            for (double dir : {+1.0, -1.0}) {
                if (r.evaluations >= opts.budget)
                    break;
                motor_vector trial = r.best;
                trial[d] = std::clamp(trial[d] + dir * step, 0.0, 1.0);
                if (trial[d] == r.best[d])
                    continue;
                const double j = calibration_objective(trial, spk, target, opts);
                ++r.evaluations;
                if (j < r.objective) {
                    r.objective = j;
                    r.best = trial;
                    improved = true;
                    // keep going while the same move pays off
                    while (r.evaluations < opts.budget) {
                        motor_vector next = r.best;
                        next[d] = std::clamp(next[d] + dir * step, 0.0, 1.0);
                        if (next[d] == r.best[d])
                            break;
                        const double jn = calibration_objective(next, spk, target, opts);
                        ++r.evaluations;
                        if (jn >= r.objective)
                            break;
                        r.objective = jn;
                        r.best = next;
                    }
                    break;
                }
            }
        }
        if (!improved)
            step *= 0.5;
    }
    return r;
}

speaker calibrate_prototypes_flagged(const speaker& spk, const std::vector<vowel_target>& targets,
                                     const calibration_options& opts, std::string* message)
{
    speaker out = spk;
    out.prototypes.clear();
    out.residuals.clear();
    out.prototypes[vowel::schwa] = motor_vector::neutral();
    out.residuals[vowel::schwa] = 0.0;

    std::string failures;
    for (vowel v : core_vowels) {
        auto it = std::find_if(targets.begin(), targets.end(), [v](const auto& t) { return t.v == v; });
        if (it == targets.end())
            throw calibration_failed("no calibration target for /" + std::string(to_string(v)) + "/");
        const calibration_result r = calibrate_vowel(spk, *it, opts);
        out.prototypes[v] = r.best;
        out.residuals[v] = r.objective;
        if (r.objective > opts.max_objective)
            failures += " /" + std::string(to_string(v)) + "/ J=" + std::to_string(r.objective);
    }
    record_prototype_formants(out, opts.prototype_seconds, opts.formants);
    out.calibration_ok = failures.empty();
    if (message)
        *message = failures.empty() ? std::string{} : "speaker " + spk.id() + ":" + failures;
    return out;
}

speaker calibrate_prototypes(const speaker& spk, const std::vector<vowel_target>& targets,
                             const calibration_options& opts)
{
    std::string message;
    speaker out = calibrate_prototypes_flagged(spk, targets, opts, &message);
    if (!out.calibration_ok)
        throw calibration_failed(message);
    return out;
}

void record_prototype_formants(speaker& spk, double seconds, const formant_options& opts)
{
    spk.prototype_formants.clear();
    for (const auto& [v, m] : spk.prototypes) {
        const formant_estimate est =
            extract_formants(synthesize_vowel(m, spk, seconds), formant_options_for(spk, opts));
        if (est.valid)
            spk.prototype_formants[v] = {est.f1, est.f2};
    }
}

std::string age_band::name() const { return std::to_string(lo) + "-" + std::to_string(hi); }

std::vector<age_band> leave_out_bands() { return {{0, 2}, {4, 6}, {8, 10}, {12, 14}, {16, 20}}; }

using nlohmann::json;

std::string speaker_to_json(const speaker& spk, const std::string& config_hash)
{
    json j;
    j["id"] = spk.id();
    j["age"] = spk.age;
    j["sex"] = std::string(to_string(spk.sex));
    j["f0"] = spk.f0;
    j["tract_length"] = spk.tract_length;
    j["calibration_ok"] = spk.calibration_ok;
    json protos = json::object(), resid = json::object(), forms = json::object();
    for (const auto& [v, m] : spk.prototypes)
        protos[std::string(to_string(v))] = m.values;
    for (const auto& [v, r] : spk.residuals)
        resid[std::string(to_string(v))] = r;
    for (const auto& [v, f] : spk.prototype_formants)
        forms[std::string(to_string(v))] = {f.f1, f.f2};
    j["prototypes"] = protos;
    j["residuals"] = resid;
    j["prototype_formants"] = forms;
    j["synth_version"] = synth_version_hash();
    j["config_hash"] = config_hash;
    return j.dump();
}

speaker speaker_from_json(const std::string& line)
{
    const json j = json::parse(line);
    if (j.value("synth_version", std::uint64_t{0}) != synth_version_hash())
        throw format_error("speaker record was calibrated with a different synthesizer version");
    speaker spk;
    spk.age = j.at("age").get<int>();
    spk.sex = j.at("sex").get<std::string>() == "male" ? sex::male : sex::female;
    spk.f0 = j.at("f0").get<double>();
    spk.tract_length = j.at("tract_length").get<double>();
    spk.calibration_ok = j.value("calibration_ok", false);
    auto key = [](const std::string& k) {
        auto v = parse_vowel(k);
        if (!v)
            throw format_error("unknown vowel key " + k);
        return *v;
    };
    for (const auto& [k, val] : j.at("prototypes").items()) {
        motor_vector m;
        m.values = val.get<std::array<double, motor_dims>>();
        spk.prototypes[key(k)] = m;
    }
    for (const auto& [k, val] : j.at("residuals").items())
        spk.residuals[key(k)] = val.get<double>();
    for (const auto& [k, val] : j.at("prototype_formants").items())
        spk.prototype_formants[key(k)] = {val.at(0).get<double>(), val.at(1).get<double>()};
    return spk;
}

void write_speaker_series(const std::filesystem::path& path, const std::vector<speaker>& series,
                          const std::string& config_hash)
{
    std::ofstream os(path);
    if (!os)
        throw format_error("cannot write " + path.string());
    for (const auto& spk : series)
        os << speaker_to_json(spk, config_hash) << '\n';
}

std::vector<speaker> read_speaker_series(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw format_error("cannot read " + path.string());
    std::vector<speaker> out;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty())
            out.push_back(speaker_from_json(line));
    return out;
}

}  // namespace babbler
