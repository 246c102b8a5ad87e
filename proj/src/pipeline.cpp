#include "babbler/pipeline.hpp"

#include "babbler/errors.hpp"
#include "babbler/parallel.hpp"
#include "babbler/synth.hpp"

#include <cstdio>
#include <cstring>

namespace babbler {

const speaker& find_speaker(const std::vector<speaker>& series, const std::string& id)
{
    for (const auto& s : series)
        if (s.id() == id)
            return s;
    throw config_invalid("speaker " + id + " is not in the series");
}

namespace {

std::string cache_key(const labeled_sample& s, const speaker& spk, double clip_seconds)
{
    std::uint64_t h = 0xcbf29ce484222325ULL ^ synth_version_hash();
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(s.motor.values.data(), sizeof(double) * s.motor.values.size());
    const std::string id = spk.id();
    mix(id.data(), id.size());
    mix(&spk.f0, sizeof spk.f0);
    mix(&spk.tract_length, sizeof spk.tract_length);
    mix(&clip_seconds, sizeof clip_seconds);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::vector<feature_stream> dataset_features(const dataset_manifest& manifest, const std::vector<speaker>& series,
                                             double clip_seconds, unsigned jobs,
                                             const std::optional<std::filesystem::path>& cache_dir)
{
    if (cache_dir)
        std::filesystem::create_directories(*cache_dir);
    std::vector<feature_stream> out(manifest.samples.size());
    parallel_for(out.size(), jobs, [&](std::size_t i) {
        const auto& s = manifest.samples[i];
        const speaker& spk = series.at(s.speaker_index);
        std::filesystem::path file;
        if (cache_dir) {
            file = *cache_dir / (std::to_string(s.id) + "-" + cache_key(s, spk, clip_seconds) + ".feat");
            if (std::filesystem::exists(file)) {
                out[i] = read_feature_cache(file);
                return;
            }
        }
        out[i] = filterbank_features(synthesize_vowel(s.motor, spk, clip_seconds));
        if (cache_dir)
            write_feature_cache(file, out[i]);
    });
    return out;
}

std::vector<training_sample> samples_in_role(const dataset_manifest& split, const std::vector<feature_stream>& feats,
                                             split_role role)
{
    std::vector<training_sample> out;
    for (std::size_t i : split.indices(role))
        out.push_back({&feats.at(i), split.samples[i].label});
    return out;
}

trial_outcome run_trial(const dataset_manifest& split, const std::vector<feature_stream>& feats, std::size_t size,
                        std::uint64_t reservoir_seed, const esn_params& params, unsigned jobs)
{
    auto train = samples_in_role(split, feats, split_role::train);
    auto test = samples_in_role(split, feats, split_role::test);
    trial_outcome t;
    t.model = train_readout(init_reservoir(size, reservoir_seed, params, split.classes), train, params.ridge, jobs);
    t.eval = evaluate(t.model, test, jobs);
    return t;
}

}  // namespace babbler
