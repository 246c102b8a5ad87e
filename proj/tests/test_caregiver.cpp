#include "babbler/caregiver.hpp"
#include "babbler/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace babbler;

namespace {

struct fixture {
    std::vector<feature_stream> features;
    std::vector<training_sample> samples;
    esn_model caregiver;
    readout_accumulator core;
    esn_model infant_reservoir;
    std::vector<std::size_t> ids;
};

const fixture& shared()
{
    static const fixture f = [] {
        fixture f;
        const auto& m = testing::small_dataset();
        const auto& series = testing::small_series();
        for (const auto& s : m.samples)
            f.features.push_back(
                filterbank_features(synthesize_vowel(s.motor, series[s.speaker_index], 0.5)));
        for (std::size_t i = 0; i < m.samples.size(); ++i) {
            f.samples.push_back({&f.features[i], m.samples[i].label});
            f.ids.push_back(i);
        }
        f.caregiver = train_readout(init_reservoir(40, 1), f.samples);
        f.infant_reservoir = init_reservoir(30, 2);
        f.core = accumulate_readout(f.infant_reservoir, f.samples);
        return f;
    }();
    return f;
}

std::vector<audio_clip> babble(std::size_t n, std::uint64_t seed)
{
    rng gen(seed);
    std::normal_distribution<double> noise(0.0, 0.15);
    const auto& spk = testing::small_series()[0];
    std::vector<audio_clip> clips;
    for (std::size_t k = 0; k < n; ++k) {
        motor_vector m = spk.prototype(core_vowels[k % core_vowels.size()]);
        for (double& v : m.values)
            v += noise(gen);
        clips.push_back(synthesize_vowel(m, spk, 0.5));
    }
    return clips;
}

std::vector<feature_stream> featurize(const std::vector<audio_clip>& clips)
{
    std::vector<feature_stream> out;
    for (const auto& c : clips)
        out.push_back(filterbank_features(c));
    return out;
}

caregiver_options small_options()
{
    caregiver_options o;
    o.generation_size = 6;
    o.imitations = 2;
    o.window_cap = 4;
    o.generations = 3;
    o.learner.mode = learn_mode::full16;
    return o;
}

}  // namespace

TEST_CASE("adult voice is read by the caregiver itself")
{
    const auto& f = shared();
    const auto voice = prepare_adult_voice(f.caregiver, testing::small_series()[1]);
    CHECK(voice.speaker_id == "m20");
    CHECK(voice.clips.size() == 5);
    CHECK(voice.clips.count(vowel::null) == 0);
    for (const auto& [v, heard] : voice.heard_as) {
        CHECK(heard == classify(f.caregiver, voice.features.at(v)).predicted_class());
        CHECK(voice.can_imitate(v) == (heard == v));
    }
    CHECK_FALSE(voice.can_imitate(vowel::null));
}

TEST_CASE("caregiver selection")
{
    const auto& f = shared();
    const auto voice = prepare_adult_voice(f.caregiver, testing::small_series()[1]);
    const auto clips = babble(20, 3);
    const auto feats = featurize(clips);
    const auto triples = caregiver_select_and_imitate(f.caregiver, clips, feats, voice, 5);
    CHECK(triples.size() <= 5);
    std::set<std::size_t> seen;
    double previous = 2.0;
    for (const auto& t : triples) {
        CHECK(seen.insert(t.offspring_index).second);
        CHECK(t.caregiver_label != vowel::null);
        CHECK(voice.can_imitate(t.caregiver_label));
        CHECK(t.caregiver_confidence <= previous);
        previous = t.caregiver_confidence;
        const auto cv = classify(f.caregiver, feats[t.offspring_index]);
        CHECK(cv.predicted_class() == t.caregiver_label);
        CHECK(t.infant_clip == &clips[t.offspring_index]);
        CHECK(t.infant_features == &feats[t.offspring_index]);
        CHECK(t.adult_clip == &voice.clips.at(t.caregiver_label));
        CHECK(t.adult_features == &voice.features.at(t.caregiver_label));
    }
    // nothing skipped with higher confidence and an imitable label
    if (!triples.empty())
        for (std::size_t i = 0; i < clips.size(); ++i) {
            if (seen.count(i))
                continue;
            const auto cv = classify(f.caregiver, feats[i]);
            if (cv.predicted_class() != vowel::null && voice.can_imitate(cv.predicted_class()) && triples.size() == 5)
                CHECK(cv.confidences[cv.predicted] <= triples.back().caregiver_confidence);
        }

    CHECK_THROWS_AS(caregiver_select_and_imitate(f.caregiver, clips, feats, voice, 21), config_invalid);
    CHECK(caregiver_select_and_imitate(f.caregiver, clips, feats, voice, 0).empty());
}

TEST_CASE("a caregiver with no self-consistent prototypes imitates nothing")
{
    const auto& f = shared();
    auto voice = prepare_adult_voice(f.caregiver, testing::small_series()[1]);
    for (auto& [v, heard] : voice.heard_as)
        heard = vowel::null;
    const auto clips = babble(10, 4);
    const auto feats = featurize(clips);
    CHECK(caregiver_select_and_imitate(f.caregiver, clips, feats, voice, 5).empty());
}

TEST_CASE("relabel and retrain")
{
    const auto& f = shared();
    auto state = make_infant_state(f.infant_reservoir, f.core, f.ids, 3);
    CHECK(state.model.trained);
    CHECK(state.window.empty());
    const auto core_frames = state.core.frames();
    const auto w_in = state.model.w_in;
    const Eigen::MatrixXd w = state.model.w;

    // empty input: no change beyond the generation counter
    const auto before = state.model.w_out;
    infant_relabel_and_retrain(state, {});
    CHECK(state.generation == 1);
    CHECK(state.model.w_out == before);

    const auto clips = babble(4, 5);
    const auto feats = featurize(clips);
    const auto voice = prepare_adult_voice(f.caregiver, testing::small_series()[1]);
    std::vector<imitation_triple> triples;
    for (std::size_t k = 0; k < 2; ++k) {
        imitation_triple t;
        t.offspring_index = k;
        t.caregiver_label = core_vowels[k];
        t.infant_clip = &clips[k];
        t.infant_features = &feats[k];
        t.adult_clip = &voice.clips.at(core_vowels[k]);
        t.adult_features = &voice.features.at(core_vowels[k]);
        triples.push_back(t);
    }
    const auto expected_label = classify(state.model, *triples[0].adult_features).predicted_class();
    infant_relabel_and_retrain(state, triples);
    REQUIRE(state.window.size() == 2);
    CHECK(state.window[0].label == expected_label);
    CHECK(state.window[0].caregiver_label == vowel::a);
    CHECK(state.window[0].generation == 1);
    CHECK_FALSE(state.model.w_out == before);

    // refit equals a fresh solve on core + window
    readout_accumulator total = state.core;
    for (const auto& e : state.window)
        total.merge(e.stats);
    CHECK(train_readout(state.model, total, state.ridge).w_out == state.model.w_out);

    infant_relabel_and_retrain(state, triples);
    CHECK(state.window.size() == 3);
    CHECK(state.window.front().generation == 1);
    CHECK(state.window.front().offspring_index == 1);
    CHECK(state.window.back().generation == 2);
    CHECK(state.core.frames() == core_frames);
    CHECK(state.core_ids == f.ids);
    CHECK(state.model.w_in == w_in);
    CHECK(Eigen::MatrixXd(state.model.w) == w);
}

TEST_CASE("presence schedules")
{
    CHECK(parse_presence("always") == std::vector<bool>{true});
    CHECK(parse_presence("never") == std::vector<bool>{false});
    CHECK(parse_presence("alternate:2") == std::vector<bool>{true, true, false, false});
    for (const char* bad : {"alternate:0", "alternate:", "alternate:2x", "sometimes", ""})
        CHECK_THROWS_AS(parse_presence(bad), config_invalid);
}

TEST_CASE("effective learner options")
{
    auto o = small_options();
    o.learner.target_switching = true;
    const auto l = effective_learner_options(o);
    CHECK(l.cma.lambda == 6);
    CHECK_FALSE(l.target_switching);
    CHECK(l.budget == 3);
}

TEST_CASE("caregiver loop")
{
    const auto& f = shared();
    const auto& series = testing::small_series();
    const auto infant = make_infant_state(f.infant_reservoir, f.core, f.ids, 4);
    std::vector<training_sample> self_test;
    for (std::size_t i = 0; i < f.samples.size(); ++i)
        if (testing::small_dataset().samples[i].speaker_index == 0 && f.samples[i].label != vowel::null)
            self_test.push_back(f.samples[i]);
    const std::vector<vowel> targets{vowel::a, vowel::i};

    const auto run = caregiver_loop(infant, f.caregiver, series[0], series[1], self_test, targets, small_options(), 9);
    REQUIRE(run.history.size() == run.learning.history.size());
    CHECK(run.history.size() <= 3);
    for (std::size_t g = 0; g < run.history.size(); ++g) {
        CHECK(run.history[g].generation == g);
        CHECK(run.history[g].caregiver_present);
        CHECK(run.history[g].n_imitated <= 2);
        CHECK(run.history[g].window_size <= 4);
        CHECK(run.history[g].best_reward == run.learning.history[g].best_reward);
    }
    for (const auto& e : run.imitated)
        CHECK(e.adult_clip.rfind("m20/", 0) == 0);
    CHECK(run.infant.model.w_in == infant.model.w_in);
    CHECK(run.infant.core.frames() == infant.core.frames());
}

TEST_CASE("absent caregiver reproduces the plain learner exactly")
{
    const auto& f = shared();
    const auto& series = testing::small_series();
    const auto infant = make_infant_state(f.infant_reservoir, f.core, f.ids, 4);
    auto o = small_options();
    o.presence = {false};
    const std::vector<vowel> targets{vowel::a, vowel::u};
    const auto run = caregiver_loop(infant, f.caregiver, series[0], series[1], {}, targets, o, 12);
    const auto plain = run_imitation(infant.model, series[0], targets, effective_learner_options(o), 12);
    REQUIRE(run.learning.history.size() == plain.history.size());
    for (std::size_t g = 0; g < plain.history.size(); ++g) {
        CHECK(run.learning.history[g].target == plain.history[g].target);
        CHECK(run.learning.history[g].best_reward == plain.history[g].best_reward);
        CHECK(run.learning.history[g].sigma == plain.history[g].sigma);
        CHECK_FALSE(run.history[g].caregiver_present);
        CHECK(run.history[g].n_imitated == 0);
    }
    CHECK(run.imitated.empty());
    CHECK(run.infant.model.w_out == infant.model.w_out);
}

TEST_CASE("alternating caregiver")
{
    const auto& f = shared();
    const auto& series = testing::small_series();
    const auto infant = make_infant_state(f.infant_reservoir, f.core, f.ids, 4);
    auto o = small_options();
    o.generations = 4;
    o.presence = parse_presence("alternate:1");
    o.learner.learned_threshold = 2.0;
    const auto run = caregiver_loop(infant, f.caregiver, series[0], series[1], {}, {vowel::e}, o, 1);
    REQUIRE(run.history.size() == 4);
    for (std::size_t g = 0; g < 4; ++g) {
        CHECK(run.history[g].caregiver_present == (g % 2 == 0));
        if (g % 2 == 1)
            CHECK(run.history[g].n_imitated == 0);
    }
}

TEST_CASE("caregiver configuration errors")
{
    const auto& f = shared();
    const auto& series = testing::small_series();
    const auto infant = make_infant_state(f.infant_reservoir, f.core, f.ids, 4);
    auto o = small_options();
    o.imitations = 7;
    CHECK_THROWS_AS(caregiver_loop(infant, f.caregiver, series[0], series[1], {}, {vowel::a}, o, 1), config_invalid);
    o = small_options();
    o.presence.clear();
    CHECK_THROWS_AS(caregiver_loop(infant, f.caregiver, series[0], series[1], {}, {vowel::a}, o, 1), config_invalid);
    CHECK_THROWS_AS(caregiver_loop(infant, f.infant_reservoir, series[0], series[1], {}, {vowel::a}, small_options(), 1),
                    untrained_model);
}
