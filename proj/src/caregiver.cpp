#include "babbler/caregiver.hpp"

#include "babbler/errors.hpp"
#include "babbler/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace babbler {

bool adult_voice::can_imitate(vowel v) const
{
    auto it = heard_as.find(v);
    return it != heard_as.end() && it->second == v;
}

adult_voice prepare_adult_voice(const esn_model& caregiver, const speaker& adult, double clip_seconds)
{
    adult_voice voice;
    voice.speaker_id = adult.id();
    for (vowel v : caregiver.classes) {
        if (v == vowel::null)
            continue;
        auto clip = synthesize_vowel(adult.prototype(v), adult, clip_seconds);
        auto feats = filterbank_features(clip);
        voice.heard_as[v] = classify(caregiver, feats).predicted_class();
        voice.clips.emplace(v, std::move(clip));
        voice.features.emplace(v, std::move(feats));
    }
    return voice;
}

std::vector<imitation_triple> caregiver_select_and_imitate(const esn_model& caregiver,
                                                           std::span<const audio_clip> clips,
                                                           std::span<const feature_stream> features,
                                                           const adult_voice& voice, std::size_t imitations,
                                                           unsigned jobs)
{
    if (clips.size() != features.size())
        throw dimension_mismatch("clips and features differ in length");
    if (imitations > clips.size())
        throw config_invalid("more imitations requested than clips offered");

    std::vector<confidence_vector> conf(clips.size());
    parallel_for(clips.size(), jobs, [&](std::size_t i) { conf[i] = classify(caregiver, features[i]); });

    std::vector<std::size_t> order(clips.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return conf[a].confidences[conf[a].predicted] > conf[b].confidences[conf[b].predicted];
    });

    std::vector<imitation_triple> out;
    for (std::size_t i : order) {
        if (out.size() == imitations)
            break;
        const vowel label = conf[i].predicted_class();
        if (label == vowel::null || !voice.can_imitate(label))
            continue;
        imitation_triple t;
        t.offspring_index = i;
        t.caregiver_label = label;
        t.caregiver_confidence = conf[i].confidences[conf[i].predicted];
        t.infant_clip = &clips[i];
        t.infant_features = &features[i];
        t.adult_clip = &voice.clips.at(label);
        t.adult_features = &voice.features.at(label);
        out.push_back(t);
    }
    return out;
}

infant_state make_infant_state(const esn_model& reservoir, readout_accumulator core,
                               std::vector<std::size_t> core_ids, std::size_t window_cap, double ridge)
{
    infant_state s;
    s.model = train_readout(reservoir, core, ridge);
    s.core = std::move(core);
    s.core_ids = std::move(core_ids);
    s.window_cap = window_cap;
    s.ridge = ridge;
    return s;
}

void infant_relabel_and_retrain(infant_state& state, std::span<const imitation_triple> triples)
{
    const std::size_t generation = state.generation++;
    if (triples.empty())
        return;
    for (const auto& t : triples) {
        window_entry e;
        e.generation = generation;
        e.offspring_index = t.offspring_index;
        e.caregiver_label = t.caregiver_label;
        e.label = classify(state.model, *t.adult_features).predicted_class();
        e.adult_clip = std::string(to_string(t.caregiver_label));
        e.stats = readout_accumulator(state.model.size(), state.model.class_count());
        e.stats.add(harvest_states(state.model, *t.infant_features), state.model.class_index(e.label));
        state.window.push_back(std::move(e));
    }
    while (state.window.size() > state.window_cap)
        state.window.pop_front();

    readout_accumulator total = state.core;
    for (const auto& e : state.window)
        total.merge(e.stats);
    state.model = train_readout(state.model, total, state.ridge);
}

std::vector<bool> parse_presence(const std::string& spec)
{
    if (spec == "always")
        return {true};
    if (spec == "never")
        return {false};
    const std::string prefix = "alternate:";
    if (spec.rfind(prefix, 0) == 0) {
        std::size_t k = 0;
        try {
            std::size_t used = 0;
            k = std::stoul(spec.substr(prefix.size()), &used);
            if (used != spec.size() - prefix.size())
                k = 0;
        } catch (const std::exception&) {
            k = 0;
        }
        if (k == 0)
            throw config_invalid("bad presence schedule '" + spec + "'");
        std::vector<bool> p(2 * k, false);
        std::fill(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k), true);
        return p;
    }
    throw config_invalid("bad presence schedule '" + spec + "'");
}

imitation_options effective_learner_options(const caregiver_options& opts)
{
    imitation_options o = opts.learner;
    o.cma.lambda = opts.generation_size;
    o.target_switching = false;
    o.budget = opts.generations;
    return o;
}

caregiver_run caregiver_loop(const infant_state& infant, const esn_model& caregiver, const speaker& infant_speaker,
                             const speaker& adult, std::span<const training_sample> self_test,
                             const std::vector<vowel>& targets, const caregiver_options& opts,
                             std::uint64_t seed)
{
    if (opts.imitations > opts.generation_size)
        throw config_invalid("caregiver imitations exceed the generation size");
    if (opts.presence.empty())
        throw config_invalid("caregiver presence schedule is empty");
    if (opts.generation_size < 2)
        throw config_invalid("generation size must be at least 2");
    if (!caregiver.trained)
        throw untrained_model("caregiver classifier has not been trained");

    const imitation_options learner = effective_learner_options(opts);
    const unsigned jobs = learner.jobs;

    caregiver_run out;
    out.infant = infant;
    const adult_voice voice = prepare_adult_voice(caregiver, adult, learner.clip_seconds);

    // The reservoir never changes, so self-test states are harvested once.
    std::vector<Eigen::MatrixXd> test_states(self_test.size());
    parallel_for(self_test.size(), jobs,
                 [&](std::size_t i) { test_states[i] = harvest_states(infant.model, *self_test[i].features); });
    auto self_error = [&](const esn_model& model) {
        std::vector<vowel> truth, predicted;
        for (std::size_t i = 0; i < self_test.size(); ++i) {
            truth.push_back(self_test[i].label);
            predicted.push_back(classify_states(model, test_states[i]).predicted_class());
        }
        return evaluate_predictions(truth, predicted, model.classes).error_rate;
    };
    out.initial_self_error = self_error(infant.model);

    generation_hook hook = [&](const generation_context& ctx, esn_model& model) {
        caregiver_record rec;
        rec.generation = ctx.generation;
        rec.caregiver_present = opts.presence[ctx.generation % opts.presence.size()];
        if (rec.caregiver_present) {
            const auto triples =
                caregiver_select_and_imitate(caregiver, ctx.clips, ctx.features, voice, opts.imitations, jobs);
            infant_relabel_and_retrain(out.infant, triples);
            rec.n_imitated = triples.size();
            for (std::size_t k = out.infant.window.size() - std::min(triples.size(), out.infant.window.size());
                 k < out.infant.window.size(); ++k) {
                window_entry e = out.infant.window[k];
                e.stats = {};
                e.adult_clip = voice.speaker_id + "/" + e.adult_clip;
                out.imitated.push_back(std::move(e));
            }
            model.w_out = out.infant.model.w_out;
        } else {
            ++out.infant.generation;
        }
        rec.infant_self_error = self_error(model);
        rec.window_size = out.infant.window.size();
        out.history.push_back(rec);
    };

    out.learning = run_imitation(infant.model, infant_speaker, targets, learner, seed, hook);
    for (std::size_t g = 0; g < out.history.size() && g < out.learning.history.size(); ++g)
        out.history[g].best_reward = out.learning.history[g].best_reward;
    return out;
}

}  // namespace babbler
