#pragma once

// Caregiver imitation: an adult model re-utters the infant's most confident
// babbles with its own prototypes, and the infant uses what it hears to label
// those babbles and refit its readout.

#include "babbler/esn.hpp"
#include "babbler/learner.hpp"

#include <deque>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace babbler {

/// Adult prototype utterances, synthesized once, with the caregiver's own reading of each.
struct adult_voice {
    std::string speaker_id;
    std::map<vowel, audio_clip> clips;
    std::map<vowel, feature_stream> features;
    std::map<vowel, vowel> heard_as;  // caregiver argmax on its own prototype

    /// Classes the caregiver can imitate self-consistently.
    bool can_imitate(vowel v) const;
};

adult_voice prepare_adult_voice(const esn_model& caregiver, const speaker& adult, double clip_seconds = 0.5);

struct imitation_triple {
    std::size_t offspring_index = 0;
    vowel caregiver_label = vowel::null;
    double caregiver_confidence = 0.0;
    const audio_clip* infant_clip = nullptr;
    const feature_stream* infant_features = nullptr;
    const audio_clip* adult_clip = nullptr;
    const feature_stream* adult_features = nullptr;
};

/// Ranks clips by the caregiver's top confidence, keeps the first `imitations` whose
/// argmax is an imitable vowel, and pairs each with the adult prototype of that class.
/// Returned pointers refer into `clips`, `features` and `voice`.
std::vector<imitation_triple> caregiver_select_and_imitate(const esn_model& caregiver,
                                                           std::span<const audio_clip> clips,
                                                           std::span<const feature_stream> features,
                                                           const adult_voice& voice, std::size_t imitations,
                                                           unsigned jobs = 1);

struct window_entry {
    std::size_t generation = 0;
    std::size_t offspring_index = 0;
    vowel label = vowel::null;            // infant's reading of the imitation
    vowel caregiver_label = vowel::null;  // class the caregiver imitated
    std::string adult_clip;               // imitated prototype: "<class>", or "<speaker>/<class>" in run records
    readout_accumulator stats;
};

struct infant_state {
    esn_model model;
    readout_accumulator core;           // ambient training set, never evicted
    std::vector<std::size_t> core_ids;  // ambient sample ids behind `core`
    std::deque<window_entry> window;    // infant-produced samples, oldest first
    std::size_t window_cap = 200;
    double ridge = 1e-4;
    std::size_t generation = 0;
};

/// Infant with its readout fitted on the ambient core.
infant_state make_infant_state(const esn_model& reservoir, readout_accumulator core,
                               std::vector<std::size_t> core_ids, std::size_t window_cap = 200,
                               double ridge = 1e-4);

/// Labels each infant clip by the infant's argmax on its adult imitation, appends the
/// pairs to the window (FIFO beyond the cap) and refits W_out on core + window.
/// Empty input only advances the generation counter.
void infant_relabel_and_retrain(infant_state& state, std::span<const imitation_triple> triples);

struct caregiver_options {
    std::size_t generation_size = 50;  // N_G, the learner's lambda
    std::size_t imitations = 5;        // N_I
    std::size_t window_cap = 200;
    std::size_t generations = 50;
    std::vector<bool> presence{true};  // cycled over generations
    double ridge = 1e-4;
    imitation_options learner{};       // lambda and switching are overridden
};

/// Presence pattern: "always", "never", or "alternate:<k>" (k on, k off).
std::vector<bool> parse_presence(const std::string& spec);

struct caregiver_record {
    std::size_t generation = 0;
    bool caregiver_present = false;
    std::size_t n_imitated = 0;
    double infant_self_error = 0.0;
    double best_reward = 0.0;
    std::size_t window_size = 0;
};

struct caregiver_run {
    imitation_run learning;
    std::vector<caregiver_record> history;
    double initial_self_error = 0.0;
    infant_state infant;
    std::vector<window_entry> imitated;  // every pairing made, without stats
};

/// Learner options the loop actually uses (lambda = N_G, no target switching).
imitation_options effective_learner_options(const caregiver_options& opts);

/// The loop: ask, synthesize, caregiver imitation, infant retraining, infant scoring, tell.
/// `self_test` holds the infant speaker's held-out samples used for the self error.
caregiver_run caregiver_loop(const infant_state& infant, const esn_model& caregiver, const speaker& infant_speaker,
                             const speaker& adult, std::span<const training_sample> self_test,
                             const std::vector<vowel>& targets, const caregiver_options& opts,
                             std::uint64_t seed);

}  // namespace babbler
