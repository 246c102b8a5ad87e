#pragma once

// Imitation learning: CMA-ES over motor space, rewarded by the classifier's
// confidence in the current target vowel.

#include "babbler/cma.hpp"
#include "babbler/esn.hpp"
#include "babbler/motor.hpp"
#include "babbler/speaker.hpp"
#include "babbler/synth.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace babbler {

struct reward_weights {
    double effort = 0.01;    // lambda_e
    double boundary = 10.0;  // lambda_b
};

/// r = c_target - effort * |m - neutral|^2 - boundary * sum max(0, |m_i - 0.5| - 0.5)^2
double compute_reward(double target_confidence, const motor_vector& m, const reward_weights& w = {});
double compute_reward(const confidence_vector& conf, vowel target, const motor_vector& m,
                      const reward_weights& w = {});

enum class learn_mode { full16, guided13 };

std::string_view to_string(learn_mode m);
std::optional<learn_mode> parse_learn_mode(std::string_view s);

/// Free search coordinates plus fixed values for the remaining articulators.
struct dimension_map {
    std::vector<std::size_t> free;
    std::vector<std::pair<std::size_t, double>> clamped;

    static dimension_map full();
    /// Clamps LD, LP and JA to the values in `reference`.
    static dimension_map guided(const motor_vector& reference);

    std::size_t dimension() const { return free.size(); }
    motor_vector expand(const Eigen::VectorXd& x) const;
    Eigen::VectorXd project(const motor_vector& m) const;
    bool covers_all() const;
};

/// Samples lambda offspring and expands them to full motor vectors. No clipping.
std::vector<motor_vector> cma_ask(const cma_state& state, const dimension_map& dims, rng& gen);

/// Projects offspring back through `dims` and applies the CMA-ES update.
void cma_tell(cma_state& state, const dimension_map& dims, std::span<const motor_vector> offspring,
              std::span<const double> rewards);

/// Motor vector to classifier confidences. Called concurrently; must be thread-safe.
using motor_evaluator = std::function<confidence_vector(const motor_vector&)>;

struct imitation_options {
    learn_mode mode = learn_mode::full16;
    std::size_t budget = 1000;  // generations for the whole target set
    cma_params cma{};
    double learned_threshold = 0.5;
    bool target_switching = true;
    reward_weights weights{};
    double clip_seconds = 0.5;
    unsigned jobs = 1;
};

struct generation_record {
    std::size_t generation = 0;
    vowel target = vowel::null;
    double best_reward = 0.0;
    double best_confidence = 0.0;  // target confidence of the best offspring
    double best_so_far = 0.0;      // per target, over the generations it was active
    double sigma = 0.0;
    bool switched = false;
    bool learned = false;
};

struct target_result {
    vowel target = vowel::null;
    bool learned = false;
    std::size_t generations = 0;  // generations spent with this target active
    std::size_t learned_at = 0;
    double best_reward = 0.0;
    double best_confidence = 0.0;  // confidence of the best-reward offspring
    double max_confidence = 0.0;   // highest target confidence seen while active
    double peak_confidence = 0.0;  // highest confidence for this vowel in any generation
    motor_vector best_motor = motor_vector::neutral();
    bool visited = false;
};

struct imitation_run {
    learn_mode mode = learn_mode::full16;
    std::vector<generation_record> history;
    std::map<vowel, target_result> results;
    std::vector<vowel> learned_order;
    std::map<vowel, dimension_map> clamps;  // guided mode: map in force for each target

    std::size_t learned_count() const;
    /// Targets whose confidence reached `threshold` while they were active.
    std::size_t reached_count(double threshold) const;
};

/// Per-generation intervention between synthesis and scoring. It may change the
/// model used to score the generation.
struct generation_context {
    std::size_t generation = 0;
    std::span<const motor_vector> offspring;
    std::span<const audio_clip> clips;
    std::span<const feature_stream> features;
};
using generation_hook = std::function<void(const generation_context&, esn_model& model)>;

/// Runs the learner against `model` with the speaker's vocal tract. If `hook` is set
/// it is called once per generation before the offspring are scored.
imitation_run run_imitation(const esn_model& model, const speaker& spk, const std::vector<vowel>& targets,
                            const imitation_options& opts, std::uint64_t seed, const generation_hook& hook = {});

/// Same loop against an arbitrary evaluator (no synthesis, no hook).
imitation_run run_imitation(const motor_evaluator& evaluate, const std::vector<vowel>& classes,
                            const std::vector<vowel>& targets, const speaker* spk,
                            const imitation_options& opts, std::uint64_t seed);

/// Evaluator that synthesizes, featurizes and classifies.
motor_evaluator make_esn_evaluator(const esn_model& model, const speaker& spk, double clip_seconds = 0.5);

}  // namespace babbler
