#include "babbler/learner.hpp"

#include "babbler/errors.hpp"
#include "babbler/parallel.hpp"

#include <algorithm>

namespace babbler {

double compute_reward(double target_confidence, const motor_vector& m, const reward_weights& w)
{
    double effort = 0.0;
    double boundary = 0.0;
    for (double v : m.values) {
        const double d = v - 0.5;
        effort += d * d;
        const double over = std::max(0.0, std::abs(d) - 0.5);
        boundary += over * over;
    }
    return target_confidence - w.effort * effort - w.boundary * boundary;
}

double compute_reward(const confidence_vector& conf, vowel target, const motor_vector& m,
                      const reward_weights& w)
{
    return compute_reward(conf.of(target), m, w);
}

std::string_view to_string(learn_mode m)
{
    return m == learn_mode::full16 ? "full16" : "guided13";
}

std::optional<learn_mode> parse_learn_mode(std::string_view s)
{
    if (s == "full16")
        return learn_mode::full16;
    if (s == "guided13")
        return learn_mode::guided13;
    return std::nullopt;
}

dimension_map dimension_map::full()
{
    dimension_map d;
    for (std::size_t i = 0; i < motor_dims; ++i)
        d.free.push_back(i);
    return d;
}

dimension_map dimension_map::guided(const motor_vector& reference)
{
    dimension_map d;
    const std::array fixed{index_of(articulator::LD), index_of(articulator::LP), index_of(articulator::JA)};
    for (std::size_t i = 0; i < motor_dims; ++i) {
        if (std::find(fixed.begin(), fixed.end(), i) != fixed.end())
            d.clamped.emplace_back(i, reference[i]);
        else
            d.free.push_back(i);
    }
    return d;
}

motor_vector dimension_map::expand(const Eigen::VectorXd& x) const
{
    if (static_cast<std::size_t>(x.size()) != free.size())
        throw dimension_mismatch("search vector does not match the free dimensions");
    motor_vector m = motor_vector::neutral();
    for (std::size_t k = 0; k < free.size(); ++k)
        m[free[k]] = x(static_cast<Eigen::Index>(k));
    for (const auto& [i, v] : clamped)
        m[i] = v;
    return m;
}

Eigen::VectorXd dimension_map::project(const motor_vector& m) const
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k)
        x(static_cast<Eigen::Index>(k)) = m[free[k]];
    return x;
}

bool dimension_map::covers_all() const
{
    std::array<int, motor_dims> seen{};
    for (auto i : free)
        if (i < motor_dims)
            ++seen[i];
    for (const auto& c : clamped)
        if (c.first < motor_dims)
            ++seen[c.first];
    return std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }) &&
           free.size() + clamped.size() == motor_dims;
}

std::vector<motor_vector> cma_ask(const cma_state& state, const dimension_map& dims, rng& gen)
{
    if (state.dimension() != dims.dimension())
        throw dimension_mismatch("CMA state dimension does not match the dimension map");
    std::vector<motor_vector> out;
    for (const auto& x : state.sample(gen))
        out.push_back(dims.expand(x));
    return out;
}

void cma_tell(cma_state& state, const dimension_map& dims, std::span<const motor_vector> offspring,
              std::span<const double> rewards)
{
    if (offspring.size() != rewards.size())
        throw dimension_mismatch("offspring and rewards differ in length");
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(offspring.size());
    for (const auto& m : offspring)
        xs.push_back(dims.project(m));
    state.update(xs, rewards);
}

std::size_t imitation_run::learned_count() const
{
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const auto& kv) { return kv.second.learned; }));
}

std::size_t imitation_run::reached_count(double threshold) const
{
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [&](const auto& kv) {
        return kv.second.max_confidence >= threshold;
    }));
}

namespace {

// Scores a batch of offspring; `generation` is empty for the initial probe.
using batch_scorer =
    std::function<std::vector<confidence_vector>(std::span<const motor_vector>, std::optional<std::size_t>)>;

vowel most_confident(const std::vector<vowel>& candidates, const std::map<vowel, double>& mean)
{
    vowel best = candidates.front();
    for (vowel v : candidates)
        if (mean.at(v) > mean.at(best))
            best = v;
    return best;
}

std::map<vowel, double> mean_confidences(const std::vector<confidence_vector>& confs,
                                         const std::vector<vowel>& targets)
{
    std::map<vowel, double> mean;
    for (vowel v : targets) {
        double s = 0.0;
        for (const auto& c : confs)
            s += c.of(v);
        mean[v] = confs.empty() ? 0.0 : s / static_cast<double>(confs.size());
    }
    return mean;
}

imitation_run run_loop(const batch_scorer& score, const std::vector<vowel>& classes,
                       const std::vector<vowel>& targets, const speaker* spk, const imitation_options& opts,
                       std::uint64_t seed)
{
    std::vector<vowel> remaining;
    for (vowel v : targets) {
        if (v == vowel::null || std::find(classes.begin(), classes.end(), v) == classes.end())
            throw config_invalid("target " + std::string(to_string(v)) + " is not a vowel class of the model");
        if (std::find(remaining.begin(), remaining.end(), v) == remaining.end())
            remaining.push_back(v);
    }
    if (remaining.empty())
        throw config_invalid("imitation needs at least one target");
    if (opts.mode == learn_mode::guided13 && spk == nullptr)
        throw config_invalid("guided13 requires a speaker with prototypes");

    auto dims_for = [&](vowel v) {
        return opts.mode == learn_mode::guided13 ? dimension_map::guided(spk->prototype(v)) : dimension_map::full();
    };

    imitation_run run;
    run.mode = opts.mode;
    for (vowel v : remaining)
        run.results[v].target = v;

    rng gen(seed);
    const motor_vector neutral = motor_vector::neutral();
    const auto probe = score(std::span<const motor_vector>(&neutral, 1), std::nullopt);
    vowel current = most_confident(remaining, mean_confidences(probe, remaining));
    dimension_map dims = dims_for(current);
    run.clamps[current] = dims;
    cma_state state(dims.project(neutral), opts.cma);

    for (std::size_t g = 0; g < opts.budget && !remaining.empty(); ++g) {
        const auto offspring = cma_ask(state, dims, gen);
        const auto confs = score(offspring, g);

        std::vector<double> rewards(offspring.size());
        std::size_t best = 0;
        for (std::size_t i = 0; i < offspring.size(); ++i) {
            rewards[i] = compute_reward(confs[i], current, offspring[i], opts.weights);
            if (rewards[i] > rewards[best])
                best = i;
        }

        auto& res = run.results[current];
        if (!res.visited || rewards[best] > res.best_reward) {
            res.best_reward = rewards[best];
            res.best_confidence = confs[best].of(current);
            res.best_motor = offspring[best];
        }
        res.visited = true;
        ++res.generations;
        for (const auto& c : confs)
            res.max_confidence = std::max(res.max_confidence, c.of(current));
        for (auto& [v, r] : run.results)
            for (const auto& c : confs)
                r.peak_confidence = std::max(r.peak_confidence, c.of(v));

        generation_record rec;
        rec.generation = g;
        rec.target = current;
        rec.best_reward = rewards[best];
        rec.best_confidence = confs[best].of(current);
        rec.best_so_far = res.best_reward;

        cma_tell(state, dims, offspring, rewards);
        rec.sigma = state.sigma();

        const auto mean = mean_confidences(confs, remaining);
        if (rewards[best] >= opts.learned_threshold) {
            res.learned = true;
            res.learned_at = g;
            rec.learned = true;
            run.learned_order.push_back(current);
            remaining.erase(std::find(remaining.begin(), remaining.end(), current));
            if (!remaining.empty()) {
                current = most_confident(remaining, mean);
                dims = dims_for(current);
                run.clamps.try_emplace(current, dims);
                state = cma_state(dims.project(neutral), opts.cma);
            }
        } else if (opts.target_switching && remaining.size() > 1) {
            std::vector<vowel> others;
            for (vowel v : remaining)
                if (v != current)
                    others.push_back(v);
            const vowel challenger = most_confident(others, mean);
            if (mean.at(challenger) > mean.at(current)) {
                current = challenger;
                rec.switched = true;
                if (opts.mode == learn_mode::guided13) {
                    dims = dims_for(current);
                    run.clamps.try_emplace(current, dims);
                }
            }
        }
        run.history.push_back(rec);
    }
    return run;
}

}  // namespace

motor_evaluator make_esn_evaluator(const esn_model& model, const speaker& spk, double clip_seconds)
{
    return [&model, &spk, clip_seconds](const motor_vector& m) {
        return classify(model, filterbank_features(synthesize_vowel(m, spk, clip_seconds)));
    };
}

imitation_run run_imitation(const motor_evaluator& evaluate, const std::vector<vowel>& classes,
                            const std::vector<vowel>& targets, const speaker* spk,
                            const imitation_options& opts, std::uint64_t seed)
{
    batch_scorer score = [&](std::span<const motor_vector> offspring, std::optional<std::size_t>) {
        std::vector<confidence_vector> out(offspring.size());
        parallel_for(offspring.size(), opts.jobs, [&](std::size_t i) { out[i] = evaluate(offspring[i]); });
        return out;
    };
    return run_loop(score, classes, targets, spk, opts, seed);
}

imitation_run run_imitation(const esn_model& model, const speaker& spk, const std::vector<vowel>& targets,
                            const imitation_options& opts, std::uint64_t seed, const generation_hook& hook)
{
    if (!model.trained)
        throw untrained_model("imitation needs a trained classifier");
    esn_model working = model;
    batch_scorer score = [&](std::span<const motor_vector> offspring, std::optional<std::size_t> generation) {
        const std::size_t n = offspring.size();
        std::vector<audio_clip> clips(n);
        std::vector<feature_stream> feats(n);
        parallel_for(n, opts.jobs, [&](std::size_t i) {
            clips[i] = synthesize_vowel(offspring[i], spk, opts.clip_seconds);
            feats[i] = filterbank_features(clips[i]);
        });
        if (hook && generation)
            hook(generation_context{*generation, offspring, clips, feats}, working);
        std::vector<confidence_vector> out(n);
        parallel_for(n, opts.jobs, [&](std::size_t i) { out[i] = classify(working, feats[i]); });
        return out;
    };
    return run_loop(score, working.classes, targets, &spk, opts, seed);
}

}  // namespace babbler
