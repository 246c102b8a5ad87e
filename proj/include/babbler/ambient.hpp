#pragma once

// Labeled ambient speech: Gaussian sampling around calibrated prototypes,
// a formant-distance labeling oracle, and train/test splits.

#include "babbler/auditory.hpp"
#include "babbler/speakers.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace babbler {

struct labeled_sample {
    std::size_t id = 0;
    std::size_t speaker_index = 0;  // index into the speaker series
    motor_vector motor;
    vowel label = vowel::null;
    vowel intended = vowel::null;  // cell that produced it (null for wide draws)
    double sigma = 0.0;
    formant_pair formants;  // measured; zero when extraction failed
    bool formants_valid = false;
    bool filled = false;  // rejection cap hit; best-scoring draw kept instead
    std::string clip_path;
};

enum class split_role : std::uint8_t { unused, train, test };

std::string_view to_string(split_role r);

struct dataset_manifest {
    std::vector<labeled_sample> samples;
    std::vector<split_role> roles;  // aligned with samples; empty until split
    std::vector<vowel> classes = six_classes();
    int paradigm = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> indices(split_role role) const;
};

struct ambient_options {
    int per_class = 16;
    int nulls = 16;
    double sigma_in = 0.01;
    double sigma_null = 0.2;
    int max_draws = 200;
    double tau_in = 0.18;
    double clip_seconds = 0.5;
    unsigned jobs = 1;
};

/// Formant-distance oracle standing in for a human listener. Silent or
/// unanalysable clips are null.
vowel label_sample(const audio_clip& clip, const speaker& spk, double tau_in = 0.18);

/// Minimum oracle distance and its vowel, for diagnostics and rejection fill.
std::pair<vowel, double> nearest_prototype(const formant_pair& f, const speaker& spk);

dataset_manifest generate_dataset(const std::vector<speaker>& series, std::uint64_t seed,
                                  const ambient_options& opts = {});

/// Paradigms: 1 = m00 + m20, {a,i,u,null}; 2 = all speakers, same classes;
/// 3 = all speakers, six classes; 4 = train ages >= 4, test ages 0-2, six classes.
dataset_manifest make_split(const dataset_manifest& manifest, const std::vector<speaker>& series,
                            int paradigm, std::uint64_t seed);

/// One split per age band: train on the other bands, test on the band.
std::vector<dataset_manifest> leave_out_splits(const dataset_manifest& manifest,
                                               const std::vector<speaker>& series);

/// Relative clip path data/ambient/<speaker>/<label>/<n>.wav for every sample.
void assign_clip_paths(dataset_manifest& manifest, const std::vector<speaker>& series);

// Persistence.
std::string sample_to_json(const labeled_sample& s, const std::vector<speaker>& series,
                           const std::string& config_hash);
void write_manifest(const std::filesystem::path& path, const dataset_manifest& m,
                    const std::vector<speaker>& series, const std::string& config_hash);
dataset_manifest read_manifest(const std::filesystem::path& path, const std::vector<speaker>& series);
void write_split_csv(const std::filesystem::path& path, const dataset_manifest& m, const std::string& header);

}  // namespace babbler
