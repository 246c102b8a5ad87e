#pragma once

// Glue shared by the command-line tool and the experiment drivers.

#include "babbler/ambient.hpp"
#include "babbler/esn.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace babbler {

const speaker& find_speaker(const std::vector<speaker>& series, const std::string& id);

/// Filterbank features of every sample's clip. With a cache directory, features are
/// read from / written to <dir>/<id>-<key>.feat, where the key hashes the motor
/// vector, speaker, clip length and synth version.
std::vector<feature_stream> dataset_features(const dataset_manifest& manifest, const std::vector<speaker>& series,
                                             double clip_seconds, unsigned jobs,
                                             const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

std::vector<training_sample> samples_in_role(const dataset_manifest& split, const std::vector<feature_stream>& feats,
                                             split_role role);

struct trial_outcome {
    evaluation eval;
    esn_model model;
};

/// Fresh reservoir, readout trained on the split's train role, evaluated on its test role.
trial_outcome run_trial(const dataset_manifest& split, const std::vector<feature_stream>& feats, std::size_t size,
                        std::uint64_t reservoir_seed, const esn_params& params, unsigned jobs = 1);

}  // namespace babbler
