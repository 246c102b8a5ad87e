#pragma once

#include "babbler/auditory.hpp"
#include "babbler/speaker.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace babbler {

struct vowel_target {
    vowel v = vowel::a;
    double f1 = 0.0;
    double f2 = 0.0;
};

/// Standard adult male reference formants used as calibration goals.
std::vector<vowel_target> adult_reference_targets();

/// Reference targets scaled by 17 cm / tract_length.
std::vector<vowel_target> scaled_targets(const speaker& spk,
                                         const std::vector<vowel_target>& adult = adult_reference_targets());

/// Monotone piecewise-cubic pitch curve through the age anchors.
double speaker_f0(int age, sex s);
double speaker_tract_length(int age, sex s);

/// Ages 0,2,...,20 for both sexes (males first), prototypes empty.
std::vector<speaker> make_speaker_series();

struct calibration_options {
    int budget = 500;                // objective evaluations per vowel
    double clip_seconds = 0.3;       // duration used while searching
    double prototype_seconds = 0.5;  // duration used to record prototype formants
    double initial_step = 0.5;
    double min_step = 1.0 / 512.0;
    double max_objective = 0.5;
    formant_options formants{};
};

/// J = |F1-F1*|/F1* + |F2-F2*|/F2*; 10 for clips without a valid estimate.
double calibration_objective(const motor_vector& m, const speaker& spk, const vowel_target& target,
                             const calibration_options& opts);

struct calibration_result {
    motor_vector best = motor_vector::neutral();
    double objective = 0.0;
    int evaluations = 0;
};

/// Coordinate descent from neutral: try +-step per coordinate, follow an improving
/// move while it keeps improving, halve the step after a sweep without progress.
calibration_result calibrate_vowel(const speaker& spk, const vowel_target& target,
                                   const calibration_options& opts = {});

/// Calibrates /a/,/e/,/i/,/o/,/u/ (schwa = neutral). Throws calibration_failed when a
/// vowel ends above `max_objective`; the returned speaker is otherwise complete.
speaker calibrate_prototypes(const speaker& spk, const std::vector<vowel_target>& targets,
                             const calibration_options& opts = {});

/// Same as calibrate_prototypes but records failure in `calibration_ok` instead of throwing.
speaker calibrate_prototypes_flagged(const speaker& spk, const std::vector<vowel_target>& targets,
                                     const calibration_options& opts = {}, std::string* message = nullptr);

/// Formants of every prototype gesture at the given clip length.
void record_prototype_formants(speaker& spk, double seconds, const formant_options& opts = {});

/// Age bands used for leave-one-group-out analysis.
struct age_band {
    int lo;
    int hi;
    std::string name() const;
    bool contains(int age) const { return age >= lo && age <= hi; }
};
std::vector<age_band> leave_out_bands();

// JSON-lines persistence: one record per speaker.
std::string speaker_to_json(const speaker& spk, const std::string& config_hash);
speaker speaker_from_json(const std::string& line);
void write_speaker_series(const std::filesystem::path& path, const std::vector<speaker>& series,
                          const std::string& config_hash);
std::vector<speaker> read_speaker_series(const std::filesystem::path& path);

}  // namespace babbler
