#pragma once

#include "babbler/motor.hpp"
#include "babbler/vowel.hpp"

#include <map>
#include <string>

namespace babbler {

enum class sex { male, female };

std::string_view to_string(sex s);

struct formant_pair {
    double f1 = 0.0;
    double f2 = 0.0;
};

/// One member of the speaker series. Immutable after calibration.
struct speaker {
    int age = 0;
    babbler::sex sex = sex::male;
    double tract_length = 17.0;  // cm
    double f0 = 125.0;           // Hz
    std::map<vowel, motor_vector> prototypes;
    std::map<vowel, double> residuals;         // calibration objective per vowel
    std::map<vowel, formant_pair> prototype_formants;
    bool calibration_ok = false;

    std::string id() const;
    bool calibrated() const { return prototypes.size() == prototype_vowels.size(); }
    const motor_vector& prototype(vowel v) const;
    const formant_pair& formants_of(vowel v) const;
};

}  // namespace babbler
