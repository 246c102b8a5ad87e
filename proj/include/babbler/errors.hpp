#pragma once

#include <stdexcept>
#include <string>

namespace babbler {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BABBLER_DEFINE_ERROR(name)                 \
    class name : public error {                    \
    public:                                        \
        using error::error;                        \
    }

BABBLER_DEFINE_ERROR(duration_out_of_range);
BABBLER_DEFINE_ERROR(f0_out_of_range);
BABBLER_DEFINE_ERROR(bad_sample_rate);
BABBLER_DEFINE_ERROR(calibration_failed);
BABBLER_DEFINE_ERROR(uncalibrated_speaker);
BABBLER_DEFINE_ERROR(unknown_paradigm);
BABBLER_DEFINE_ERROR(empty_features);
BABBLER_DEFINE_ERROR(singular_system);
BABBLER_DEFINE_ERROR(untrained_model);
BABBLER_DEFINE_ERROR(dimension_mismatch);
BABBLER_DEFINE_ERROR(config_invalid);
BABBLER_DEFINE_ERROR(format_error);

#undef BABBLER_DEFINE_ERROR

}  // namespace babbler
