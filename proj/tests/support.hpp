#pragma once

// Shared fixtures: a cheaply calibrated infant/adult pair and a small dataset.

#include "babbler/ambient.hpp"
#include "babbler/speakers.hpp"

#include <vector>

namespace babbler::testing {

inline const std::vector<speaker>& small_series()
{
    static const std::vector<speaker> series = [] {
        calibration_options opts;
        opts.budget = 150;
        opts.max_objective = 10.0;
        std::vector<speaker> out;
        for (const auto& s : make_speaker_series())
            if (s.sex == sex::male && (s.age == 0 || s.age == 20))
                out.push_back(calibrate_prototypes_flagged(s, scaled_targets(s), opts));
        return out;
    }();
    return series;
}

inline ambient_options small_ambient()
{
    ambient_options o;
    o.per_class = 4;
    o.nulls = 6;
    o.max_draws = 40;
    return o;
}

inline const dataset_manifest& small_dataset()
{
    static const dataset_manifest m = generate_dataset(small_series(), 3, small_ambient());
    return m;
}

}  // namespace babbler::testing
