#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace babbler {

/// Indices of the 16 free articulator parameters.
enum class articulator : std::size_t {
    TBX, TBY, TTX, TTY, TCX, TCY, TS1, TS2, TS3, TS4, LD, LP, HX, HY, JA, VS
};

inline constexpr std::size_t motor_dims = 16;

inline constexpr std::array<std::string_view, motor_dims> articulator_names{
    "TBX", "TBY", "TTX", "TTY", "TCX", "TCY", "TS1", "TS2",
    "TS3", "TS4", "LD",  "LP",  "HX",  "HY",  "JA",  "VS"};

/// A point in the normalized motor hypercube. Values may leave [0,1] while
/// optimizing; synthesis clamps, the reward penalizes.
struct motor_vector {
    std::array<double, motor_dims> values{};

    static motor_vector neutral()
    {
        motor_vector m;
        m.values.fill(0.5);
        return m;
    }

    double& operator[](articulator a) { return values[static_cast<std::size_t>(a)]; }
    double operator[](articulator a) const { return values[static_cast<std::size_t>(a)]; }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    std::span<const double, motor_dims> span() const { return values; }

    /// Copy with every coordinate clamped to [0,1].
    motor_vector clamped() const;

    friend bool operator==(const motor_vector&, const motor_vector&) = default;
};

inline constexpr std::size_t index_of(articulator a) { return static_cast<std::size_t>(a); }

}  // namespace babbler
