#pragma once

// Area-function waveguide vowel synthesizer.
//
// A motor vector is mapped onto a 24-section area function (glottis to lips)
// and a Kelly-Lochbaum scattering lattice is driven by a Rosenberg glottal
// pulse train. Output is always delivered at 22050 Hz.

#include "babbler/motor.hpp"
#include "babbler/speaker.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace babbler {

inline constexpr double output_rate = 22050.0;

struct audio_clip {
    std::vector<double> samples;
    double rate = output_rate;

    double duration() const { return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0; }
    bool empty() const { return samples.empty(); }
    bool silent() const;
    double peak() const;
    double rms() const;
};

struct area_function {
    std::vector<double> areas;  // cm^2, glottis -> lips
    double section_length = 0;  // cm
    bool closed = false;        // some section fully occluded before clamping

    std::size_t sections() const { return areas.size(); }
    double length() const { return section_length * static_cast<double>(areas.size()); }
};

/// Articulator-to-tract constants. Changing any value changes `synth_version_hash()`
/// and invalidates calibrated prototypes.
namespace tract {
inline constexpr int version = 1;
inline constexpr std::size_t sections = 24;
inline constexpr double sound_speed = 35000.0;  // cm/s
inline constexpr double rest_area = 3.0;
inline constexpr double min_area = 0.01;
inline constexpr double max_area = 8.0;
inline constexpr double glottis_reflection = 0.97;
inline constexpr double lip_reflection = -0.90;

inline constexpr double max_protrusion = 0.15;  // fraction of tract length at LP = 1
inline constexpr double ramp_seconds = 0.020;
inline constexpr double output_peak = 0.9;
inline constexpr double max_bump = 0.95;

/// Gaussian constriction: center = center0 + center_span * X, amplitude = gain * (Y - 0.5).
struct bump {
    articulator position;
    articulator height;
    double center0;
    double center_span;
    double width;
    double gain;
};

// Velar bump has a fixed center (span 0); its position index is unused.
inline constexpr bump bumps[] = {
    {articulator::TBX, articulator::TBY, 0.30, 0.45, 0.16, 1.9},  // tongue body
    {articulator::TTX, articulator::TTY, 0.72, 0.20, 0.07, 1.9},  // tongue tip
    {articulator::TCX, articulator::TCY, 0.40, 0.35, 0.12, 1.9},  // tongue center
    {articulator::HX, articulator::HY, 0.08, 0.25, 0.12, 1.9},    // pharynx / hyoid
    {articulator::VS, articulator::VS, 0.62, 0.00, 0.08, 1.6},    // velum
};

inline constexpr double jaw_gain = 0.8;       // front-area factor 1 + gain*(JA-0.5)*ramp
inline constexpr double jaw_start = 0.45;     // ramp begins at this tract fraction
inline constexpr double side_base = 0.6;      // TS factor = base + span*TS
inline constexpr double side_span = 0.8;
inline constexpr std::size_t lip_sections = 2;
inline constexpr double rounding_base = 1.3;  // lip factor 2*LD*(base - span*LP)
inline constexpr double rounding_span = 0.6;
}  // namespace tract

std::uint64_t synth_version_hash();

area_function build_area_function(const motor_vector& m, const speaker& spk);
area_function uniform_tube(double length_cm, double area = tract::rest_area,
                           std::size_t sections = tract::sections);

/// Internal lattice rate c*S/(2L): each section is half a sample long one way.
double waveguide_rate(const area_function& af);

/// Runs the scattering lattice at `waveguide_rate(af)` with the given volume-velocity
/// source. Returns the differenced (radiated) lip signal, same length as the source.
std::vector<double> run_waveguide(const area_function& af, std::span<const double> source);

/// Rosenberg pulse train, open quotient 0.6, speed quotient 2.
audio_clip glottal_pulse_train(double f0, double fs, double duration);

audio_clip resample(const audio_clip& in, double rate);

/// Full pipeline on an explicit area function. Closed tracts yield exact silence.
audio_clip synthesize_area(const area_function& af, double f0, double duration);

audio_clip synthesize_vowel(const motor_vector& m, const speaker& spk, double duration);

}  // namespace babbler
