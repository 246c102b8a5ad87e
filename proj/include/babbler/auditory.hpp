#pragma once

#include "babbler/speaker.hpp"
#include "babbler/synth.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <vector>

namespace babbler {

inline constexpr std::size_t feature_channels = 50;

/// Frames x channels matrix of non-negative compressed channel energies.
struct feature_stream {
    Eigen::MatrixXd frames;  // T x 50
    double frame_rate = 100.0;

    Eigen::Index size() const { return frames.rows(); }
};

struct filterbank_options {
    std::size_t channels = feature_channels;
    double low_hz = 100.0;
    double high_hz = 8000.0;
    double frame_rate = 100.0;
    double compression = 0.3;  // exponent applied to frame power; 1 keeps raw power
};

double erb_bandwidth(double hz);
double hz_to_erb_rate(double hz);
double erb_rate_to_hz(double erb);
std::vector<double> erb_center_frequencies(std::size_t channels, double low_hz, double high_hz);

feature_stream filterbank_features(const audio_clip& clip, const filterbank_options& opts = {});

struct formant_options {
    int lpc_order = 12;
    double analysis_rate = 10000.0;
    double frame_seconds = 0.025;
    double hop_seconds = 0.010;
    double preemphasis = 0.97;
    double max_bandwidth = 400.0;
    double min_frequency = 100.0;
    double voicing_floor = 1e-3;  // frame energy relative to loudest frame
    std::size_t min_frames = 3;
};

struct formant_estimate {
    double f1 = 0.0;
    double f2 = 0.0;
    bool valid = false;
};

/// Burg LPC. Returns a(0..order) with a(0) = 1 for A(z) = sum a(k) z^-k.
std::vector<double> burg_lpc(std::span<const double> x, int order);

/// Resonances of 1/A(z) at rate fs, sorted by frequency: (frequency, bandwidth) pairs.
std::vector<std::pair<double, double>> lpc_resonances(std::span<const double> a, double fs);

/// Per-frame (F1, F2) for every usable frame of the clip.
std::vector<formant_pair> frame_formants(const audio_clip& clip, const formant_options& opts = {});

/// Median over frames; invalid when fewer than `min_frames` frames are supplied.
formant_estimate aggregate_formants(std::span<const formant_pair> frames, std::size_t min_frames = 3,
                                    double f2_ceiling = 5000.0);

formant_estimate extract_formants(const audio_clip& clip, const formant_options& opts = {});

/// Analysis settings for a speaker: the analysis rate (and so the formant ceiling) scales
/// with 17 cm / tract length, capped at the clip rate.
formant_options formant_options_for(const speaker& spk, formant_options base = {});

/// Relative formant distance |F1-F1'|/F1' + |F2-F2'|/F2'.
double formant_distance(const formant_pair& measured, const formant_pair& reference);

/// Flat little-endian cache: u32 T, u32 channels, f64 frame_rate, then T*channels f32 row-major.
void write_feature_cache(const std::filesystem::path& path, const feature_stream& fs);
feature_stream read_feature_cache(const std::filesystem::path& path);

}  // namespace babbler
