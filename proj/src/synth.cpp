#include "babbler/synth.hpp"

#include "babbler/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numbers>

namespace babbler {

namespace {

double gaussian_bump(double x, double center, double width)
{
    const double d = (x - center) / width;
    return std::exp(-d * d);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename T>
std::uint64_t fnv1a(std::uint64_t h, const T& v)
{
    return fnv1a(h, &v, sizeof v);
}

// Windowed-sinc kernel tabulated over normalized time u = 2*fc*d in [0, zero_crossings].
constexpr int zero_crossings = 8;
constexpr int table_density = 512;

const std::vector<double>& sinc_table()
{
    static const std::vector<double> table = [] {
        const int n = zero_crossings * table_density + 2;
        std::vector<double> t(n);
        const double beta = 8.0;
        auto bessel_i0 = [](double x) {
            double sum = 1.0, term = 1.0;
            for (int k = 1; k < 50; ++k) {
                term *= (x / (2.0 * k)) * (x / (2.0 * k));
                sum += term;
            }
            return sum;
        };
        const double norm = bessel_i0(beta);
        for (int i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / table_density;
            const double r = u / zero_crossings;
            const double window = r < 1.0 ? bessel_i0(beta * std::sqrt(1.0 - r * r)) / norm : 0.0;
            const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
            t[i] = sinc * window;
        }
        return t;
    }();
    return table;
}

}  // namespace

bool audio_clip::silent() const
{
    return std::all_of(samples.begin(), samples.end(), [](double s) { return s == 0.0; });
}

double audio_clip::peak() const
{
    double p = 0.0;
    for (double s : samples)
        p = std::max(p, std::abs(s));
    return p;
}

double audio_clip::rms() const
{
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (double s : samples)
        acc += s * s;
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::uint64_t synth_version_hash()
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, tract::version);
    h = fnv1a(h, tract::sections);
    for (double v : {tract::sound_speed, tract::rest_area, tract::min_area, tract::max_area,
                     tract::glottis_reflection, tract::lip_reflection, tract::max_protrusion,
                     tract::ramp_seconds, tract::output_peak, tract::max_bump, tract::jaw_gain,
                     tract::jaw_start, tract::side_base, tract::side_span, tract::rounding_base,
                     tract::rounding_span})
        h = fnv1a(h, v);
    for (const auto& b : tract::bumps) {
        h = fnv1a(h, b.position);
        h = fnv1a(h, b.height);
        for (double v : {b.center0, b.center_span, b.width, b.gain})
            h = fnv1a(h, v);
    }
    return h;
}

area_function build_area_function(const motor_vector& raw, const speaker& spk)
{
    const motor_vector m = raw.clamped();
    const std::size_t n = tract::sections;
    const double length = spk.tract_length * (1.0 + tract::max_protrusion * m[articulator::LP]);

    area_function af;
    af.areas.resize(n);
    af.section_length = length / static_cast<double>(n);

    const double jaw = m[articulator::JA] - 0.5;
    const double side[4] = {m[articulator::TS1], m[articulator::TS2], m[articulator::TS3],
                            m[articulator::TS4]};

    for (std::size_t s = 0; s < n; ++s) {
        const double x = (static_cast<double>(s) + 0.5) / static_cast<double>(n);
        double area = tract::rest_area;

        const double ramp = std::clamp((x - tract::jaw_start) / (1.0 - tract::jaw_start), 0.0, 1.0);
        area *= 1.0 + tract::jaw_gain * jaw * ramp;

        for (const auto& b : tract::bumps) {
            const double center = b.center0 + b.center_span * m[b.position];
            const double amp = std::clamp(b.gain * (m[b.height] - 0.5), -tract::max_bump, tract::max_bump);
            area *= 1.0 - amp * gaussian_bump(x, center, b.width);
        }

        area *= tract::side_base + tract::side_span * side[std::min<std::size_t>(s * 4 / n, 3)];

        if (s >= n - tract::lip_sections)
            area *= 2.0 * m[articulator::LD] *
                    (tract::rounding_base - tract::rounding_span * m[articulator::LP]);

        if (area < tract::min_area)
            af.closed = true;
        af.areas[s] = std::clamp(area, tract::min_area, tract::max_area);
    }
    return af;
}

area_function uniform_tube(double length_cm, double area, std::size_t sections)
{
    area_function af;
    af.areas.assign(sections, area);
    af.section_length = length_cm / static_cast<double>(sections);
    return af;
}

double waveguide_rate(const area_function& af)
{
    return tract::sound_speed * static_cast<double>(af.sections()) / (2.0 * af.length());
}

std::vector<double> run_waveguide(const area_function& af, std::span<const double> source)
{
    const std::size_t n = af.sections();
    std::vector<double> k(n > 0 ? n - 1 : 0);
    for (std::size_t s = 0; s + 1 < n; ++s)
        k[s] = (af.areas[s] - af.areas[s + 1]) / (af.areas[s] + af.areas[s + 1]);

    // right[s]: wave arriving at the lip side of section s; left[s]: at its glottis side.
    // Two half-steps per output sample; one half-step moves each wave one section.
    std::vector<double> right(n, 0.0), left(n, 0.0), new_right(n), new_left(n);
    std::vector<double> out(source.size());
    double previous = 0.0;

    for (std::size_t t = 0; t < source.size(); ++t) {
        double lips = 0.0;
        for (int half = 0; half < 2; ++half) {
            new_right[0] = tract::glottis_reflection * left[0] + source[t];
            for (std::size_t s = 0; s + 1 < n; ++s) {
                const double f = right[s];
                const double b = left[s + 1];
                new_right[s + 1] = (1.0 + k[s]) * f - k[s] * b;
                new_left[s] = k[s] * f + (1.0 - k[s]) * b;
            }
            new_left[n - 1] = tract::lip_reflection * right[n - 1];
            lips += (1.0 + tract::lip_reflection) * right[n - 1];
            std::swap(right, new_right);
            std::swap(left, new_left);
        }
        lips *= 0.5;
        out[t] = lips - previous;
        previous = lips;
    }
    return out;
}

audio_clip glottal_pulse_train(double f0, double fs, double duration)
{
    if (!(f0 >= 50.0 && f0 <= 600.0))
        throw f0_out_of_range("f0 must lie in [50, 600] Hz");
    if (!(fs >= 8000.0))
        throw bad_sample_rate("glottal source needs fs >= 8000 Hz");

    audio_clip clip;
    clip.rate = fs;
    const auto total = static_cast<std::size_t>(std::llround(duration * fs));
    clip.samples.assign(total, 0.0);

    const double period = fs / f0;
    double carry = 0.0;
    std::size_t start = 0;
    while (start < total) {
        const double exact = period + carry;
        const auto len = static_cast<std::size_t>(std::max<long long>(2, std::llround(exact)));
        carry = exact - static_cast<double>(len);

        const double open = 0.6 * static_cast<double>(len);
        const double rise = open * 2.0 / 3.0;
        const double fall = open - rise;
        for (std::size_t j = 0; j < len && start + j < total; ++j) {
            const double t = static_cast<double>(j);
            double g = 0.0;
            if (t < rise)
                g = 0.5 * (1.0 - std::cos(std::numbers::pi * t / rise));
            else if (t < open)
                g = std::cos(std::numbers::pi * (t - rise) / (2.0 * fall));
            clip.samples[start + j] = g;
        }
        start += len;
    }
    return clip;
}

audio_clip resample(const audio_clip& in, double rate)
{
    if (in.rate == rate)
        return in;
    const double ratio = rate / in.rate;
    const double cutoff = 0.5 * std::min(1.0, ratio) * 0.92;  // cycles per input sample
    const double scale = 2.0 * cutoff;
    const double half_width = zero_crossings / scale;  // in input samples
    const auto& table = sinc_table();

    audio_clip out;
    out.rate = rate;
    const auto n_out = static_cast<std::size_t>(std::llround(in.duration() * rate));
    out.samples.assign(n_out, 0.0);
    const auto n_in = static_cast<long long>(in.samples.size());

    for (std::size_t j = 0; j < n_out; ++j) {
        const double t = static_cast<double>(j) / ratio;
        const auto lo = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_width)));
        const auto hi = std::min<long long>(n_in - 1, static_cast<long long>(std::floor(t + half_width)));
        double acc = 0.0;
        for (long long i = lo; i <= hi; ++i) {
            const double u = std::abs(t - static_cast<double>(i)) * scale * table_density;
            const auto idx = static_cast<std::size_t>(u);
            if (idx + 1 >= table.size())
                continue;
            const double frac = u - static_cast<double>(idx);
            acc += in.samples[static_cast<std::size_t>(i)] * (table[idx] + frac * (table[idx + 1] - table[idx]));
        }
        out.samples[j] = acc * scale;
    }
    return out;
}

audio_clip synthesize_area(const area_function& af, double f0, double duration)
{
    if (!(duration >= 0.1 && duration <= 2.0))
        throw duration_out_of_range("clip duration must lie in [0.1, 2.0] s");

    if (af.closed) {
        audio_clip silence;
        silence.samples.assign(static_cast<std::size_t>(std::llround(duration * output_rate)), 0.0);
        return silence;
    }

    const double fs = waveguide_rate(af);
    audio_clip source = glottal_pulse_train(f0, fs, duration);
    const auto ramp = static_cast<std::size_t>(tract::ramp_seconds * fs);
    const std::size_t len = source.samples.size();
    for (std::size_t j = 0; j < std::min(ramp, len); ++j) {
        const double g = static_cast<double>(j) / static_cast<double>(ramp);
        source.samples[j] *= g;
        source.samples[len - 1 - j] *= g;
    }

    audio_clip radiated;
    radiated.rate = fs;
    radiated.samples = run_waveguide(af, source.samples);
    audio_clip out = resample(radiated, output_rate);

    const double p = out.peak();
    if (p > 0.0 && std::isfinite(p))
        for (double& s : out.samples)
            s *= tract::output_peak / p;
    return out;
}

audio_clip synthesize_vowel(const motor_vector& m, const speaker& spk, double duration)
{
    return synthesize_area(build_area_function(m, spk), spk.f0, duration);
}

}  // namespace babbler
