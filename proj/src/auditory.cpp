#include "babbler/auditory.hpp"

#include "babbler/binary_io.hpp"
#include "babbler/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace babbler {

double erb_bandwidth(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

double hz_to_erb_rate(double hz) { return 21.4 * std::log10(1.0 + 0.00437 * hz); }

double erb_rate_to_hz(double erb) { return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437; }

std::vector<double> erb_center_frequencies(std::size_t channels, double low_hz, double high_hz)
{
    std::vector<double> fc(channels);
    const double lo = hz_to_erb_rate(low_hz);
    const double hi = hz_to_erb_rate(high_hz);
    for (std::size_t c = 0; c < channels; ++c) {
        const double t = channels > 1 ? static_cast<double>(c) / static_cast<double>(channels - 1) : 0.0;
        fc[c] = erb_rate_to_hz(lo + t * (hi - lo));
    }
    fc.front() = low_hz;
    if (channels > 1)
        fc.back() = high_hz;
    return fc;
}

feature_stream filterbank_features(const audio_clip& clip, const filterbank_options& opts)
{
    if (clip.rate != output_rate)
        throw bad_sample_rate("filterbank expects 22050 Hz input");

    const std::size_t nc = opts.channels;
    const std::vector<double> fc = erb_center_frequencies(nc, opts.low_hz, opts.high_hz);
    const double fs = clip.rate;

    // Complex-baseband 4th-order gammatone: heterodyne to DC, four one-pole
    // low-pass stages, remodulate.
    std::vector<double> rot_re(nc), rot_im(nc), ph_re(nc, 1.0), ph_im(nc, 0.0), pole(nc);
    std::vector<double> st_re(4 * nc, 0.0), st_im(4 * nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const double w = 2.0 * std::numbers::pi * fc[c] / fs;
        rot_re[c] = std::cos(w);
        rot_im[c] = -std::sin(w);
        pole[c] = std::exp(-2.0 * std::numbers::pi * 1.019 * erb_bandwidth(fc[c]) / fs);
    }

    const double hop = fs / opts.frame_rate;
    const std::size_t n = clip.samples.size();
    const auto blocks = static_cast<std::size_t>(std::floor(static_cast<double>(n) / hop + 1e-9));
    feature_stream out;
    out.frame_rate = opts.frame_rate;
    if (blocks < 2) {
        out.frames.resize(0, static_cast<Eigen::Index>(nc));
        return out;
    }

    std::vector<double> block_energy(blocks * nc, 0.0);
    std::vector<std::size_t> block_len(blocks, 0);
    std::size_t block = 0;
    auto block_end = static_cast<std::size_t>(std::llround(hop));

    for (std::size_t t = 0; t < n && block < blocks; ++t) {
        if (t >= block_end) {
            ++block;
            if (block >= blocks)
                break;
            block_end = static_cast<std::size_t>(std::llround(hop * static_cast<double>(block + 1)));
        }
        const double x = clip.samples[t];
        double* energy = &block_energy[block * nc];
        for (std::size_t c = 0; c < nc; ++c) {
            double re = x * ph_re[c];
            double im = x * ph_im[c];
            const double a = pole[c];
            const double g = 1.0 - a;
            for (int k = 0; k < 4; ++k) {
                double& sr = st_re[k * nc + c];
                double& si = st_im[k * nc + c];
                sr = g * re + a * sr;
                si = g * im + a * si;
                re = sr;
                im = si;
            }
            // y = 2 Re(s * conj(phasor))
            const double y = 2.0 * (re * ph_re[c] + im * ph_im[c]);
            const double r = y > 0.0 ? y : 0.0;
            energy[c] += r * r;

            const double pr = ph_re[c] * rot_re[c] - ph_im[c] * rot_im[c];
            const double pi = ph_re[c] * rot_im[c] + ph_im[c] * rot_re[c];
            ph_re[c] = pr;
            ph_im[c] = pi;
        }
        ++block_len[block];
        if ((t & 1023) == 1023) {
            for (std::size_t c = 0; c < nc; ++c) {
                const double mag = std::hypot(ph_re[c], ph_im[c]);
                ph_re[c] /= mag;
                ph_im[c] /= mag;
            }
        }
    }

    const std::size_t frames = blocks - 1;
    out.frames.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(nc));
    for (std::size_t f = 0; f < frames; ++f) {
        const double len = static_cast<double>(block_len[f] + block_len[f + 1]);
        for (std::size_t c = 0; c < nc; ++c) {
            const double power = (block_energy[f * nc + c] + block_energy[(f + 1) * nc + c]) / len;
            out.frames(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) =
                opts.compression == 1.0 ? power : std::pow(power, opts.compression);
        }
    }
    return out;
}

std::vector<double> burg_lpc(std::span<const double> x, int order)
{
    const std::size_t n = x.size();
    const auto m = static_cast<std::size_t>(order);
    std::vector<double> a(m + 1, 0.0);
    a[0] = 1.0;
    if (n <= m + 1)
        return a;

    std::vector<double> f(x.begin(), x.end()), b(x.begin(), x.end());
    double dk = 0.0;
    for (double v : x)
        dk += 2.0 * v * v;
    dk -= x[0] * x[0] + x[n - 1] * x[n - 1];

    for (std::size_t k = 0; k < m; ++k) {
        if (dk <= 0.0)
            break;
        double mu = 0.0;
        for (std::size_t i = 0; i + k + 1 < n; ++i)
            mu += f[i + k + 1] * b[i];
        mu *= -2.0 / dk;

        for (std::size_t i = 0; i <= (k + 1) / 2; ++i) {
            const double t1 = a[i] + mu * a[k + 1 - i];
            const double t2 = a[k + 1 - i] + mu * a[i];
            a[i] = t1;
            a[k + 1 - i] = t2;
        }
        for (std::size_t i = 0; i + k + 1 < n; ++i) {
            const double t1 = f[i + k + 1] + mu * b[i];
            const double t2 = b[i] + mu * f[i + k + 1];
            f[i + k + 1] = t1;
            b[i] = t2;
        }
        dk = (1.0 - mu * mu) * dk - f[k + 1] * f[k + 1] - b[n - k - 2] * b[n - k - 2];
    }
    return a;
}

std::vector<std::pair<double, double>> lpc_resonances(std::span<const double> a, double fs)
{
    std::vector<std::pair<double, double>> out;
    const auto p = static_cast<Eigen::Index>(a.size()) - 1;
    if (p < 2)
        return out;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        companion(0, j) = -a[static_cast<std::size_t>(j + 1)];
    for (Eigen::Index j = 1; j < p; ++j)
        companion(j, j - 1) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        return out;
    for (const auto& z : solver.eigenvalues()) {
        if (z.imag() <= 0.0)
            continue;
        const double freq = std::arg(z) * fs / (2.0 * std::numbers::pi);
        const double bw = -std::log(std::abs(z)) * fs / std::numbers::pi;
        out.emplace_back(freq, bw);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<formant_pair> frame_formants(const audio_clip& clip, const formant_options& opts)
{
    std::vector<formant_pair> result;
    if (clip.samples.empty() || clip.silent())
        return result;

    const audio_clip low = resample(clip, opts.analysis_rate);
    const double fs = low.rate;
    std::vector<double> x(low.samples.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = low.samples[i] - (i > 0 ? opts.preemphasis * low.samples[i - 1] : 0.0);

    const auto frame = static_cast<std::size_t>(std::llround(opts.frame_seconds * fs));
    const auto hop = static_cast<std::size_t>(std::llround(opts.hop_seconds * fs));
    if (x.size() < frame || hop == 0)
        return result;

    std::vector<double> window(frame);
    for (std::size_t i = 0; i < frame; ++i)
        window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(frame - 1));

    std::vector<std::vector<double>> frames;
    std::vector<double> energy;
    for (std::size_t start = 0; start + frame <= x.size(); start += hop) {
        std::vector<double> seg(frame);
        double e = 0.0;
        for (std::size_t i = 0; i < frame; ++i) {
            seg[i] = x[start + i] * window[i];
            e += seg[i] * seg[i];
        }
        frames.push_back(std::move(seg));
        energy.push_back(e);
    }
    const double loudest = *std::max_element(energy.begin(), energy.end());
    if (!(loudest > 0.0))
        return result;

    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (energy[k] < opts.voicing_floor * loudest)
            continue;
        const auto a = burg_lpc(frames[k], opts.lpc_order);
        std::vector<double> freqs;
        for (const auto& [f, bw] : lpc_resonances(a, fs))
            if (bw < opts.max_bandwidth && f > opts.min_frequency && f < fs / 2.0 - 50.0)
                freqs.push_back(f);
        if (freqs.size() >= 2)
            result.push_back({freqs[0], freqs[1]});
    }
    return result;
}

namespace {

double median(std::vector<double> v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

}  // namespace

formant_estimate aggregate_formants(std::span<const formant_pair> frames, std::size_t min_frames,
                                    double f2_ceiling)
{
    formant_estimate est;
    if (frames.size() < std::max<std::size_t>(min_frames, 1))
        return est;
    std::vector<double> f1, f2;
    for (const auto& f : frames) {
        f1.push_back(f.f1);
        f2.push_back(f.f2);
    }
    est.f1 = median(std::move(f1));
    est.f2 = median(std::move(f2));
    est.valid = est.f1 > 100.0 && est.f1 < est.f2 && est.f2 < f2_ceiling;
    return est;
}

formant_estimate extract_formants(const audio_clip& clip, const formant_options& opts)
{
    const auto frames = frame_formants(clip, opts);
    return aggregate_formants(frames, opts.min_frames, opts.analysis_rate / 2.0);
}

formant_options formant_options_for(const speaker& spk, formant_options base)
{
    base.analysis_rate = std::min(output_rate, base.analysis_rate * 17.0 / spk.tract_length);
    return base;
}

double formant_distance(const formant_pair& measured, const formant_pair& reference)
{
    return std::abs(measured.f1 - reference.f1) / reference.f1 +
           std::abs(measured.f2 - reference.f2) / reference.f2;
}

void write_feature_cache(const std::filesystem::path& path, const feature_stream& fs)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw format_error("cannot open feature cache for writing: " + path.string());
    le::put<std::uint32_t>(os, static_cast<std::uint32_t>(fs.frames.rows()));
    le::put<std::uint32_t>(os, static_cast<std::uint32_t>(fs.frames.cols()));
    le::put<double>(os, fs.frame_rate);
    for (Eigen::Index r = 0; r < fs.frames.rows(); ++r)
        for (Eigen::Index c = 0; c < fs.frames.cols(); ++c)
            le::put<float>(os, static_cast<float>(fs.frames(r, c)));
}

feature_stream read_feature_cache(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw format_error("cannot open feature cache: " + path.string());
    feature_stream fs;
    const auto rows = le::get<std::uint32_t>(is);
    const auto cols = le::get<std::uint32_t>(is);
    fs.frame_rate = le::get<double>(is);
    fs.frames.resize(rows, cols);
    for (Eigen::Index r = 0; r < fs.frames.rows(); ++r)
        for (Eigen::Index c = 0; c < fs.frames.cols(); ++c)
            fs.frames(r, c) = le::get<float>(is);
    return fs;
}

}  // namespace babbler
