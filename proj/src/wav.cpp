#include "babbler/wav.hpp"

#include "babbler/binary_io.hpp"
#include "babbler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace babbler {

void write_wav(const std::filesystem::path& path, const audio_clip& clip)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw format_error("cannot write " + path.string());
    const auto rate = static_cast<std::uint32_t>(std::lround(clip.rate));
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    os.write("RIFF", 4);
    le::put<std::uint32_t>(os, 36 + data_bytes);
    os.write("WAVEfmt ", 8);
    le::put<std::uint32_t>(os, 16);
    le::put<std::uint16_t>(os, 1);  // PCM
    le::put<std::uint16_t>(os, 1);  // mono
    le::put<std::uint32_t>(os, rate);
    le::put<std::uint32_t>(os, rate * 2);
    le::put<std::uint16_t>(os, 2);
    le::put<std::uint16_t>(os, 16);
    os.write("data", 4);
    le::put<std::uint32_t>(os, data_bytes);
    for (double s : clip.samples)
        le::put<std::int16_t>(os, static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * 32767.0)));
}

audio_clip read_wav(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw format_error("cannot read " + path.string());
    char tag[4];
    auto expect = [&](const char* want) {
        if (!is.read(tag, 4) || !std::equal(tag, tag + 4, want))
            throw format_error(path.string() + ": not a RIFF WAVE file");
    };
    expect("RIFF");
    le::get<std::uint32_t>(is);
    expect("WAVE");

    audio_clip clip;
    std::uint16_t channels = 0, bits = 0;
    while (is.read(tag, 4)) {
        const auto size = le::get<std::uint32_t>(is);
        const std::string id(tag, 4);
        if (id == "fmt ") {
            const auto format = le::get<std::uint16_t>(is);
            channels = le::get<std::uint16_t>(is);
            clip.rate = le::get<std::uint32_t>(is);
            le::get<std::uint32_t>(is);
            le::get<std::uint16_t>(is);
            bits = le::get<std::uint16_t>(is);
            if (format != 1 || channels != 1 || bits != 16)
                throw format_error(path.string() + ": only mono 16-bit PCM is supported");
            is.ignore(size - 16);
        } else if (id == "data") {
            if (channels == 0)
                throw format_error(path.string() + ": data chunk before fmt chunk");
            clip.samples.resize(size / 2);
            for (double& s : clip.samples)
                s = le::get<std::int16_t>(is) / 32767.0;
            return clip;
        } else {
            is.ignore(size + (size & 1));
        }
    }
    throw format_error(path.string() + ": missing data chunk");
}

}  // namespace babbler
