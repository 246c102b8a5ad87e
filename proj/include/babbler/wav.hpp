#pragma once

#include "babbler/synth.hpp"

#include <filesystem>

namespace babbler {

/// RIFF WAVE, mono, 16-bit PCM. Samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const audio_clip& clip);
audio_clip read_wav(const std::filesystem::path& path);

}  // namespace babbler
