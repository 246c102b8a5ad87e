#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace babbler {

/// Phone classes. `schwa` is a prototype gesture only and never a class label.
enum class vowel : std::uint8_t { a, e, i, o, u, schwa, null };

inline constexpr std::array<vowel, 5> core_vowels{vowel::a, vowel::e, vowel::i, vowel::o, vowel::u};
inline constexpr std::array<vowel, 6> prototype_vowels{vowel::a, vowel::e, vowel::i,
                                                       vowel::o, vowel::u, vowel::schwa};

std::string_view to_string(vowel v);
std::optional<vowel> parse_vowel(std::string_view s);

/// Class list for a classifier: {a,i,u,null} or {a,e,i,o,u,null}.
std::vector<vowel> four_classes();
std::vector<vowel> six_classes();

}  // namespace babbler
