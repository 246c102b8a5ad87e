#include "babbler/errors.hpp"
#include "babbler/motor.hpp"
#include "babbler/speaker.hpp"
#include "babbler/vowel.hpp"

#include <algorithm>
#include <cstdio>

namespace babbler {

std::string_view to_string(vowel v)
{
    switch (v) {
    case vowel::a: return "a";
    case vowel::e: return "e";
    case vowel::i: return "i";
    case vowel::o: return "o";
    case vowel::u: return "u";
    case vowel::schwa: return "@";
    case vowel::null: return "null";
    }
    return "?";
}

std::optional<vowel> parse_vowel(std::string_view s)
{
    for (vowel v : {vowel::a, vowel::e, vowel::i, vowel::o, vowel::u, vowel::schwa, vowel::null})
        if (s == to_string(v))
            return v;
    if (s == "schwa")
        return vowel::schwa;
    return std::nullopt;
}

std::vector<vowel> four_classes() { return {vowel::a, vowel::i, vowel::u, vowel::null}; }

std::vector<vowel> six_classes()
{
    return {vowel::a, vowel::e, vowel::i, vowel::o, vowel::u, vowel::null};
}

motor_vector motor_vector::clamped() const
{
    motor_vector out = *this;
    for (double& v : out.values)
        v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::string_view to_string(sex s) { return s == sex::male ? "male" : "female"; }

std::string speaker::id() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%02d", sex == sex::male ? 'm' : 'f', age);
    return buf;
}

const motor_vector& speaker::prototype(vowel v) const
{
    auto it = prototypes.find(v);
    if (it == prototypes.end())
        throw uncalibrated_speaker("speaker " + id() + " has no /" + std::string(to_string(v)) +
                                   "/ prototype");
    return it->second;
}

const formant_pair& speaker::formants_of(vowel v) const
{
    auto it = prototype_formants.find(v);
    if (it == prototype_formants.end())
        throw uncalibrated_speaker("speaker " + id() + " has no formants for /" +
                                   std::string(to_string(v)) + "/");
    return it->second;
}

}  // namespace babbler
