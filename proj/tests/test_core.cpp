#include "babbler/errors.hpp"
#include "babbler/motor.hpp"
#include "babbler/random.hpp"
#include "babbler/speaker.hpp"
#include "babbler/vowel.hpp"

#include <doctest.h>

#include <set>

using namespace babbler;

TEST_CASE("vowel names round-trip")
{
    for (vowel v : {vowel::a, vowel::e, vowel::i, vowel::o, vowel::u, vowel::schwa, vowel::null})
        CHECK(parse_vowel(to_string(v)) == v);
    CHECK(parse_vowel("@") == vowel::schwa);
    CHECK(parse_vowel("schwa") == vowel::schwa);
    CHECK_FALSE(parse_vowel("y").has_value());
}

TEST_CASE("class lists")
{
    CHECK(four_classes() == std::vector<vowel>{vowel::a, vowel::i, vowel::u, vowel::null});
    CHECK(six_classes() == std::vector<vowel>{vowel::a, vowel::e, vowel::i, vowel::o, vowel::u, vowel::null});
}

TEST_CASE("motor vectors")
{
    const auto n = motor_vector::neutral();
    for (double v : n.values)
        CHECK(v == 0.5);
    CHECK(motor_dims == 16);
    CHECK(articulator_names[index_of(articulator::JA)] == "JA");

    motor_vector m = n;
    m[articulator::LD] = 1.7;
    m[std::size_t{0}] = -0.2;
    const auto c = m.clamped();
    CHECK(c[articulator::LD] == 1.0);
    CHECK(c[std::size_t{0}] == 0.0);
    CHECK(c[articulator::JA] == 0.5);
}

TEST_CASE("speaker ids and prototype access")
{
    speaker s;
    s.age = 4;
    s.sex = sex::female;
    CHECK(s.id() == "f04");
    CHECK_FALSE(s.calibrated());
    CHECK_THROWS_AS(s.prototype(vowel::a), uncalibrated_speaker);
    CHECK_THROWS_AS(s.formants_of(vowel::a), uncalibrated_speaker);
}

TEST_CASE("splitmix64 reference output")
{
    // First output of the reference generator seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("derived seeds are deterministic and distinct")
{
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 10; ++a)
        for (std::uint64_t b = 0; b < 10; ++b)
            seen.insert(derive_seed(7, {a, b}));
    CHECK(seen.size() == 100);
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
    CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
}
