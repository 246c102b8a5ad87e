#include "babbler/config.hpp"
#include "babbler/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

using namespace babbler;

TEST_CASE("defaults cover every key")
{
    const run_config cfg;
    std::set<std::string> names;
    for (const auto& k : config_keys()) {
        CHECK(names.insert(k.name).second);
        CHECK(cfg.has(k.name));
        CHECK(cfg.text(k.name) == k.fallback);
        CHECK_FALSE(k.help.empty());
    }
    CHECK(cfg.integer("seed") == 1);
    CHECK(cfg.integer("caregiver.generation_size") == 50);
    CHECK(cfg.integer("caregiver.imitations") == 5);
    CHECK(cfg.integer("caregiver.window_cap") == 200);
    CHECK(cfg.real("esn.spectral_radius") == 0.9);
    CHECK(cfg.real("esn.leak") == 0.3);
    CHECK(cfg.real("learn.threshold") == 0.5);
    CHECK(cfg.boolean("learn.switching"));
    CHECK(cfg.int_list("train.sizes") == std::vector<std::int64_t>{1, 10, 50, 100});
    CHECK(cfg.int_list("speakers.ages").empty());
    CHECK(cfg.text_list("learn.targets") == std::vector<std::string>{"a", "e", "i", "o", "u"});
}

TEST_CASE("parsing")
{
    const auto cfg = run_config::from_text(R"(
# a comment
seed = 42
learn.mode = "full16"   # trailing comment
paths.runs = "out # not a comment"
train.sizes = 10, 20
learn.switching = false
)");
    CHECK(cfg.integer("seed") == 42);
    CHECK(cfg.text("learn.mode") == "full16");
    CHECK(cfg.text("paths.runs") == "out # not a comment");
    CHECK(cfg.int_list("train.sizes") == std::vector<std::int64_t>{10, 20});
    CHECK_FALSE(cfg.boolean("learn.switching"));

    const auto path = std::filesystem::temp_directory_path() / "babbler_config_test.cfg";
    {
        std::ofstream os(path);
        os << "esn.size = 30\n";
    }
    CHECK(run_config::from_file(path).integer("esn.size") == 30);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(run_config::from_file(path), config_invalid);
}

TEST_CASE("unknown keys and bad values are rejected")
{
    CHECK_THROWS_AS(run_config::from_text("not.a.key = 1"), config_invalid);
    CHECK_THROWS_AS(run_config::from_text("seed"), config_invalid);
    run_config cfg;
    CHECK_THROWS_AS(cfg.set("esn.sise", "10"), config_invalid);
    CHECK_THROWS_AS(cfg.set("seed", "twelve"), config_invalid);
    CHECK_THROWS_AS(cfg.set("esn.leak", "fast"), config_invalid);
    CHECK_THROWS_AS(cfg.set("learn.switching", "maybe"), config_invalid);
    CHECK_THROWS_AS(cfg.set("train.sizes", "1,x"), config_invalid);
    CHECK_THROWS_AS(cfg.text("nope"), config_invalid);
    CHECK_THROWS_AS(cfg.integer("esn.leak"), config_invalid);
    cfg.set("seed", "-3");
    CHECK_THROWS_AS(cfg.unsigned_integer("seed"), config_invalid);
}

TEST_CASE("config hash")
{
    run_config a, b;
    CHECK(a.hash() == b.hash());
    CHECK(std::regex_match(a.hash(), std::regex("[0-9a-f]{16}")));
    b.set("esn.ridge", "1e-3");
    CHECK(a.hash() != b.hash());
    b = a;
    b.set("jobs", "8");
    CHECK(a.hash() == b.hash());
    CHECK(a.canonical().find("seed=1\n") != std::string::npos);
}

TEST_CASE("provenance header")
{
    const run_config cfg;
    const auto h = provenance_header(cfg);
    CHECK(std::regex_match(h, std::regex("# config_hash=[0-9a-f]{16} synth_version=[0-9a-f]{16}")));
    CHECK(h.find(cfg.hash()) != std::string::npos);
    CHECK(provenance_header(cfg.hash()) == h);
}
