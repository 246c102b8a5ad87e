#include "babbler/config.hpp"

#include "babbler/errors.hpp"
#include "babbler/synth.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace babbler {

const std::vector<config_key>& config_keys()
{
    using k = value_kind;
    static const std::vector<config_key> keys{
        {"seed", k::integer, "1", "master seed for every random stream"},
        {"jobs", k::integer, "1", "worker threads"},

        {"paths.speakers", k::text, "data/speakers.jsonl", "speaker series"},
        {"paths.manifest", k::text, "data/ambient/manifest.jsonl", "ambient dataset manifest"},
        {"paths.features", k::text, "cache/features", "feature cache directory"},
        {"paths.models", k::text, "models", "trained classifiers"},
        {"paths.reports", k::text, "reports", "CSV reports"},
        {"paths.runs", k::text, "runs", "learner and caregiver runs"},

        {"speakers.ages", k::int_list, "all", "ages to generate (even 0..20) or all"},
        {"speakers.sex", k::text, "both", "male, female or both"},
        {"calibration.budget", k::integer, "500", "objective evaluations per vowel"},
        {"calibration.max_objective", k::real, "0.5", "acceptance bound on the formant objective"},

        {"ambient.per_class", k::integer, "16", "in-class samples per speaker and vowel"},
        {"ambient.nulls", k::integer, "16", "wide draws per speaker"},
        {"ambient.sigma_in", k::real, "0.01", "in-class sampling deviation"},
        {"ambient.sigma_null", k::real, "0.2", "wide sampling deviation"},
        {"ambient.tau", k::real, "0.18", "labeling distance threshold"},
        {"ambient.max_draws", k::integer, "200", "rejection cap per in-class sample"},
        {"ambient.clip_seconds", k::real, "0.5", "ambient clip duration"},
        {"ambient.write_wav", k::boolean, "true", "write ambient clips as WAV"},

        {"esn.size", k::integer, "100", "reservoir size for learn/caregiver models"},
        {"esn.spectral_radius", k::real, "0.9", "reservoir spectral radius"},
        {"esn.leak", k::real, "0.3", "leak rate"},
        {"esn.density", k::real, "0.1", "reservoir connection density"},
        {"esn.input_scale", k::real, "0.5", "input weight range"},
        {"esn.ridge", k::real, "1e-4", "readout ridge"},

        {"train.sizes", k::int_list, "1,10,50,100", "reservoir sizes to sweep"},
        {"train.paradigms", k::int_list, "1,2,3,4", "training paradigms"},
        {"train.trials", k::integer, "10", "trials per (size, paradigm)"},
        {"train.grid_trials", k::integer, "30", "trials per leave-out grid cell"},

        {"learn.model", k::text, "models/paradigm3_n100.besn", "classifier used as the learner's ear"},
        {"learn.speaker", k::text, "m20", "vocal tract used to babble"},
        {"learn.targets", k::text_list, "a,e,i,o,u", "vowels to learn"},
        {"learn.mode", k::text, "guided13", "full16 or guided13"},
        {"learn.budget", k::integer, "1000", "generations for the whole target set"},
        {"learn.lambda", k::integer, "10", "offspring per generation"},
        {"learn.mu", k::integer, "0", "parents (0 = lambda/2)"},
        {"learn.sigma0", k::real, "0.3", "initial step size"},
        {"learn.threshold", k::real, "0.5", "reward at which a target counts as learned"},
        {"learn.switching", k::boolean, "true", "intrinsic target switching"},
        {"learn.effort", k::real, "0.01", "effort penalty weight"},
        {"learn.boundary", k::real, "10", "boundary penalty weight"},
        {"learn.clip_seconds", k::real, "0.5", "babble duration"},

        {"caregiver.generations", k::integer, "50", "loop generations"},
        {"caregiver.generation_size", k::integer, "50", "N_G, offspring per generation"},
        {"caregiver.imitations", k::integer, "5", "N_I, imitations per generation"},
        {"caregiver.window_cap", k::integer, "200", "retained infant samples"},
        {"caregiver.schedule", k::text, "always", "always, never or alternate:<k>"},
        {"caregiver.infant", k::text, "m00", "infant speaker"},
        {"caregiver.adult", k::text, "m20", "caregiver speaker"},
        {"caregiver.infant_min_age", k::integer, "4", "youngest age in the infant's ambient training"},
        {"caregiver.mode", k::text, "full16", "full16 or guided13"},
        {"caregiver.targets", k::text_list, "a,e,i,o,u", "infant targets"},
    };
    return keys;
}

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

bool parse_int(const std::string& s, std::int64_t& v)
{
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_real(const std::string& s, double& v)
{
    if (s.empty())
        return false;
    std::size_t used = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size() && std::isfinite(v);
}

bool parse_bool(const std::string& s, bool& v)
{
    if (s == "true" || s == "1" || s == "yes") {
        v = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        v = false;
        return true;
    }
    return false;
}

void validate(const config_key& key, const std::string& value)
{
    bool ok = true;
    std::int64_t i = 0;
    double d = 0;
    bool b = false;
    switch (key.kind) {
    case value_kind::integer: ok = parse_int(value, i); break;
    case value_kind::real: ok = parse_real(value, d); break;
    case value_kind::boolean: ok = parse_bool(value, b); break;
    case value_kind::text: ok = !value.empty(); break;
    case value_kind::int_list:
        if (value != "all")
            for (const auto& item : split_list(value))
                ok = ok && parse_int(item, i);
        break;
    case value_kind::text_list: ok = !split_list(value).empty(); break;
    }
    if (!ok)
        throw config_invalid("bad value '" + value + "' for " + key.name);
}

}  // namespace

run_config::run_config()
{
    for (const auto& k : config_keys())
        values_[k.name] = k.fallback;
}

const config_key& run_config::lookup(const std::string& key) const
{
    const auto& keys = config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const config_key& k) { return k.name == key; });
    if (it == keys.end())
        throw config_invalid("unknown config key '" + key + "'");
    return *it;
}

void run_config::set(const std::string& key, const std::string& raw)
{
    const auto& k = lookup(key);
    std::string value = trim(raw);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
    validate(k, value);
    values_[key] = value;
}

bool run_config::has(const std::string& key) const
{
    return values_.count(key) != 0;
}

run_config run_config::from_text(const std::string& text, const std::string& origin)
{
    run_config cfg;
    std::stringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_invalid(origin + ":" + std::to_string(number) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return cfg;
}

run_config run_config::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_invalid("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path.string());
}

const std::string& run_config::text(const std::string& key) const
{
    lookup(key);
    return values_.at(key);
}

std::int64_t run_config::integer(const std::string& key) const
{
    std::int64_t v = 0;
    if (lookup(key).kind != value_kind::integer || !parse_int(values_.at(key), v))
        throw config_invalid(key + " is not an integer");
    return v;
}

std::uint64_t run_config::unsigned_integer(const std::string& key) const
{
    const auto v = integer(key);
    if (v < 0)
        throw config_invalid(key + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

double run_config::real(const std::string& key) const
{
    double v = 0;
    if (!parse_real(text(key), v))
        throw config_invalid(key + " is not a number");
    return v;
}

bool run_config::boolean(const std::string& key) const
{
    bool v = false;
    if (!parse_bool(text(key), v))
        throw config_invalid(key + " is not a boolean");
    return v;
}

std::vector<std::int64_t> run_config::int_list(const std::string& key) const
{
    std::vector<std::int64_t> out;
    const auto& raw = text(key);
    if (raw == "all")
        return out;
    for (const auto& item : split_list(raw)) {
        std::int64_t v = 0;
        if (!parse_int(item, v))
            throw config_invalid(key + " holds a non-integer item");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> run_config::text_list(const std::string& key) const
{
    return split_list(text(key));
}

std::string run_config::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_)
        out += k + "=" + v + "\n";
    return out;
}

std::string run_config::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values_) {
        if (k == "jobs")
            continue;
        for (char c : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string provenance_header(const std::string& config_hash)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(synth_version_hash()));
    return "# config_hash=" + config_hash + " synth_version=" + buf;
}

std::string provenance_header(const run_config& cfg)
{
    return provenance_header(cfg.hash());
}

}  // namespace babbler
