#include "pcpc/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pcpc {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kSpecFormatVersion = 1;

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
}

ordered_json pattern_json(const PuncturePattern& p) {
    return {{"n_u", p.n_u}, {"n", p.n()}, {"mask_hex", mask_to_hex(p.bits)}};
}

PuncturePattern pattern_from(const ordered_json& j) {
    PuncturePattern p;
    p.n_u = j.at("n_u").get<std::size_t>();
    p.bits = mask_from_hex(j.at("mask_hex").get<std::string>(), p.n_u);
    if (j.contains("n") && j.at("n").get<std::size_t>() != p.n())
        throw std::invalid_argument("pattern weight disagrees with mask");
    return p;
}

}  // namespace

std::string mask_to_hex(std::span<const std::uint8_t> bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    int nibble = 0, used = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        nibble = (nibble << 1) | (bits[i] & 1);
        if (++used == 4) {
            out.push_back(digits[nibble]);
            nibble = 0;
            used = 0;
        }
    }
    if (used > 0) out.push_back(digits[nibble << (4 - used)]);
    return out;
}

std::vector<std::uint8_t> mask_from_hex(const std::string& hex, std::size_t nbits) {
    if (hex.size() != (nbits + 3) / 4) throw std::invalid_argument("hex mask has the wrong length");
    std::vector<std::uint8_t> bits(nbits, 0);
    for (std::size_t i = 0; i < nbits; ++i) {
        int d = hex_digit(hex[i / 4]);
        bits[i] = (d >> (3 - (i % 4))) & 1;
    }
    // trailing pad bits must be zero
    for (std::size_t i = nbits; i < hex.size() * 4; ++i) {
        int d = hex_digit(hex[i / 4]);
        if ((d >> (3 - (i % 4))) & 1) throw std::invalid_argument("hex mask has nonzero padding");
    }
    return bits;
}

std::string profile_to_json(const ReliabilityProfile& profile) {
    ordered_json j{{"n_u", profile.n_u},
                   {"metric_kind", metric_kind_name(profile.kind)},
                   {"metric", profile.metric}};
    return j.dump(2) + "\n";
}

ReliabilityProfile profile_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    ReliabilityProfile p;
    p.n_u = j.at("n_u").get<std::size_t>();
    p.kind = metric_kind_from_name(j.at("metric_kind").get<std::string>());
    p.metric = j.at("metric").get<std::vector<double>>();
    if (p.metric.size() != p.n_u) throw std::invalid_argument("profile length disagrees with n_u");
    return p;
}

std::string information_set_to_json(const InformationSet& set) {
    ordered_json j{{"n_u", set.n_u}, {"indices", set.indices}};
    return j.dump(2) + "\n";
}

InformationSet information_set_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    InformationSet s;
    s.n_u = j.at("n_u").get<std::size_t>();
    s.indices = j.at("indices").get<std::vector<int>>();
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        if (s.indices[i] < 1 || static_cast<std::size_t>(s.indices[i]) > s.n_u)
            throw std::invalid_argument("set index out of range");
        if (i > 0 && s.indices[i] <= s.indices[i - 1])
            throw std::invalid_argument("set indices must be strictly increasing");
    }
    return s;
}

std::string construction_to_json(const ReliabilityProfile& profile, const InformationSet& set) {
    ordered_json j{{"n_u", profile.n_u},
                   {"metric_kind", metric_kind_name(profile.kind)},
                   {"metric", profile.metric},
                   {"indices", set.indices}};
    return j.dump(2) + "\n";
}

std::string pattern_to_json(const PuncturePattern& pattern) { return pattern_json(pattern).dump(2) + "\n"; }

PuncturePattern pattern_from_json(const std::string& text) {
    return pattern_from(ordered_json::parse(text));
}

std::string spec_to_json(const PcpSpec& spec) {
    ordered_json j;
    j["format"] = "pcpc-spec";
    j["version"] = kSpecFormatVersion;
    j["k"] = spec.k();
    ordered_json rates = ordered_json::array();
    for (const auto& r : spec.schedule.rates)
        rates.push_back({{"num", r.numerator()}, {"den", r.denominator()}});
    j["rates"] = rates;
    j["lengths"] = spec.schedule.lengths;
    j["cumulative"] = spec.schedule.cumulative;
    if (!spec.design_channels.empty()) j["design_channels"] = spec.design_channels;
    ordered_json levels = ordered_json::array();
    for (const auto& lvl : spec.levels) {
        ordered_json sets = ordered_json::array();
        for (const auto& s : lvl.nested.sets) sets.push_back(s.indices);
        levels.push_back({{"level", lvl.level},
                          {"n", lvl.n},
                          {"pattern", pattern_json(lvl.pattern)},
                          {"sizes", lvl.sizes},
                          {"sets", sets},
                          {"mapping", lvl.mapping.table}});
    }
    j["levels"] = levels;
    return j.dump(2) + "\n";
}

PcpSpec spec_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.at("format").get<std::string>() != "pcpc-spec")
        throw std::invalid_argument("not a pcpc spec document");
    if (j.at("version").get<int>() != kSpecFormatVersion)
        throw std::invalid_argument("unsupported spec format version");
    PcpSpec spec;
    long long k = j.at("k").get<long long>();
    std::vector<long long> lengths = j.at("lengths").get<std::vector<long long>>();
    spec.schedule.k = k;
    spec.schedule.lengths = lengths;
    long long cum = 0;
    for (long long n : lengths) spec.schedule.cumulative.push_back(cum += n);
    for (const auto& r : j.at("rates"))
        spec.schedule.rates.emplace_back(r.at("num").get<long long>(), r.at("den").get<long long>());
    if (j.at("cumulative").get<std::vector<long long>>() != spec.schedule.cumulative)
        throw std::invalid_argument("cumulative lengths disagree with lengths");
    if (j.contains("design_channels"))
        spec.design_channels = j.at("design_channels").get<std::vector<std::string>>();

    for (const auto& lj : j.at("levels")) {
        PcpLevel lvl;
        lvl.level = lj.at("level").get<int>();
        lvl.n = lj.at("n").get<long long>();
        lvl.pattern = pattern_from(lj.at("pattern"));
        lvl.sizes = lj.at("sizes").get<std::vector<long long>>();
        lvl.nested.n_u = lvl.pattern.n_u;
        for (const auto& sj : lj.at("sets")) {
            InformationSet s;
            s.n_u = lvl.pattern.n_u;
            s.indices = sj.get<std::vector<int>>();
            lvl.nested.sets.push_back(std::move(s));
        }
        lvl.mapping.level = lvl.level;
        lvl.mapping.table = lj.at("mapping").get<std::vector<long long>>();
        // stacked order is derived, not stored
        std::vector<std::uint8_t> covered(lvl.pattern.n_u, 0);
        for (std::size_t t = lvl.nested.sets.size(); t-- > 0;)
            for (int idx : lvl.nested.sets[t].indices)
                if (!covered[static_cast<std::size_t>(idx) - 1]) {
                    covered[static_cast<std::size_t>(idx) - 1] = 1;
                    lvl.stacked.push_back(idx);
                }
        spec.levels.push_back(std::move(lvl));
    }
    spec.validate();
    return spec;
}

std::string generator_to_text(const GeneratorMatrix& g) {
    std::string out = std::to_string(g.rows) + " " + std::to_string(g.cols) + "\n";
    out.reserve(out.size() + static_cast<std::size_t>(g.rows * (g.cols + 1)));
    for (long long r = 0; r < g.rows; ++r) {
        for (long long c = 0; c < g.cols; ++c) out.push_back(g.at(r, c) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

std::string manifest_to_json(const RunManifest& m) {
    ordered_json j{{"tool", "pcpc"},
                   {"version", "1.0.0"},
                   {"subcommand", m.subcommand},
                   {"argv", m.argv},
                   {"seed", m.seed},
                   {"outputs", m.outputs}};
    return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace pcpc
