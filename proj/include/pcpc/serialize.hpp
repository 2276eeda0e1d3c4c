// JSON documents for profiles, sets, patterns and PCP specs, plus the dense
// text export of generator matrices and the per-artifact run manifest.

#pragma once

#include <string>
#include <vector>

#include "pcpc/pcp.hpp"

namespace pcpc {

// Bitmask as hex, MSB first: pattern bit 1 is the top bit of the first digit.
std::string mask_to_hex(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> mask_from_hex(const std::string& hex, std::size_t nbits);

std::string profile_to_json(const ReliabilityProfile& profile);
ReliabilityProfile profile_from_json(const std::string& text);

std::string information_set_to_json(const InformationSet& set);
InformationSet information_set_from_json(const std::string& text);

// Profile and selected set in one document: {n_u, metric_kind, metric[], indices[]}
std::string construction_to_json(const ReliabilityProfile& profile, const InformationSet& set);

std::string pattern_to_json(const PuncturePattern& pattern);
PuncturePattern pattern_from_json(const std::string& text);

std::string spec_to_json(const PcpSpec& spec);
PcpSpec spec_from_json(const std::string& text);  // validates before returning

// First line "rows cols", then one '0'/'1' row per line.
std::string generator_to_text(const GeneratorMatrix& g);

struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
};

std::string manifest_to_json(const RunManifest& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pcpc
