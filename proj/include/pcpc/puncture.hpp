// Puncturing patterns, projection between mother and transmitted lengths,
// and punctured-code design with punctured positions modeled as erasures.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcpc/channel.hpp"
#include "pcpc/polar.hpp"

namespace pcpc {

struct PuncturePattern {
    std::size_t n_u = 0;
    std::vector<std::uint8_t> bits;  // 0 = punctured, 1 = transmitted

    std::size_t n() const;                       // transmitted count
    double fraction() const;                     // (n_u - n) / n_u
    std::vector<int> transmitted_positions() const;  // 1-based
};

// Punctures s = n_u - n positions at { floor((t-1)*n_u/s) + 1 : t in [s] }.
PuncturePattern make_uniform_pattern(std::size_t n_u, std::size_t n);

// All-ones pattern (no puncturing).
PuncturePattern make_full_pattern(std::size_t n_u);

// Seeded-random pattern with n transmitted positions.
PuncturePattern make_random_pattern(std::size_t n_u, std::size_t n, Rng& rng);

// Keep coordinates where the pattern is 1, in order.
std::vector<std::uint8_t> puncture(std::span<const std::uint8_t> x, const PuncturePattern& pattern);

// Inverse placement: received LLRs to transmitted positions, 0 elsewhere.
std::vector<double> expand_llrs(std::span<const double> llrs, const PuncturePattern& pattern);

struct PuncturedPolarCode {
    PuncturePattern pattern;
    InformationSet info;  // over the mother length
};

struct PuncturedDesign {
    PuncturedPolarCode code;
    ReliabilityProfile profile;
};

struct DesignOptions {
    long long mc_trials = 100000;  // BSC reliability estimation
    std::uint64_t seed = 1;
    int threads = 1;
};

// Mother length = smallest power of two >= n, evenly spaced punctures,
// reliability with punctured positions totally degraded, k best positions.
PuncturedDesign design_punctured_code(const ChannelModel& ch, long long n, long long k,
                                      const DesignOptions& opts = {});

// Reliability of a (possibly punctured) code for one channel, method chosen
// by channel kind: BEC exact recursion, BIAWGN Gaussian approximation,
// BSC Monte Carlo estimation.
ReliabilityProfile punctured_reliability(const ChannelModel& ch, const PuncturePattern& pattern,
                                         const DesignOptions& opts = {});

}  // namespace pcpc
