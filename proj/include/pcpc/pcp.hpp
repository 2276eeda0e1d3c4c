// Parallel concatenated polar codes: rate schedules, integer apportionment of
// information-set sizes, nested sets per level, recursive bit mappings,
// incremental encoding, generator assembly and the sequential decoder.
//
// Rate arithmetic is exact rational throughout; floating point only appears
// in reliability metrics and LLRs.

#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcpc/channel.hpp"
#include "pcpc/polar.hpp"
#include "pcpc/puncture.hpp"

namespace pcpc {

using Rational = boost::rational<long long>;

Rational parse_rational(std::string_view text);  // "3/4", "0.75", "192/579"

struct RateSchedule {
    long long k = 0;
    std::vector<Rational> rates;      // R_1 > ... > R_K
    std::vector<long long> lengths;   // n_i
    std::vector<long long> cumulative;  // n-bar_i

    int levels() const { return static_cast<int>(rates.size()); }
};

// n_i = R_1 (1/R_i - 1/R_{i-1}) n_1, exact; throws when any n_i or k is not
// an integer. The returned schedule satisfies R_i * cumulative_i = k exactly.
RateSchedule derive_lengths(long long k, std::vector<Rational> rates, long long n1);

// Schedule with rates defined as k / cumulative_i; lengths may be arbitrary
// positive integers (used for pinned-length constructions).
RateSchedule schedule_from_lengths(long long k, std::vector<long long> lengths);

struct DyadicResult {
    bool feasible = false;
    std::vector<long long> exponents;  // l_2..l_K when feasible
};

// True iff n_i/n_1 implied by the values is an integer power of two for every
// i >= 2, i.e. rates of the form R_1 / (1 + sum 2^{l_j}).
DyadicResult check_dyadic_feasibility(std::span<const Rational> values);

// rows[j-1] = (a_j^{(1)}, ..., a_j^{(j)}): integer sizes with row sum k,
// largest-remainder per rate row, then column-monotonic repair.
std::vector<std::vector<long long>> apportion_sizes(const RateSchedule& schedule);

struct BitMapping {
    int level = 0;
    std::vector<long long> table;  // table[m-1] = h(m), 1-based global indices
};

// h^(1) = identity; h^(i+1) assembled from consecutive blocks of sizes
// q_i^(j) = a_i^(j) - a_{i+1}^(j) mapped onto the parent tables.
std::vector<BitMapping> build_bit_mappings(const std::vector<std::vector<long long>>& size_rows,
                                           long long k);

struct PcpLevel {
    int level = 0;                  // 1-based
    long long n = 0;                // transmitted length
    PuncturePattern pattern;        // over mother length n_u
    NestedSetFamily nested;         // A_i^(i) >= ... >= A_K^(i)
    std::vector<long long> sizes;   // a_j^(i) for j = i..K
    BitMapping mapping;             // h^(i)
    std::vector<int> stacked;       // mother positions, deepest set's rows first

    std::size_t n_u() const { return pattern.n_u; }
};

struct PcpSpec {
    RateSchedule schedule;
    std::vector<PcpLevel> levels;
    std::vector<std::string> design_channels;  // informational, e.g. "bec:0.3"

    long long k() const { return schedule.k; }
    int level_count() const { return static_cast<int>(levels.size()); }

    // Checks every construction invariant; throws std::runtime_error naming
    // the first violated condition.
    void validate() const;
};

struct PcpBuildOptions {
    std::optional<std::vector<Rational>> rates;            // explicit schedule
    std::optional<std::vector<long long>> pinned_lengths;  // bypass length derivation
    long long mc_trials = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
};

// Designs one punctured (or exact power-of-two) code per level over the given
// degraded channel sequence. `channels` holds either one model per rate or a
// single model reused for every rate. Without explicit rates or pinned
// lengths, cumulative lengths default to round(k / I(W_i)).
PcpSpec build_pcp(long long k, std::span<const ChannelModel> channels, long long n1,
                  const PcpBuildOptions& opts = {});

// Chunk transmitted at `level` (1-based): message bits routed through h^(level)
// onto the stacked row order, frozen zeros, polar transform, puncturing.
std::vector<std::uint8_t> encode_incremental(const PcpSpec& spec, std::span<const std::uint8_t> u,
                                             int level);

struct GeneratorMatrix {
    long long rows = 0, cols = 0;
    std::vector<std::uint8_t> bits;  // row-major

    std::uint8_t at(long long r, long long c) const { return bits[static_cast<std::size_t>(r * cols + c)]; }
};

// Explicit k x cumulative_i generator; verification tool for small instances.
GeneratorMatrix assemble_generator(const PcpSpec& spec, int upto_level,
                                   long long cell_limit = 1 << 22);

struct SequentialDecodeResult {
    std::vector<std::uint8_t> message;               // k bits
    std::vector<std::vector<long long>> stage_bits;  // per level 1..m: global indices decoded there
};

// Algorithm: decode level m with A_m^(m); for i = m-1..1 freeze the already
// decoded bits on A_i^(i) \ A_m^(i) and decode the residual rate-R_m code.
// Exactly k bit decisions in total.
SequentialDecodeResult sequential_decode(const PcpSpec& spec,
                                         const std::vector<std::vector<double>>& llr_chunks,
                                         ScRule rule = ScRule::TanhExact);

}  // namespace pcpc
