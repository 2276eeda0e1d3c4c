// Arikan transform, bit-channel reliability construction, information set
// selection and successive-cancellation decoding.
//
// The transform is the plain Kronecker power of the 2x2 kernel in natural
// order; there is no bit-reversal permutation anywhere. Positions are 1-based
// on the public surface, matching the rest of the library.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pcpc/channel.hpp"

namespace pcpc {

enum class MetricKind { ErasureProb, BhattacharyyaEstimate, MeanLlr };

const char* metric_kind_name(MetricKind k);
MetricKind metric_kind_from_name(std::string_view name);

struct ReliabilityProfile {
    std::size_t n_u = 0;
    MetricKind kind = MetricKind::ErasureProb;
    std::vector<double> metric;  // one entry per bit channel, natural order

    // ErasureProb / BhattacharyyaEstimate: smaller is more reliable.
    // MeanLlr: larger is more reliable.
    bool lower_is_better() const { return kind != MetricKind::MeanLlr; }
};

struct InformationSet {
    std::size_t n_u = 0;
    std::vector<int> indices;  // 1-based, strictly increasing

    std::size_t size() const { return indices.size(); }
    std::vector<std::uint8_t> mask() const;  // 0-based membership flags
};

// Information sets per rate, largest first; sets[t+1] is a subset of sets[t].
struct NestedSetFamily {
    std::size_t n_u = 0;
    std::vector<InformationSet> sets;
};

bool is_power_of_two(std::size_t n);

// x = u * P_n over GF(2), in place, O(n log n). Throws on non-power-of-two
// length. Self-inverse.
void polar_transform_inplace(std::span<std::uint8_t> u);
std::vector<std::uint8_t> polar_transform(std::vector<std::uint8_t> u);

// Standalone polar encoding: info bits placed on `info` in ascending position
// order, frozen positions zero.
std::vector<std::uint8_t> polar_encode(const InformationSet& info, std::span<const std::uint8_t> bits);

// Exact bit-channel erasure probabilities for per-position erasure rates.
// Punctured positions are modeled by erasure probability 1. A uniform input
// reproduces the classical homogeneous recursion.
ReliabilityProfile bec_reliability(std::vector<double> per_position_erasure);

// Gaussian-approximation density evolution of mean LLRs. `pattern` are the
// transmit flags of a puncturing pattern (empty = none); punctured positions
// start at mean 0, the rest at 2/sigma^2.
ReliabilityProfile gaussian_reliability(double sigma, std::size_t n_u,
                                        std::span<const std::uint8_t> pattern = {});

// Per-position error-rate estimates from genie-aided SC decoding of the
// all-zero codeword. Deterministic for a given seed, independent of threads.
ReliabilityProfile monte_carlo_reliability(const ChannelModel& ch, std::size_t n_u,
                                           std::span<const std::uint8_t> pattern,
                                           long long trials, std::uint64_t seed,
                                           int threads = 1);

// Exact Bhattacharyya parameter of bit channel j (1-based) of a possibly
// punctured code over a finite-output channel, by full enumeration of
// messages and outputs. Test oracle; n_u <= 8.
double brute_force_bit_channel(const ChannelModel& ch, std::size_t n_u,
                               std::span<const std::uint8_t> pattern, int j);

// The `size` most reliable positions. Equal metrics prefer the larger index.
InformationSet select_information_set(const ReliabilityProfile& profile, std::size_t size);

// Chained construction: smallest set from the worst channel's profile, each
// larger set grown with the best remaining positions of the better channel.
// profiles[0] belongs to the best channel; sizes strictly decreasing.
NestedSetFamily nested_information_sets(std::span<const ReliabilityProfile> profiles,
                                        std::span<const std::size_t> sizes);

enum class ScRule { TanhExact, MinSum };

// Reusable successive-cancellation decoder with preallocated scratch.
// Masks and values are 0-based, one entry per u-position.
class ScDecoder {
public:
    explicit ScDecoder(std::size_t n, ScRule rule = ScRule::TanhExact);

    std::size_t length() const { return n_; }

    // Hard decisions for all u positions; frozen positions take the given
    // values. LLR ties at free positions decode to 0.
    const std::vector<std::uint8_t>& decode(std::span<const double> llrs,
                                            std::span<const std::uint8_t> frozen_mask,
                                            std::span<const std::uint8_t> frozen_values);

    // All-zero-codeword genie pass: every position is decided from its
    // decision LLR (exact zero flips a fair coin), then forced to 0 before
    // continuing. err_counts[i] is incremented on a wrong decision.
    void genie_zero_pass(std::span<const double> llrs, Rng& rng,
                         std::span<std::uint32_t> err_counts);

private:
    template <bool Genie>
    void walk(int depth, std::size_t lo, Rng* rng, std::uint32_t* err_counts);

    std::size_t n_;
    int levels_;
    ScRule rule_;
    std::vector<std::vector<double>> llr_;        // per depth
    std::vector<std::vector<std::uint8_t>> cw_;   // per depth, node codeword
    std::vector<std::vector<std::uint8_t>> left_; // per depth, saved left codeword
    std::vector<std::uint8_t> u_;
    const std::uint8_t* frozen_mask_ = nullptr;
    const std::uint8_t* frozen_values_ = nullptr;
};

struct ScResult {
    std::vector<std::uint8_t> info_bits;  // ascending info-position order
    std::vector<std::uint8_t> u;          // all n_u input decisions
    std::vector<std::uint8_t> codeword;   // re-encoded u * P_n
};

// Frozen positions (1-based -> value) and info positions must partition
// [n_u]; throws otherwise. Punctured positions carry LLR 0.
ScResult sc_decode(std::span<const double> llrs, const std::map<int, std::uint8_t>& frozen,
                   const InformationSet& info, ScRule rule = ScRule::TanhExact);

}  // namespace pcpc
