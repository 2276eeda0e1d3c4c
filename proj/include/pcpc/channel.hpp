// Binary-input memoryless channel models: BEC, BSC and binary-input AWGN
// with unit-energy BPSK (0 -> +1, 1 -> -1).

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcpc/rng.hpp"

namespace pcpc {

enum class ChannelKind { BEC, BSC, BIAWGN };

// Finite stand-in for an infinite LLR (perfect observation). Chosen so that
// sums over a whole block stay far below double overflow.
inline constexpr double kHardLlr = 1e30;

struct ChannelSymbol {
    double value = 0.0;  // BEC/BSC: 0 or 1; BIAWGN: real sample
    bool erased = false; // BEC only

    static ChannelSymbol erasure() { return {0.0, true}; }
    static ChannelSymbol of(double v) { return {v, false}; }
};

class ChannelModel {
public:
    ChannelModel(ChannelKind kind, double param);

    // "bec:0.3", "bsc:0.11", "biawgn:0.9"
    static ChannelModel parse(std::string_view spec);

    ChannelKind kind() const { return kind_; }
    double param() const { return param_; }
    bool finite_output() const { return kind_ != ChannelKind::BIAWGN; }
    std::string to_string() const;

    ChannelSymbol sample(int bit, Rng& rng) const;

    // ln(W(y|0)/W(y|1)); positive favors bit 0. Saturated at +-kHardLlr.
    double llr(const ChannelSymbol& y) const;

    // Symmetric capacity in bits per channel use.
    double capacity() const;

private:
    ChannelKind kind_;
    double param_;
};

// True iff all channels share one kind and the parameters are monotone in the
// degrading direction. Throws std::invalid_argument on mixed kinds.
bool is_degraded_sequence(std::span<const ChannelModel> chs);

}  // namespace pcpc
