#include "pcpc/puncture.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pcpc {

std::size_t PuncturePattern::n() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double PuncturePattern::fraction() const {
    return static_cast<double>(n_u - n()) / static_cast<double>(n_u);
}

std::vector<int> PuncturePattern::transmitted_positions() const {
    std::vector<int> pos;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) pos.push_back(static_cast<int>(i + 1));
    return pos;
}

PuncturePattern make_uniform_pattern(std::size_t n_u, std::size_t n) {
    if (!is_power_of_two(n_u)) throw std::invalid_argument("mother length must be a power of two");
    if (n < 1 || n > n_u) throw std::invalid_argument("transmitted length must be in [1, n_u]");
    PuncturePattern p{n_u, std::vector<std::uint8_t>(n_u, 1)};
    std::size_t s = n_u - n;
    for (std::size_t t = 1; t <= s; ++t) {
        std::size_t idx = (t - 1) * n_u / s;  // 0-based
        p.bits[idx] = 0;
    }
    if (p.n() != n) throw std::logic_error("uniform pattern produced a wrong count");
    return p;
}

PuncturePattern make_full_pattern(std::size_t n_u) { return make_uniform_pattern(n_u, n_u); }

PuncturePattern make_random_pattern(std::size_t n_u, std::size_t n, Rng& rng) {
    if (!is_power_of_two(n_u)) throw std::invalid_argument("mother length must be a power of two");
    if (n < 1 || n > n_u) throw std::invalid_argument("transmitted length must be in [1, n_u]");
    std::vector<std::size_t> order(n_u);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n_u - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    PuncturePattern p{n_u, std::vector<std::uint8_t>(n_u, 0)};
    for (std::size_t i = 0; i < n; ++i) p.bits[order[i]] = 1;
    return p;
}

std::vector<std::uint8_t> puncture(std::span<const std::uint8_t> x, const PuncturePattern& pattern) {
    if (x.size() != pattern.n_u) throw std::invalid_argument("codeword length does not match pattern");
    std::vector<std::uint8_t> out;
    out.reserve(pattern.n());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (pattern.bits[i]) out.push_back(x[i]);
    return out;
}

std::vector<double> expand_llrs(std::span<const double> llrs, const PuncturePattern& pattern) {
    if (llrs.size() != pattern.n()) throw std::invalid_argument("llr length does not match pattern");
    std::vector<double> out(pattern.n_u, 0.0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < pattern.n_u; ++i)
        if (pattern.bits[i]) out[i] = llrs[j++];
    return out;
}

ReliabilityProfile punctured_reliability(const ChannelModel& ch, const PuncturePattern& pattern,
                                         const DesignOptions& opts) {
    switch (ch.kind()) {
        case ChannelKind::BEC: {
            std::vector<double> eps(pattern.n_u);
            for (std::size_t i = 0; i < pattern.n_u; ++i)
                eps[i] = pattern.bits[i] ? ch.param() : 1.0;
            return bec_reliability(std::move(eps));
        }
        case ChannelKind::BIAWGN:
            return gaussian_reliability(ch.param(), pattern.n_u, pattern.bits);
        case ChannelKind::BSC: {
            ReliabilityProfile est = monte_carlo_reliability(ch, pattern.n_u, pattern.bits,
                                                             opts.mc_trials, opts.seed, opts.threads);
            // bit channels erased by the pattern alone have exact Z = 1; the
            // empirical guessing rate of 1/2 would understate them and can
            // lose to a bad-but-alive channel at finite trial counts
            std::vector<double> reach(pattern.n_u);
            for (std::size_t i = 0; i < pattern.n_u; ++i) reach[i] = pattern.bits[i] ? 0.0 : 1.0;
            ReliabilityProfile structural = bec_reliability(std::move(reach));
            for (std::size_t i = 0; i < pattern.n_u; ++i)
                if (structural.metric[i] == 1.0) est.metric[i] = 1.0;
            return est;
        }
    }
    throw std::logic_error("unreachable");
}

PuncturedDesign design_punctured_code(const ChannelModel& ch, long long n, long long k,
                                      const DesignOptions& opts) {
    if (n < 1) throw std::invalid_argument("target length must be positive");
    if (k < 0 || k > n) throw std::invalid_argument("message size must satisfy 0 <= k <= n");
    std::size_t n_u = 1;
    while (n_u < static_cast<std::size_t>(n)) n_u <<= 1;
    PuncturePattern pattern = make_uniform_pattern(n_u, static_cast<std::size_t>(n));
    ReliabilityProfile profile = punctured_reliability(ch, pattern, opts);
    InformationSet info = select_information_set(profile, static_cast<std::size_t>(k));
    return {{std::move(pattern), std::move(info)}, std::move(profile)};
}

}  // namespace pcpc
