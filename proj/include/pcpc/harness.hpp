// Monte Carlo HARQ-IR simulation: incremental transmission over a degraded
// channel sequence, sequential decoding after every transmission, and
// deterministic aggregation into per-rate statistics.
//
// Per-trial RNG streams are derived from (seed, point, trial), so results are
// bit-identical regardless of thread count; the OpenMP path only splits the
// trial loop and merges integer counters.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcpc/channel.hpp"
#include "pcpc/pcp.hpp"

namespace pcpc {

// Common surface of the PCP scheme and the random-puncturing baseline.
class HarqScheme {
public:
    virtual ~HarqScheme() = default;
    virtual int stages() const = 0;
    virtual long long k() const = 0;
    virtual long long chunk_length(int stage) const = 0;       // 1-based
    virtual long long cumulative_length(int stage) const = 0;  // 1-based
    virtual std::vector<std::uint8_t> encode_chunk(std::span<const std::uint8_t> u, int stage) const = 0;
    // Full k-bit estimate from the first `chunks.size()` transmissions.
    virtual std::vector<std::uint8_t> decode(const std::vector<std::vector<double>>& llr_chunks) const = 0;
};

class PcpScheme : public HarqScheme {
public:
    explicit PcpScheme(const PcpSpec& spec, ScRule rule = ScRule::TanhExact)
        : spec_(&spec), rule_(rule) {}
    int stages() const override { return spec_->level_count(); }
    long long k() const override { return spec_->k(); }
    long long chunk_length(int stage) const override { return spec_->schedule.lengths[stage - 1]; }
    long long cumulative_length(int stage) const override { return spec_->schedule.cumulative[stage - 1]; }
    std::vector<std::uint8_t> encode_chunk(std::span<const std::uint8_t> u, int stage) const override {
        return encode_incremental(*spec_, u, stage);
    }
    std::vector<std::uint8_t> decode(const std::vector<std::vector<double>>& llr_chunks) const override {
        return sequential_decode(*spec_, llr_chunks, rule_).message;
    }
    const PcpSpec& spec() const { return *spec_; }

private:
    const PcpSpec* spec_;
    ScRule rule_;
};

// One mother polar code whose information set is optimized for the full
// length; shorter transmissions are nested random punctures of it.
struct RcPuncturedFamily {
    std::size_t n_u = 0;
    InformationSet info;
    std::vector<long long> lengths;  // cumulative transmitted lengths, ascending
    std::vector<int> tx_order;       // mother positions (1-based) in transmit order
    std::vector<PuncturePattern> patterns;  // per rate, punctures nested
};

RcPuncturedFamily random_puncturing_baseline(std::size_t n_u, long long k,
                                             std::vector<long long> lengths, std::uint64_t seed,
                                             const ChannelModel& design_channel,
                                             const DesignOptions& design = {});

class RandomPuncturingScheme : public HarqScheme {
public:
    explicit RandomPuncturingScheme(RcPuncturedFamily family, ScRule rule = ScRule::TanhExact);
    int stages() const override { return static_cast<int>(family_.lengths.size()); }
    long long k() const override { return static_cast<long long>(family_.info.size()); }
    long long chunk_length(int stage) const override;
    long long cumulative_length(int stage) const override { return family_.lengths[stage - 1]; }
    std::vector<std::uint8_t> encode_chunk(std::span<const std::uint8_t> u, int stage) const override;
    std::vector<std::uint8_t> decode(const std::vector<std::vector<double>>& llr_chunks) const override;
    const RcPuncturedFamily& family() const { return family_; }

private:
    RcPuncturedFamily family_;
    ScRule rule_;
};

enum class StopRule { FixedAll, AckNack };

struct TrialOutcome {
    std::vector<std::uint8_t> evaluated;    // per rate: decode attempted
    std::vector<std::uint8_t> block_error;  // per rate
    std::vector<long long> bit_errors;      // per rate
    int first_success = 0;  // 0 = never
    int stop_stage = 0;     // transmissions used
};

// Draws a uniform message, transmits chunk i over per_tx_channels[i-1],
// decodes after every received transmission, and compares with the genie.
TrialOutcome run_trial(const HarqScheme& scheme, std::span<const ChannelModel> per_tx_channels,
                       StopRule stop, Rng& rng);

struct RateAccum {
    long long evaluated = 0;
    long long block_errors = 0;
    long long bit_errors = 0;
    long long success_here = 0;  // trials whose first success was this rate
    long long stopped_here = 0;
};

struct PointResult {
    double param = 0.0;          // reported sweep value
    double channel_param = 0.0;  // actual channel parameter
    long long trials = 0;
    long long sum_tx = 0;
    std::vector<RateAccum> rates;
};

struct SweepConfig {
    const HarqScheme* scheme = nullptr;
    ChannelKind kind = ChannelKind::BEC;
    std::vector<double> params;          // reported values
    std::vector<double> channel_params;  // same size; channel parameter per point
    long long trials = 1;
    std::uint64_t seed = 1;
    StopRule stop = StopRule::FixedAll;
};

struct SweepResult {
    std::vector<PointResult> points;
};

SweepResult sweep(const SweepConfig& cfg, int threads = 1);

// CSV per the stable schema:
// param,rate_index,rate,trials,block_errors,bit_errors,mean_tx,throughput,stderr
std::string sweep_csv(const HarqScheme& scheme, const SweepResult& result);

// Conventional BPSK mapping: Eb/N0 = 1/(2 R sigma^2), here dB -> sigma.
double biawgn_sigma_from_ebno_db(double ebno_db, double rate);

}  // namespace pcpc
