#include "pcpc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcpc {

RcPuncturedFamily random_puncturing_baseline(std::size_t n_u, long long k,
                                             std::vector<long long> lengths, std::uint64_t seed,
                                             const ChannelModel& design_channel,
                                             const DesignOptions& design) {
    if (!is_power_of_two(n_u)) throw std::invalid_argument("mother length must be a power of two");
    if (lengths.empty()) throw std::invalid_argument("at least one target length is required");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] < 1 || lengths[i] > static_cast<long long>(n_u))
            throw std::invalid_argument("target lengths must lie in [1, n_u]");
        if (i > 0 && lengths[i] <= lengths[i - 1])
            throw std::invalid_argument("target lengths must be strictly increasing");
    }
    if (k > lengths.front()) throw std::invalid_argument("k exceeds the smallest target length");

    RcPuncturedFamily fam;
    fam.n_u = n_u;
    fam.lengths = std::move(lengths);

    // info set optimized for the unpunctured mother code
    PuncturePattern full = make_full_pattern(n_u);
    ReliabilityProfile profile = punctured_reliability(design_channel, full, design);
    fam.info = select_information_set(profile, static_cast<std::size_t>(k));

    // one seeded permutation: transmissions reveal a growing prefix, so the
    // punctures of a shorter transmission are a superset of a longer one's
    Rng rng = Rng::derive(seed, {0x7270u});
    std::vector<int> order(n_u);
    for (std::size_t i = 0; i < n_u; ++i) order[i] = static_cast<int>(i + 1);
    for (std::size_t i = n_u - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    fam.tx_order = order;

    for (long long len : fam.lengths) {
        PuncturePattern p{n_u, std::vector<std::uint8_t>(n_u, 0)};
        for (long long t = 0; t < len; ++t)
            p.bits[static_cast<std::size_t>(order[static_cast<std::size_t>(t)]) - 1] = 1;
        fam.patterns.push_back(std::move(p));
    }
    return fam;
}

RandomPuncturingScheme::RandomPuncturingScheme(RcPuncturedFamily family, ScRule rule)
    : family_(std::move(family)), rule_(rule) {}

long long RandomPuncturingScheme::chunk_length(int stage) const {
    long long prev = stage > 1 ? family_.lengths[static_cast<std::size_t>(stage) - 2] : 0;
    return family_.lengths[static_cast<std::size_t>(stage) - 1] - prev;
}

std::vector<std::uint8_t> RandomPuncturingScheme::encode_chunk(std::span<const std::uint8_t> u,
                                                               int stage) const {
    std::vector<std::uint8_t> x = polar_encode(family_.info, u);
    long long lo = stage > 1 ? family_.lengths[static_cast<std::size_t>(stage) - 2] : 0;
    long long hi = family_.lengths[static_cast<std::size_t>(stage) - 1];
    std::vector<std::uint8_t> chunk;
    chunk.reserve(static_cast<std::size_t>(hi - lo));
    for (long long t = lo; t < hi; ++t)
        chunk.push_back(x[static_cast<std::size_t>(family_.tx_order[static_cast<std::size_t>(t)]) - 1]);
    return chunk;
}

std::vector<std::uint8_t> RandomPuncturingScheme::decode(
    const std::vector<std::vector<double>>& llr_chunks) const {
    std::size_t m = llr_chunks.size();
    if (m < 1 || m > family_.lengths.size()) throw std::invalid_argument("transmission count out of range");
    std::vector<double> llrs(family_.n_u, 0.0);
    long long t = 0;
    for (std::size_t s = 0; s < m; ++s) {
        long long prev = s > 0 ? family_.lengths[s - 1] : 0;
        if (static_cast<long long>(llr_chunks[s].size()) != family_.lengths[s] - prev)
            throw std::invalid_argument("chunk length mismatch");
        for (double l : llr_chunks[s]) {
            llrs[static_cast<std::size_t>(family_.tx_order[static_cast<std::size_t>(t)]) - 1] = l;
            ++t;
        }
    }
    std::vector<std::uint8_t> fmask(family_.n_u, 1), fval(family_.n_u, 0);
    for (int idx : family_.info.indices) fmask[static_cast<std::size_t>(idx) - 1] = 0;
    ScDecoder dec(family_.n_u, rule_);
    const auto& u = dec.decode(llrs, fmask, fval);
    std::vector<std::uint8_t> msg;
    msg.reserve(family_.info.size());
    for (int idx : family_.info.indices) msg.push_back(u[static_cast<std::size_t>(idx) - 1]);
    return msg;
}

TrialOutcome run_trial(const HarqScheme& scheme, std::span<const ChannelModel> per_tx_channels,
                       StopRule stop, Rng& rng) {
    int K = scheme.stages();
    if (static_cast<int>(per_tx_channels.size()) < K)
        throw std::invalid_argument("need one channel per transmission");
    std::size_t k = static_cast<std::size_t>(scheme.k());

    TrialOutcome out;
    out.evaluated.assign(static_cast<std::size_t>(K), 0);
    out.block_error.assign(static_cast<std::size_t>(K), 0);
    out.bit_errors.assign(static_cast<std::size_t>(K), 0);

    std::vector<std::uint8_t> u(k);
    for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());

    std::vector<std::vector<double>> chunks;
    for (int stage = 1; stage <= K; ++stage) {
        const ChannelModel& ch = per_tx_channels[static_cast<std::size_t>(stage) - 1];
        std::vector<std::uint8_t> tx = scheme.encode_chunk(u, stage);
        std::vector<double> llrs(tx.size());
        for (std::size_t i = 0; i < tx.size(); ++i) llrs[i] = ch.llr(ch.sample(tx[i], rng));
        chunks.push_back(std::move(llrs));

        std::vector<std::uint8_t> est = scheme.decode(chunks);
        long long wrong = 0;
        for (std::size_t i = 0; i < k; ++i) wrong += (est[i] != u[i]);
        std::size_t r = static_cast<std::size_t>(stage) - 1;
        out.evaluated[r] = 1;
        out.block_error[r] = wrong != 0;
        out.bit_errors[r] = wrong;
        out.stop_stage = stage;
        if (wrong == 0 && out.first_success == 0) out.first_success = stage;
        if (stop == StopRule::AckNack && wrong == 0) break;
    }
    return out;
}

namespace {

void accumulate(PointResult& pt, const TrialOutcome& t) {
    for (std::size_t r = 0; r < pt.rates.size(); ++r) {
        if (!t.evaluated[r]) continue;
        auto& acc = pt.rates[r];
        ++acc.evaluated;
        acc.block_errors += t.block_error[r];
        acc.bit_errors += t.bit_errors[r];
    }
    if (t.first_success > 0) ++pt.rates[static_cast<std::size_t>(t.first_success) - 1].success_here;
    ++pt.rates[static_cast<std::size_t>(t.stop_stage) - 1].stopped_here;
    pt.sum_tx += t.stop_stage;
    ++pt.trials;
}

void merge(PointResult& into, const PointResult& part) {
    into.trials += part.trials;
    into.sum_tx += part.sum_tx;
    for (std::size_t r = 0; r < into.rates.size(); ++r) {
        into.rates[r].evaluated += part.rates[r].evaluated;
        into.rates[r].block_errors += part.rates[r].block_errors;
        into.rates[r].bit_errors += part.rates[r].bit_errors;
        into.rates[r].success_here += part.rates[r].success_here;
        into.rates[r].stopped_here += part.rates[r].stopped_here;
    }
}

}  // namespace

SweepResult sweep(const SweepConfig& cfg, int threads) {
    if (!cfg.scheme) throw std::invalid_argument("sweep needs a scheme");
    if (cfg.params.empty()) throw std::invalid_argument("sweep grid must be nonempty");
    if (cfg.channel_params.size() != cfg.params.size())
        throw std::invalid_argument("reported and channel parameter grids must align");
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");

    int K = cfg.scheme->stages();
    SweepResult result;
    for (std::size_t p = 0; p < cfg.params.size(); ++p) {
        PointResult pt;
        pt.param = cfg.params[p];
        pt.channel_param = cfg.channel_params[p];
        pt.rates.assign(static_cast<std::size_t>(K), RateAccum{});
        std::vector<ChannelModel> channels(static_cast<std::size_t>(K),
                                           ChannelModel(cfg.kind, pt.channel_param));

        auto run_range = [&](long long b, long long e, PointResult& local) {
            for (long long t = b; t < e; ++t) {
                Rng rng = Rng::derive(cfg.seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(t)});
                TrialOutcome outcome = run_trial(*cfg.scheme, channels, cfg.stop, rng);
                accumulate(local, outcome);
            }
        };

#ifdef _OPENMP
        if (threads > 1) {
#pragma omp parallel num_threads(threads)
            {
                PointResult local;
                local.rates.assign(static_cast<std::size_t>(K), RateAccum{});
                long long nth = omp_get_num_threads();
                long long tid = omp_get_thread_num();
                long long chunk = (cfg.trials + nth - 1) / nth;
                long long b = tid * chunk, e = std::min(cfg.trials, b + chunk);
                if (b < e) run_range(b, e, local);
#pragma omp critical
                merge(pt, local);
            }
        } else
#endif
        {
            (void)threads;
            run_range(0, cfg.trials, pt);
        }
        result.points.push_back(std::move(pt));
    }
    return result;
}

std::string sweep_csv(const HarqScheme& scheme, const SweepResult& result) {
    std::string csv = "param,rate_index,rate,trials,block_errors,bit_errors,mean_tx,throughput,stderr\n";
    char buf[256];
    long long k = scheme.k();
    for (const auto& pt : result.points) {
        double mean_tx = pt.trials > 0 ? static_cast<double>(pt.sum_tx) / static_cast<double>(pt.trials) : 0.0;
        for (std::size_t r = 0; r < pt.rates.size(); ++r) {
            const auto& acc = pt.rates[r];
            long long nbar = scheme.cumulative_length(static_cast<int>(r) + 1);
            double rate = static_cast<double>(k) / static_cast<double>(nbar);
            double p_succ = pt.trials > 0 ? static_cast<double>(acc.success_here) / static_cast<double>(pt.trials) : 0.0;
            double throughput = static_cast<double>(k) * p_succ / static_cast<double>(nbar);
            double bler = acc.evaluated > 0 ? static_cast<double>(acc.block_errors) / static_cast<double>(acc.evaluated) : 0.0;
            double se = acc.evaluated > 0 ? std::sqrt(bler * (1.0 - bler) / static_cast<double>(acc.evaluated)) : 0.0;
            std::snprintf(buf, sizeof buf, "%.10g,%zu,%.10g,%lld,%lld,%lld,%.10g,%.10g,%.10g\n",
                          pt.param, r + 1, rate, acc.evaluated, acc.block_errors, acc.bit_errors,
                          mean_tx, throughput, se);
            csv += buf;
        }
    }
    return csv;
}

double biawgn_sigma_from_ebno_db(double ebno_db, double rate) {
    double lin = std::pow(10.0, ebno_db / 10.0);
    return std::sqrt(1.0 / (2.0 * rate * lin));
}

}  // namespace pcpc
