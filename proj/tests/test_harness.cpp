#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>

#include "pcpc/harness.hpp"

using namespace pcpc;

namespace {

PcpSpec two_level_spec(double e1 = 0.3, double e2 = 0.6, long long k = 16, long long n1 = 32) {
    std::vector<ChannelModel> chs{ChannelModel(ChannelKind::BEC, e1),
                                  ChannelModel(ChannelKind::BEC, e2)};
    PcpBuildOptions opts;
    opts.rates = std::vector<Rational>{Rational(k, n1), Rational(k, 4 * n1)};
    return build_pcp(k, chs, n1, opts);
}

}  // namespace

TEST_CASE("a noiseless trial succeeds at the first stage") {
    PcpSpec spec = two_level_spec();
    PcpScheme scheme(spec);
    std::vector<ChannelModel> chs(2, ChannelModel(ChannelKind::BEC, 0.0));
    Rng rng(1);
    auto t = run_trial(scheme, chs, StopRule::FixedAll, rng);
    CHECK(t.first_success == 1);
    CHECK(t.block_error == std::vector<std::uint8_t>{0, 0});
    CHECK(t.bit_errors == std::vector<long long>{0, 0});
    CHECK(t.stop_stage == 2);

    Rng rng2(1);
    auto ta = run_trial(scheme, chs, StopRule::AckNack, rng2);
    CHECK(ta.stop_stage == 1);
    CHECK(ta.evaluated == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("a fully erased channel fails every stage at guessing level") {
    PcpSpec spec = two_level_spec();
    PcpScheme scheme(spec);
    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = ChannelKind::BEC;
    cfg.params = {1.0};
    cfg.channel_params = {1.0};
    cfg.trials = 4000;
    cfg.seed = 3;
    auto res = sweep(cfg, 1);
    const auto& pt = res.points[0];
    for (const auto& acc : pt.rates) {
        CHECK(acc.block_errors == acc.evaluated);
        CHECK(acc.success_here == 0);
        // tie-break decodes zeros, so bit errors sit at the guessing level
        double ber = static_cast<double>(acc.bit_errors) /
                     (static_cast<double>(acc.evaluated) * static_cast<double>(spec.k()));
        double se = std::sqrt(0.25 / (static_cast<double>(acc.evaluated) * spec.k()));
        CHECK(std::abs(ber - 0.5) < 5 * se);
    }
}

TEST_CASE("stop accounting sums to the trial count") {
    PcpSpec spec = two_level_spec();
    PcpScheme scheme(spec);
    for (auto stop : {StopRule::FixedAll, StopRule::AckNack}) {
        SweepConfig cfg;
        cfg.scheme = &scheme;
        cfg.kind = ChannelKind::BEC;
        cfg.params = {0.35};
        cfg.channel_params = {0.35};
        cfg.trials = 2000;
        cfg.seed = 5;
        cfg.stop = stop;
        auto res = sweep(cfg, 2);
        long long stopped = 0, succeeded = 0;
        for (const auto& acc : res.points[0].rates) {
            stopped += acc.stopped_here;
            succeeded += acc.success_here;
        }
        CHECK(stopped == cfg.trials);
        CHECK(succeeded <= cfg.trials);
    }
}

TEST_CASE("sweep is deterministic and independent of the thread count") {
    PcpSpec spec = two_level_spec();
    PcpScheme scheme(spec);
    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = ChannelKind::BEC;
    cfg.params = {0.2, 0.4, 0.6};
    cfg.channel_params = cfg.params;
    cfg.trials = 500;
    cfg.seed = 77;
    std::string csv1 = sweep_csv(scheme, sweep(cfg, 1));
    std::string csv2 = sweep_csv(scheme, sweep(cfg, 2));
    std::string csv4 = sweep_csv(scheme, sweep(cfg, 4));
    std::string csv1b = sweep_csv(scheme, sweep(cfg, 1));
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv4);
    CHECK(csv1 == csv1b);
    cfg.seed = 78;
    CHECK(sweep_csv(scheme, sweep(cfg, 1)) != csv1);
}

TEST_CASE("block error rate is monotone in the erasure probability") {
    PcpSpec spec = two_level_spec(0.2, 0.5, 8, 16);
    PcpScheme scheme(spec);
    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = ChannelKind::BEC;
    cfg.params = {0.1, 0.3, 0.5, 0.7, 0.9};
    cfg.channel_params = cfg.params;
    cfg.trials = 3000;
    cfg.seed = 8;
    auto res = sweep(cfg, 2);
    double prev = -1.0;
    for (const auto& pt : res.points) {
        double bler = static_cast<double>(pt.rates[0].block_errors) /
                      static_cast<double>(pt.rates[0].evaluated);
        double se = std::sqrt(0.25 / static_cast<double>(pt.rates[0].evaluated));
        CHECK(bler >= prev - 3 * se);
        prev = bler;
    }
}

TEST_CASE("single-bit sanity code matches its analytic block error rate") {
    // k=1 over two BSC uses: the decoder sums two equal-magnitude llrs and
    // ties go to zero, so BLER = (p^2 + (2p(1-p) + p^2)) / 2 = p
    double p = 0.2;
    std::vector<ChannelModel> one{ChannelModel(ChannelKind::BSC, p)};
    PcpBuildOptions opts;
    opts.rates = std::vector<Rational>{Rational(1, 2)};
    opts.mc_trials = 40000;
    PcpSpec spec = build_pcp(1, one, 2, opts);
    REQUIRE(spec.levels[0].nested.sets[0].indices == std::vector<int>{2});
    PcpScheme scheme(spec);
    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = ChannelKind::BSC;
    cfg.params = {p};
    cfg.channel_params = {p};
    cfg.trials = 20000;
    cfg.seed = 13;
    auto res = sweep(cfg, 2);
    double bler = static_cast<double>(res.points[0].rates[0].block_errors) / cfg.trials;
    double analytic = p;
    double se = std::sqrt(analytic * (1 - analytic) / cfg.trials);
    CHECK(std::abs(bler - analytic) < 3 * se);
}

TEST_CASE("random puncturing baseline construction") {
    ChannelModel design(ChannelKind::BIAWGN, 0.9);
    auto fam = random_puncturing_baseline(512, 171, {228, 342, 512}, 11, design, {});
    CHECK(fam.info.size() == 171);
    CHECK(fam.patterns.size() == 3);
    CHECK(fam.patterns[0].n() == 228);
    CHECK(fam.patterns[1].n() == 342);
    CHECK(fam.patterns[2].n() == 512);
    // rates 3/4, 1/2, 1/3 up to rounding
    CHECK(171.0 / 228.0 == doctest::Approx(0.75));
    CHECK(171.0 / 342.0 == doctest::Approx(0.5));
    CHECK(171.0 / 512.0 == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    // shorter transmissions puncture supersets
    for (std::size_t i = 0; i < 512; ++i) {
        if (!fam.patterns[1].bits[i]) CHECK_FALSE(fam.patterns[0].bits[i]);
        if (!fam.patterns[2].bits[i]) CHECK_FALSE(fam.patterns[1].bits[i]);
    }
    CHECK_THROWS_AS(random_puncturing_baseline(512, 300, {228, 342, 512}, 11, design, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(random_puncturing_baseline(500, 100, {228}, 11, design, {}),
                    std::invalid_argument);
}

TEST_CASE("baseline with zero punctures is the mother code") {
    ChannelModel design(ChannelKind::BEC, 0.4);
    auto fam = random_puncturing_baseline(64, 24, {64}, 3, design, {});
    CHECK(fam.patterns[0].bits == std::vector<std::uint8_t>(64, 1));
    RandomPuncturingScheme scheme(fam);
    CHECK(scheme.stages() == 1);
    CHECK(scheme.k() == 24);
    Rng rng(4);
    std::vector<ChannelModel> chs{ChannelModel(ChannelKind::BEC, 0.0)};
    for (int t = 0; t < 50; ++t) {
        auto outcome = run_trial(scheme, chs, StopRule::FixedAll, rng);
        CHECK(outcome.first_success == 1);
    }
}

TEST_CASE("baseline noiseless round trip over all stages") {
    ChannelModel design(ChannelKind::BEC, 0.3);
    auto fam = random_puncturing_baseline(64, 20, {28, 40, 64}, 9, design, {});
    RandomPuncturingScheme scheme(fam);
    std::vector<ChannelModel> chs(3, ChannelModel(ChannelKind::BEC, 0.0));
    Rng rng(10);
    for (int t = 0; t < 50; ++t) {
        auto outcome = run_trial(scheme, chs, StopRule::FixedAll, rng);
        CHECK(outcome.block_error == std::vector<std::uint8_t>{0, 0, 0});
    }
}

TEST_CASE("ebno conversion follows the BPSK convention") {
    // Eb/N0 = 1/(2 R sigma^2): at R=1/2 and 0 dB, sigma = 1
    CHECK(biawgn_sigma_from_ebno_db(0.0, 0.5) == doctest::Approx(1.0));
    double sigma = biawgn_sigma_from_ebno_db(3.0, 0.75);
    CHECK(1.0 / (2.0 * 0.75 * sigma * sigma) == doctest::Approx(std::pow(10.0, 0.3)));
}
