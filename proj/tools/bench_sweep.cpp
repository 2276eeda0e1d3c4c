// Compares the serial reference sweep against the OpenMP path and verifies
// that both produce byte-identical CSV output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "pcpc/harness.hpp"

using namespace pcpc;
using clock_type = std::chrono::steady_clock;

int main(int argc, char** argv) {
    long long trials = argc > 1 ? std::atoll(argv[1]) : 2000;
    long long n1 = argc > 2 ? std::atoll(argv[2]) : 1024;
    int max_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (max_threads < 2) max_threads = 2;

    std::vector<ChannelModel> channels{ChannelModel(ChannelKind::BEC, 0.35),
                                       ChannelModel(ChannelKind::BEC, 0.6)};
    PcpBuildOptions opts;
    opts.rates = std::vector<Rational>{Rational(1, 2), Rational(1, 4)};
    PcpSpec spec = build_pcp(n1 / 2, channels, n1, opts);
    PcpScheme scheme(spec);

    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = ChannelKind::BEC;
    cfg.params = {0.3, 0.5};
    cfg.channel_params = cfg.params;
    cfg.trials = trials;
    cfg.seed = 42;

    std::printf("sweep benchmark: k=%lld n1=%lld trials=%lld points=%zu\n", spec.k(), n1, trials,
                cfg.params.size());
    std::string reference_csv;
    double t_serial = 0.0;
    for (int threads : {1, max_threads}) {
        auto t0 = clock_type::now();
        SweepResult res = sweep(cfg, threads);
        auto t1 = clock_type::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        std::string csv = sweep_csv(scheme, res);
        bool same = reference_csv.empty() || csv == reference_csv;
        if (reference_csv.empty()) {
            reference_csv = csv;
            t_serial = secs;
        }
        std::printf("threads=%-2d  %8.3fs  speedup %.2fx  csv %s\n", threads, secs,
                    t_serial / secs, same ? "identical" : "DIFFERS");
        if (!same) return 1;
    }
    return 0;
}
