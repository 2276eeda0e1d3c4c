// Command line for designing, checking, encoding/decoding and simulating
// parallel concatenated polar codes.
//
// Exit codes: 0 success, 1 runtime/domain failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcpc/harness.hpp"
#include "pcpc/serialize.hpp"

using namespace pcpc;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<Rational> parse_rates_list(const std::string& text) {
    std::vector<Rational> rates;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw UsageError("empty rate in list '" + text + "'");
        rates.push_back(parse_rational(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return rates;
}

std::vector<std::uint8_t> parse_hex_bits(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw UsageError("bits must be given as <hex>:<length>, got '" + text + "'");
    std::size_t len = std::stoull(text.substr(colon + 1));
    return mask_from_hex(text.substr(0, colon), len);
}

std::string format_hex_bits(std::span<const std::uint8_t> bits) {
    return mask_to_hex(bits) + ":" + std::to_string(bits.size());
}

void write_manifest(const std::string& out_path, const std::string& sub,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    RunManifest m;
    m.subcommand = sub;
    m.argv = argv;
    m.seed = seed;
    m.outputs = outputs;
    write_file(out_path + ".manifest.json", manifest_to_json(m));
}

ScRule parse_rule(const std::string& text) {
    if (text == "tanh") return ScRule::TanhExact;
    if (text == "minsum") return ScRule::MinSum;
    throw UsageError("--sc-rule must be tanh or minsum");
}

struct SweepSpec {
    ChannelKind kind;
    std::vector<double> params;          // reported
    std::vector<double> channel_params;  // channel parameter
};

std::vector<double> expand_grid(double start, double stop, double step) {
    std::vector<double> grid;
    if (step <= 0) throw UsageError("sweep step must be positive");
    long long count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count < 1) throw UsageError("empty sweep grid");
    for (long long i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
}

// "bec:0.1:0.9:0.1", "biawgn:0.5", "ebno:2:5:1:0.75" (dB at the given rate)
SweepSpec parse_sweep(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() < 2) throw UsageError("sweep must look like kind:start[:stop:step]");
    SweepSpec sw;
    if (parts[0] == "ebno") {
        if (parts.size() != 5) throw UsageError("ebno sweep needs ebno:start:stop:step:rate");
        sw.kind = ChannelKind::BIAWGN;
        sw.params = expand_grid(std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]));
        double rate = std::stod(parts[4]);
        if (!(rate > 0)) throw UsageError("ebno sweep rate must be positive");
        for (double db : sw.params) sw.channel_params.push_back(biawgn_sigma_from_ebno_db(db, rate));
        return sw;
    }
    if (parts[0] == "bec") sw.kind = ChannelKind::BEC;
    else if (parts[0] == "bsc") sw.kind = ChannelKind::BSC;
    else if (parts[0] == "biawgn") sw.kind = ChannelKind::BIAWGN;
    else throw UsageError("unknown sweep kind '" + parts[0] + "'");
    if (parts.size() == 2) sw.params = {std::stod(parts[1])};
    else if (parts.size() == 4)
        sw.params = expand_grid(std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]));
    else throw UsageError("sweep must look like kind:start[:stop:step]");
    sw.channel_params = sw.params;
    return sw;
}

int cmd_design(const std::vector<std::string>& channel_specs, long long k, long long n1,
               const std::string& rates_text, bool table1, long long mc_trials, std::uint64_t seed,
               int threads, const std::string& out, const std::vector<std::string>& argv) {
    std::vector<ChannelModel> channels;
    for (const auto& s : channel_specs) channels.push_back(ChannelModel::parse(s));

    PcpBuildOptions opts;
    opts.mc_trials = mc_trials;
    opts.seed = seed;
    opts.threads = threads;
    if (table1) {
        opts.pinned_lengths = std::vector<long long>{256, 128, 195};
        if (k == 0) k = 192;
    } else {
        if (k == 0) throw UsageError("--k is required");
        if (n1 == 0) throw UsageError("--n1 is required");
        if (!rates_text.empty()) opts.rates = parse_rates_list(rates_text);
    }

    PcpSpec spec = build_pcp(k, channels, n1, opts);
    spec.design_channels = channel_specs;
    write_file(out, spec_to_json(spec));
    write_manifest(out, "design", argv, seed, {out});
    std::printf("design: K=%d k=%lld lengths", spec.level_count(), spec.k());
    for (long long n : spec.schedule.lengths) std::printf(" %lld", n);
    std::printf(" -> %s\n", out.c_str());
    return 0;
}

int cmd_check(const std::string& spec_path) {
    PcpSpec spec = spec_from_json(read_file(spec_path));  // validates
    std::printf("OK: %s satisfies (c.1), (c.2), (c.3) and the mapping invariants (K=%d, k=%lld)\n",
                spec_path.c_str(), spec.level_count(), spec.k());
    return 0;
}

int cmd_encode(const std::string& spec_path, int level, const std::string& in_text) {
    PcpSpec spec = spec_from_json(read_file(spec_path));
    auto bits = parse_hex_bits(in_text);
    if (bits.size() != static_cast<std::size_t>(spec.k()))
        throw std::runtime_error("message length " + std::to_string(bits.size()) +
                                 " does not match k=" + std::to_string(spec.k()));
    auto chunk = encode_incremental(spec, bits, level);
    std::printf("%s\n", format_hex_bits(chunk).c_str());
    return 0;
}

int cmd_decode(const std::string& spec_path, const std::vector<std::string>& chunk_texts,
               const std::string& rule_text) {
    PcpSpec spec = spec_from_json(read_file(spec_path));
    if (chunk_texts.empty()) throw UsageError("at least one --chunk is required");
    std::vector<std::vector<std::uint8_t>> hard;
    std::vector<std::vector<double>> llrs;
    for (std::size_t i = 0; i < chunk_texts.size(); ++i) {
        auto bits = parse_hex_bits(chunk_texts[i]);
        if (bits.size() != static_cast<std::size_t>(spec.schedule.lengths[i]))
            throw std::runtime_error("chunk " + std::to_string(i + 1) + " must have length " +
                                     std::to_string(spec.schedule.lengths[i]));
        std::vector<double> l(bits.size());
        for (std::size_t t = 0; t < bits.size(); ++t) l[t] = bits[t] ? -kHardLlr : kHardLlr;
        hard.push_back(std::move(bits));
        llrs.push_back(std::move(l));
    }
    auto res = sequential_decode(spec, llrs, parse_rule(rule_text));
    std::printf("message %s\n", format_hex_bits(res.message).c_str());
    for (std::size_t i = 0; i < hard.size(); ++i) {
        auto re = encode_incremental(spec, res.message, static_cast<int>(i) + 1);
        bool consistent = re == hard[i];
        std::printf("stage %zu: decoded %zu bits, reencode %s\n", i + 1, res.stage_bits[i].size(),
                    consistent ? "consistent" : "MISMATCH");
    }
    return 0;
}

int cmd_reliability(const std::string& channel_spec, long long n, const std::string& method,
                    long long trials, std::uint64_t seed, int threads, long long size,
                    const std::string& out, const std::vector<std::string>& argv) {
    ChannelModel ch = ChannelModel::parse(channel_spec);
    if (n < 1) throw UsageError("--n must be positive");
    std::size_t n_u = 1;
    while (n_u < static_cast<std::size_t>(n)) n_u <<= 1;
    PuncturePattern pattern = make_uniform_pattern(n_u, static_cast<std::size_t>(n));

    ReliabilityProfile profile;
    DesignOptions dopts{trials, seed, threads};
    if (method == "auto") {
        profile = punctured_reliability(ch, pattern, dopts);
    } else if (method == "bec") {
        if (ch.kind() != ChannelKind::BEC) throw UsageError("method bec needs a bec channel");
        profile = punctured_reliability(ch, pattern, dopts);
    } else if (method == "ga") {
        if (ch.kind() != ChannelKind::BIAWGN) throw UsageError("method ga needs a biawgn channel");
        profile = gaussian_reliability(ch.param(), n_u, pattern.bits);
    } else if (method == "mc") {
        profile = monte_carlo_reliability(ch, n_u, pattern.bits, trials, seed, threads);
    } else {
        throw UsageError("unknown method '" + method + "'");
    }

    std::string doc;
    if (size > 0) {
        InformationSet set = select_information_set(profile, static_cast<std::size_t>(size));
        doc = construction_to_json(profile, set);
    } else {
        doc = profile_to_json(profile);
    }
    write_file(out, doc);
    write_manifest(out, "reliability", argv, seed, {out});
    std::printf("reliability: %s n_u=%zu n=%lld %s -> %s\n", channel_spec.c_str(), n_u, n,
                metric_kind_name(profile.kind), out.c_str());
    return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& sweep_text, long long trials,
                 std::uint64_t seed, int threads, const std::string& stop_text,
                 const std::string& rule_text, const std::string& csv_path, const std::string& baseline,
                 const std::string& baseline_csv, long long baseline_nu, long long baseline_k,
                 const std::string& baseline_design, const std::vector<std::string>& argv) {
    PcpSpec spec = spec_from_json(read_file(spec_path));
    SweepSpec sw = parse_sweep(sweep_text);
    StopRule stop;
    if (stop_text == "fixed") stop = StopRule::FixedAll;
    else if (stop_text == "acknack") stop = StopRule::AckNack;
    else throw UsageError("--stop must be fixed or acknack");

    ScRule rule = parse_rule(rule_text);
    PcpScheme scheme(spec, rule);
    SweepConfig cfg;
    cfg.scheme = &scheme;
    cfg.kind = sw.kind;
    cfg.params = sw.params;
    cfg.channel_params = sw.channel_params;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.stop = stop;
    SweepResult res = sweep(cfg, threads);
    write_file(csv_path, sweep_csv(scheme, res));
    std::vector<std::string> outputs{csv_path};

    if (!baseline.empty()) {
        if (baseline != "random-puncturing")
            throw UsageError("unknown baseline '" + baseline + "'");
        if (baseline_csv.empty()) throw UsageError("--baseline-csv is required with --baseline");
        std::string design_spec = baseline_design;
        if (design_spec.empty()) {
            if (spec.design_channels.empty())
                throw UsageError("spec carries no design channels; pass --baseline-design");
            design_spec = spec.design_channels.back();
        }
        ChannelModel design_ch = ChannelModel::parse(design_spec);
        // target lengths follow the spec's rate schedule: round(k / R_t), capped at n_u
        std::vector<long long> lengths;
        for (const auto& r : spec.schedule.rates) {
            Rational inv = Rational(baseline_k) / r;
            long long len = (inv.numerator() + inv.denominator() / 2) / inv.denominator();
            lengths.push_back(std::min<long long>(len, baseline_nu));
        }
        RcPuncturedFamily fam =
            random_puncturing_baseline(static_cast<std::size_t>(baseline_nu), baseline_k, lengths,
                                       seed, design_ch, {100000, seed, threads});
        RandomPuncturingScheme bscheme(std::move(fam), rule);
        SweepConfig bcfg = cfg;
        bcfg.scheme = &bscheme;
        SweepResult bres = sweep(bcfg, threads);
        write_file(baseline_csv, sweep_csv(bscheme, bres));
        outputs.push_back(baseline_csv);
    }
    write_manifest(csv_path, "simulate", argv, seed, outputs);
    std::printf("simulate: %zu points x %lld trials -> %s\n", sw.params.size(), trials, csv_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel concatenated polar codes: construction, codec and Monte Carlo harness"};
    app.require_subcommand(1);
    std::vector<std::string> raw_args(argv + 1, argv + argc);

    auto* design = app.add_subcommand("design", "construct a PCP spec");
    std::vector<std::string> d_channels;
    long long d_k = 0, d_n1 = 0, d_trials = 100000;
    std::string d_rates, d_out;
    bool d_table1 = false;
    std::uint64_t d_seed = 1;
    int d_threads = 1;
    design->add_option("--channel", d_channels, "channel spec kind:param, repeat per rate")->required();
    design->add_option("--k", d_k, "information bits");
    design->add_option("--n1", d_n1, "first transmission length");
    design->add_option("--rates", d_rates, "comma list of rates, e.g. 3/4,1/2,1/3");
    design->add_flag("--table1-mode", d_table1, "pin lengths 256,128,195 (k defaults to 192)");
    design->add_option("--mc-trials", d_trials, "trials for Monte Carlo reliability (BSC)");
    design->add_option("--seed", d_seed, "construction seed");
    design->add_option("--threads", d_threads, "worker threads");
    design->add_option("--out", d_out, "output spec JSON")->required();

    auto* check = app.add_subcommand("check", "validate a spec file");
    std::string c_spec;
    check->add_option("--spec", c_spec, "spec JSON")->required();

    auto* encode = app.add_subcommand("encode", "emit the chunk for one level");
    std::string e_spec, e_in;
    int e_level = 1;
    encode->add_option("--spec", e_spec)->required();
    encode->add_option("--level", e_level)->required();
    encode->add_option("--in", e_in, "message bits as <hex>:<len>, MSB first")->required();

    auto* decode = app.add_subcommand("decode", "sequentially decode received chunks");
    std::string dc_spec;
    std::vector<std::string> dc_chunks;
    decode->add_option("--spec", dc_spec)->required();
    decode->add_option("--chunk", dc_chunks, "received chunk bits <hex>:<len>, in order")->required();
    std::string dc_rule = "tanh";
    decode->add_option("--sc-rule", dc_rule, "tanh|minsum");

    auto* rel = app.add_subcommand("reliability", "dump a reliability profile");
    std::string r_channel, r_method = "auto", r_out;
    long long r_n = 0, r_trials = 100000, r_size = 0;
    std::uint64_t r_seed = 1;
    int r_threads = 1;
    rel->add_option("--channel", r_channel)->required();
    rel->add_option("--n", r_n, "target (post-puncturing) length")->required();
    rel->add_option("--method", r_method, "auto|bec|ga|mc");
    rel->add_option("--trials", r_trials);
    rel->add_option("--seed", r_seed);
    rel->add_option("--threads", r_threads);
    rel->add_option("--size", r_size, "also select an information set of this size");
    rel->add_option("--out", r_out)->required();

    auto* sim = app.add_subcommand("simulate", "Monte Carlo sweep to CSV");
    std::string s_spec, s_sweep, s_csv, s_stop = "fixed", s_baseline, s_baseline_csv, s_baseline_design;
    long long s_trials = 1000, s_bnu = 512, s_bk = 171;
    std::uint64_t s_seed = 1;
    int s_threads = 1;
    sim->add_option("--spec", s_spec)->required();
    sim->add_option("--sweep", s_sweep, "kind:start:stop:step | kind:value | ebno:start:stop:step:rate")->required();
    sim->add_option("--trials", s_trials);
    sim->add_option("--seed", s_seed);
    sim->add_option("--threads", s_threads, "worker threads (results are independent of this)");
    sim->add_option("--stop", s_stop, "fixed|acknack");
    std::string s_rule = "tanh";
    sim->add_option("--sc-rule", s_rule, "tanh|minsum");
    sim->add_option("--csv", s_csv)->required();
    sim->add_option("--baseline", s_baseline, "random-puncturing");
    sim->add_option("--baseline-csv", s_baseline_csv);
    sim->add_option("--baseline-nu", s_bnu, "baseline mother length");
    sim->add_option("--baseline-k", s_bk, "baseline information bits");
    sim->add_option("--baseline-design", s_baseline_design, "baseline design channel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (design->parsed())
            return cmd_design(d_channels, d_k, d_n1, d_rates, d_table1, d_trials, d_seed, d_threads,
                              d_out, raw_args);
        if (check->parsed()) return cmd_check(c_spec);
        if (encode->parsed()) return cmd_encode(e_spec, e_level, e_in);
        if (decode->parsed()) return cmd_decode(dc_spec, dc_chunks, dc_rule);
        if (rel->parsed())
            return cmd_reliability(r_channel, r_n, r_method, r_trials, r_seed, r_threads, r_size,
                                   r_out, raw_args);
        if (sim->parsed())
            return cmd_simulate(s_spec, s_sweep, s_trials, s_seed, s_threads, s_stop, s_rule,
                                s_csv, s_baseline, s_baseline_csv, s_bnu, s_bk, s_baseline_design,
                                raw_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
