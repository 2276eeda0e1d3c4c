#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <map>
#include <numeric>

#include "pcpc/harness.hpp"
#include "pcpc/pcp.hpp"

using namespace pcpc;

namespace {

std::vector<ChannelModel> bec_pair() {
    return {ChannelModel(ChannelKind::BEC, 0.3), ChannelModel(ChannelKind::BEC, 0.6)};
}

PcpSpec small_two_level() {
    PcpBuildOptions opts;
    opts.rates = std::vector<Rational>{Rational(1, 2), Rational(1, 4)};
    auto chs = bec_pair();
    return build_pcp(4, chs, 8, opts);
}

long long gf2_rank(GeneratorMatrix g) {
    long long rank = 0;
    for (long long c = 0; c < g.cols && rank < g.rows; ++c) {
        long long pivot = -1;
        for (long long r = rank; r < g.rows; ++r)
            if (g.at(r, c)) { pivot = r; break; }
        if (pivot < 0) continue;
        for (long long x = 0; x < g.cols; ++x)
            std::swap(g.bits[static_cast<std::size_t>(rank * g.cols + x)],
                      g.bits[static_cast<std::size_t>(pivot * g.cols + x)]);
        for (long long r = 0; r < g.rows; ++r) {
            if (r != rank && g.at(r, c))
                for (long long x = 0; x < g.cols; ++x)
                    g.bits[static_cast<std::size_t>(r * g.cols + x)] ^= g.at(rank, x);
        }
        ++rank;
    }
    return rank;
}

std::vector<std::uint8_t> mul_gf2(std::span<const std::uint8_t> u, const GeneratorMatrix& g) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(g.cols), 0);
    for (long long r = 0; r < g.rows; ++r)
        if (u[static_cast<std::size_t>(r)])
            for (long long c = 0; c < g.cols; ++c) out[static_cast<std::size_t>(c)] ^= g.at(r, c);
    return out;
}

}  // namespace

TEST_CASE("rational parsing") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("0.75") == Rational(3, 4));
    CHECK(parse_rational("192/579") == Rational(64, 193));
    CHECK(parse_rational("2") == Rational(2));
    CHECK(parse_rational("-0.5") == Rational(-1, 2));
    CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1.5.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("3/4x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1."), std::invalid_argument);
}

TEST_CASE("length derivation from rates") {
    auto s = derive_lengths(192, {Rational(3, 4), Rational(1, 2)}, 256);
    CHECK(s.lengths == std::vector<long long>{256, 128});
    CHECK(s.cumulative == std::vector<long long>{256, 384});

    auto s3 = derive_lengths(192, {Rational(3, 4), Rational(1, 2), Rational(1, 3)}, 256);
    CHECK(s3.lengths == std::vector<long long>{256, 128, 192});

    auto s4 = derive_lengths(4, {Rational(1, 2), Rational(1, 4)}, 8);
    CHECK(s4.lengths == std::vector<long long>{8, 8});

    // R_1 n_1 must equal k
    CHECK_THROWS_AS(derive_lengths(3, {Rational(1, 2), Rational(1, 4)}, 4), std::invalid_argument);
    // non-integer n_2: (1/2)(7/2 - 2) * 2 = 3/2
    CHECK_THROWS_AS(derive_lengths(1, {Rational(1, 2), Rational(2, 7)}, 2), std::invalid_argument);
    // rates must decrease
    CHECK_THROWS_AS(derive_lengths(4, {Rational(1, 2), Rational(1, 2)}, 8), std::invalid_argument);
}

TEST_CASE("length derivation round trips the rate identity") {
    Rng rng(101);
    int done = 0;
    while (done < 100) {
        int K = 2 + static_cast<int>(rng.below(3));
        std::vector<Rational> rates;
        long long num = 30 + static_cast<long long>(rng.below(10));
        long long den = num + 1 + static_cast<long long>(rng.below(10));
        rates.emplace_back(num, den);
        for (int i = 1; i < K; ++i) {
            num = std::max<long long>(1, num - 1 - static_cast<long long>(rng.below(5)));
            den = den + static_cast<long long>(rng.below(7));
            Rational r(num, den);
            if (r >= rates.back()) continue;
            rates.push_back(r);
        }
        if (static_cast<int>(rates.size()) != K) continue;
        // choose n1 to clear every denominator
        long long lcm = rates[0].denominator();
        for (int i = 1; i < K; ++i) {
            Rational step = rates[0] * (Rational(1) / rates[i] - Rational(1) / rates[i - 1]);
            lcm = std::lcm(lcm, step.denominator());
        }
        long long n1 = lcm * (1 + static_cast<long long>(rng.below(3)));
        long long k = (rates[0] * n1).numerator();
        auto s = derive_lengths(k, rates, n1);
        // the rate identity recomputed from the derived lengths
        for (int i = 0; i < K; ++i) {
            Rational sum(0);
            for (int j = 1; j <= i; ++j) sum += Rational(s.lengths[j], n1);
            CHECK(s.rates[i] == s.rates[0] / (Rational(1) + sum));
            CHECK(s.rates[i] * s.cumulative[i] == Rational(k));
        }
        ++done;
    }
}

TEST_CASE("dyadic feasibility checker") {
    std::vector<Rational> ok{Rational(4, 5), Rational(2, 5), Rational(1, 5)};
    auto r = check_dyadic_feasibility(ok);
    CHECK(r.feasible);
    CHECK(r.exponents == std::vector<long long>{0, 1});

    std::vector<Rational> bad{Rational(3, 4), Rational(1, 2), Rational(1, 3)};
    CHECK_FALSE(check_dyadic_feasibility(bad).feasible);

    std::vector<Rational> single{Rational(1, 2)};
    auto rs = check_dyadic_feasibility(single);
    CHECK(rs.feasible);
    CHECK(rs.exponents.empty());

    // negative exponents are allowed
    std::vector<Rational> half{Rational(1, 2), Rational(1, 3)};
    auto rh = check_dyadic_feasibility(half);
    CHECK(rh.feasible);
    CHECK(rh.exponents == std::vector<long long>{-1});

    std::vector<Rational> increasing{Rational(1, 3), Rational(1, 2)};
    CHECK_THROWS_AS(check_dyadic_feasibility(increasing), std::invalid_argument);
}

TEST_CASE("apportionment reproduces the table1 sizes") {
    auto sched = schedule_from_lengths(192, {256, 128, 195});
    CHECK(sched.rates == std::vector<Rational>{Rational(3, 4), Rational(1, 2), Rational(64, 193)});
    auto rows = apportion_sizes(sched);
    CHECK(rows[0] == std::vector<long long>{192});
    CHECK(rows[1] == std::vector<long long>{128, 64});
    CHECK(rows[2] == std::vector<long long>{85, 42, 65});
}

TEST_CASE("apportionment with exact integer shares") {
    auto sched = derive_lengths(4, {Rational(1, 2), Rational(1, 4)}, 8);
    auto rows = apportion_sizes(sched);
    CHECK(rows[0] == std::vector<long long>{4});
    CHECK(rows[1] == std::vector<long long>{2, 2});

    auto k1 = schedule_from_lengths(5, {10});
    CHECK(apportion_sizes(k1) == std::vector<std::vector<long long>>{{5}});
}

TEST_CASE("apportionment invariants on random schedules") {
    Rng rng(202);
    for (int t = 0; t < 200; ++t) {
        int K = 1 + static_cast<int>(rng.below(4));
        std::vector<long long> lengths;
        for (int i = 0; i < K; ++i) lengths.push_back(4 + static_cast<long long>(rng.below(60)));
        long long k = 1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(lengths[0])));
        auto sched = schedule_from_lengths(k, lengths);
        auto rows = apportion_sizes(sched);
        for (int j = 1; j <= K; ++j) {
            long long sum = std::accumulate(rows[j - 1].begin(), rows[j - 1].end(), 0LL);
            CHECK(sum == k);  // every rate can carry all information bits
            for (int i = 1; i <= j; ++i) {
                CHECK(rows[j - 1][i - 1] >= 0);
                CHECK(rows[j - 1][i - 1] <= lengths[i - 1]);
                if (j > i) CHECK(rows[j - 1][i - 1] <= rows[j - 2][i - 1]);
            }
        }
        // diagonal identity a_i^(i) = sum_j q_{i-1}^(j)
        for (int i = 2; i <= K; ++i) {
            long long q = 0;
            for (int j = 1; j < i; ++j) q += rows[i - 2][j - 1] - rows[i - 1][j - 1];
            CHECK(q == rows[i - 1][i - 1]);
        }
    }
}

TEST_CASE("bit mappings: identity first, block rule afterwards") {
    auto rows2 = apportion_sizes(derive_lengths(4, {Rational(1, 2), Rational(1, 4)}, 8));
    auto maps = build_bit_mappings(rows2, 4);
    CHECK(maps[0].table == std::vector<long long>{1, 2, 3, 4});
    CHECK(maps[1].table == std::vector<long long>{3, 4});

    auto one = build_bit_mappings({{7}}, 7);
    CHECK(one.size() == 1);
    CHECK(one[0].table == std::vector<long long>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("bit mappings on the table1 sizes") {
    auto rows = apportion_sizes(schedule_from_lengths(192, {256, 128, 195}));
    auto maps = build_bit_mappings(rows, 192);
    CHECK(maps[1].table.size() == 64);
    CHECK(maps[2].table.size() == 65);
    // h2 covers exactly the last 64 information indices
    for (std::size_t m = 0; m < 64; ++m) CHECK(maps[1].table[m] == 129 + static_cast<long long>(m));
    // the images decoded at the final rate partition [k]
    std::vector<int> seen(193, 0);
    for (int i = 0; i < 3; ++i) {
        long long a_k = rows[2][i];
        for (long long m = 0; m < a_k; ++m) ++seen[static_cast<std::size_t>(maps[i].table[m])];
    }
    for (int g = 1; g <= 192; ++g) CHECK(seen[g] == 1);
}

TEST_CASE("build produces a valid spec and the expected small schedule") {
    PcpSpec spec = small_two_level();
    CHECK(spec.level_count() == 2);
    CHECK(spec.schedule.lengths == std::vector<long long>{8, 8});
    CHECK(spec.levels[0].sizes == std::vector<long long>{4, 2});
    CHECK(spec.levels[1].sizes == std::vector<long long>{2});
    CHECK_NOTHROW(spec.validate());

    // default schedule (no explicit rates) picks dyadic lengths below capacity
    auto chs = bec_pair();
    PcpSpec dflt = build_pcp(4, chs, 8, {});
    CHECK(dflt.schedule.lengths == std::vector<long long>{8, 8});
    CHECK(dflt.schedule.rates == std::vector<Rational>{Rational(1, 2), Rational(1, 4)});

    // K = 1 degenerates to a plain polar code with the identity mapping
    std::vector<ChannelModel> one{ChannelModel(ChannelKind::BEC, 0.4)};
    PcpBuildOptions o1;
    o1.rates = std::vector<Rational>{Rational(1, 2)};
    PcpSpec k1 = build_pcp(8, one, 16, o1);
    CHECK(k1.level_count() == 1);
    std::vector<long long> identity(8);
    std::iota(identity.begin(), identity.end(), 1);
    CHECK(k1.levels[0].mapping.table == identity);

    std::vector<ChannelModel> none;
    CHECK_THROWS_AS(build_pcp(4, none, 8, {}), std::invalid_argument);
    std::vector<ChannelModel> undegraded{ChannelModel(ChannelKind::BEC, 0.6),
                                         ChannelModel(ChannelKind::BEC, 0.3)};
    CHECK_THROWS_AS(build_pcp(4, undegraded, 8, {}), std::invalid_argument);
}

TEST_CASE("incremental encoding") {
    PcpSpec spec = small_two_level();
    std::vector<std::uint8_t> zeros(4, 0);
    CHECK(encode_incremental(spec, zeros, 1) == std::vector<std::uint8_t>(8, 0));
    CHECK(encode_incremental(spec, zeros, 2) == std::vector<std::uint8_t>(8, 0));

    // level 2 re-encodes bits u3,u4 on A_2^(2) of a fresh length-8 code
    Rng rng(55);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint8_t> u(4);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());
        auto chunk = encode_incremental(spec, u, 2);
        const auto& info = spec.levels[1].nested.sets[0];
        std::vector<std::uint8_t> picked{u[2], u[3]};
        CHECK(chunk == polar_encode(info, picked));
    }

    // a single-level spec encodes exactly like the standalone polar code
    std::vector<ChannelModel> one{ChannelModel(ChannelKind::BEC, 0.4)};
    PcpBuildOptions o1;
    o1.rates = std::vector<Rational>{Rational(1, 2)};
    PcpSpec k1 = build_pcp(8, one, 16, o1);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::uint8_t> u(8);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());
        CHECK(encode_incremental(k1, u, 1) == polar_encode(k1.levels[0].nested.sets[0], u));
    }

    CHECK_THROWS_AS(encode_incremental(spec, zeros, 3), std::invalid_argument);
    std::vector<std::uint8_t> wrong(3, 0);
    CHECK_THROWS_AS(encode_incremental(spec, wrong, 1), std::invalid_argument);
}

TEST_CASE("generator assembly equals incremental encoding and nests") {
    PcpSpec spec = small_two_level();
    auto g1 = assemble_generator(spec, 1);
    auto g2 = assemble_generator(spec, 2);
    CHECK(g1.cols == 8);
    CHECK(g2.cols == 16);
    Rng rng(66);
    for (int t = 0; t < 100; ++t) {
        std::vector<std::uint8_t> u(4);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());
        std::vector<std::uint8_t> cat;
        for (int m = 1; m <= 2; ++m) {
            auto c = encode_incremental(spec, u, m);
            cat.insert(cat.end(), c.begin(), c.end());
        }
        CHECK(mul_gf2(u, g2) == cat);
    }
    // column-block prefix nesting
    for (long long r = 0; r < g1.rows; ++r)
        for (long long c = 0; c < g1.cols; ++c) CHECK(g1.at(r, c) == g2.at(r, c));
    CHECK(gf2_rank(g2) == 4);
    CHECK(gf2_rank(g1) == 4);

    // K = 1: the generator is the information-set submatrix of P_n
    std::vector<ChannelModel> one{ChannelModel(ChannelKind::BEC, 0.4)};
    PcpBuildOptions o1;
    o1.rates = std::vector<Rational>{Rational(1, 2)};
    PcpSpec k1 = build_pcp(4, one, 8, o1);
    auto g = assemble_generator(k1, 1);
    const auto& info = k1.levels[0].nested.sets[0];
    for (std::size_t m = 0; m < info.indices.size(); ++m) {
        std::vector<std::uint8_t> e(8, 0);
        e[static_cast<std::size_t>(info.indices[m]) - 1] = 1;
        auto row = polar_transform(e);
        for (int c = 0; c < 8; ++c) CHECK(g.at(static_cast<long long>(m), c) == row[static_cast<std::size_t>(c)]);
    }

    CHECK_THROWS_AS(assemble_generator(spec, 2, 8), std::invalid_argument);
}

TEST_CASE("sequential decode with one transmission is plain SC") {
    std::vector<ChannelModel> one{ChannelModel(ChannelKind::BEC, 0.4)};
    PcpBuildOptions o1;
    o1.rates = std::vector<Rational>{Rational(1, 2)};
    PcpSpec k1 = build_pcp(8, one, 16, o1);
    const auto& info = k1.levels[0].nested.sets[0];
    Rng rng(88);
    ChannelModel ch(ChannelKind::BEC, 0.4);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint8_t> u(8);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());
        auto x = encode_incremental(k1, u, 1);
        std::vector<double> llrs(16);
        for (int i = 0; i < 16; ++i) llrs[static_cast<std::size_t>(i)] = ch.llr(ch.sample(x[static_cast<std::size_t>(i)], rng));
        auto seq = sequential_decode(k1, {llrs});
        std::map<int, std::uint8_t> frozen;
        auto mask = info.mask();
        for (int i = 0; i < 16; ++i)
            if (!mask[static_cast<std::size_t>(i)]) frozen[i + 1] = 0;
        auto plain = sc_decode(llrs, frozen, info);
        CHECK(seq.message == plain.info_bits);
        CHECK(seq.stage_bits[0].size() == 8);
    }
}

TEST_CASE("sequential decode equals the residual standalone code stage by stage") {
    // first chunk fully erased, second noiseless: stage 2 always succeeds and
    // stage 1 behaves exactly like the standalone rate-R2 code over erasures
    PcpSpec spec = small_two_level();
    const auto& lvl1 = spec.levels[0];
    long long a2 = lvl1.sizes[1];
    Rng rng(99);
    int stage2_fail = 0;
    for (int t = 0; t < 2000; ++t) {
        std::vector<std::uint8_t> u(4);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng.bit());
        std::vector<std::vector<double>> chunks;
        chunks.push_back(std::vector<double>(8, 0.0));  // erased
        auto c2 = encode_incremental(spec, u, 2);
        std::vector<double> l2(8);
        for (int i = 0; i < 8; ++i) l2[static_cast<std::size_t>(i)] = c2[static_cast<std::size_t>(i)] ? -kHardLlr : kHardLlr;
        chunks.push_back(l2);
        auto seq = sequential_decode(spec, chunks);

        // stage 2 (level 2) bits must be exact
        for (long long g : seq.stage_bits[1])
            if (seq.message[static_cast<std::size_t>(g) - 1] != u[static_cast<std::size_t>(g) - 1]) ++stage2_fail;

        // standalone C(n1, R2, A_2^(1)) with the true later-stage bits frozen
        std::vector<std::uint8_t> fmask(8, 1), fval(8, 0);
        for (long long m = 0; m < a2; ++m) fmask[static_cast<std::size_t>(lvl1.stacked[static_cast<std::size_t>(m)]) - 1] = 0;
        for (std::size_t m = static_cast<std::size_t>(a2); m < lvl1.stacked.size(); ++m)
            fval[static_cast<std::size_t>(lvl1.stacked[m]) - 1] =
                u[static_cast<std::size_t>(lvl1.mapping.table[m]) - 1];
        ScDecoder dec(8);
        const auto& ures = dec.decode(std::vector<double>(8, 0.0), fmask, fval);
        for (long long m = 0; m < a2; ++m) {
            std::size_t g = static_cast<std::size_t>(lvl1.mapping.table[static_cast<std::size_t>(m)]) - 1;
            CHECK(seq.message[g] == ures[static_cast<std::size_t>(lvl1.stacked[static_cast<std::size_t>(m)]) - 1]);
        }
    }
    CHECK(stage2_fail == 0);
}

TEST_CASE("sequential decode validates its inputs") {
    PcpSpec spec = small_two_level();
    std::vector<std::vector<double>> none;
    CHECK_THROWS_AS(sequential_decode(spec, none), std::invalid_argument);
    std::vector<std::vector<double>> wrong{std::vector<double>(7, 0.0)};
    CHECK_THROWS_AS(sequential_decode(spec, wrong), std::invalid_argument);
    std::vector<std::vector<double>> toomany(3, std::vector<double>(8, 0.0));
    CHECK_THROWS_AS(sequential_decode(spec, toomany), std::invalid_argument);
}

TEST_CASE("validation names the violated condition") {
    PcpSpec spec = small_two_level();

    PcpSpec bad_rate = spec;
    bad_rate.schedule.rates[1] = Rational(1, 3);
    CHECK_THROWS_WITH_AS(bad_rate.validate(),
                         doctest::Contains("(c.1)"), std::runtime_error);

    PcpSpec bad_nest = spec;
    // replace the deepest set of level 1 with one that escapes its superset
    auto& sets = bad_nest.levels[0].nested.sets;
    sets[1].indices = {1, 2};
    bad_nest.levels[0].stacked = {1, 2, 7, 8};  // keep sizes consistent
    CHECK_THROWS_WITH_AS(bad_nest.validate(), doctest::Contains("(c.2)"), std::runtime_error);

    PcpSpec bad_map = spec;
    bad_map.levels[1].mapping.table = {3, 3};
    CHECK_THROWS_WITH_AS(bad_map.validate(), doctest::Contains("injective"), std::runtime_error);

    PcpSpec bad_size = spec;
    bad_size.levels[1].sizes = {1};
    CHECK_THROWS_WITH_AS(bad_size.validate(), doctest::Contains("(c.3)"), std::runtime_error);
}
