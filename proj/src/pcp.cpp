#include "pcpc/pcp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcpc {

namespace {

long long floor_of(const Rational& r) {
    // boost::rational keeps the denominator positive
    long long n = r.numerator(), d = r.denominator();
    if (n >= 0) return n / d;
    return -((-n + d - 1) / d);
}

bool is_pow2_ll(long long v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_ll(long long v) {
    int e = 0;
    while ((1LL << e) < v) ++e;
    return e;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return detail::mix64(seed ^ detail::mix64(a * 1000003ULL + b));
}

std::vector<int> stacked_row_order(const NestedSetFamily& nested) {
    // Deepest set's rows first, ascending inside each difference block.
    std::vector<int> order;
    std::size_t levels = nested.sets.size();
    std::vector<std::uint8_t> covered(nested.n_u, 0);
    for (std::size_t t = levels; t-- > 0;) {
        for (int idx : nested.sets[t].indices) {
            if (!covered[static_cast<std::size_t>(idx) - 1]) {
                covered[static_cast<std::size_t>(idx) - 1] = 1;
                order.push_back(idx);
            }
        }
    }
    return order;
}

const ChannelModel& channel_for_rate(std::span<const ChannelModel> channels, int j) {
    if (channels.size() == 1) return channels[0];
    return channels[static_cast<std::size_t>(j) - 1];
}

}  // namespace

namespace {
// whole-string integer parse; std::stoll would silently stop at junk
long long parse_ll(std::string_view text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::invalid_argument("bad integer '" + std::string(text) + "'");
    return v;
}
}  // namespace

Rational parse_rational(std::string_view text) {
    auto bad = [&] { return std::invalid_argument("cannot parse rational '" + std::string(text) + "'"); };
    if (text.empty()) throw bad();
    try {
        auto slash = text.find('/');
        if (slash != std::string_view::npos) {
            long long num = parse_ll(text.substr(0, slash));
            long long den = parse_ll(text.substr(slash + 1));
            if (den == 0) throw bad();
            return {num, den};
        }
        auto dot = text.find('.');
        if (dot != std::string_view::npos) {
            std::size_t frac_digits = text.size() - dot - 1;
            if (frac_digits == 0 || frac_digits > 17) throw bad();
            long long whole = dot > 0 ? parse_ll(text.substr(0, dot)) : 0;
            long long frac = parse_ll(text.substr(dot + 1));
            if (frac < 0) throw bad();
            long long den = 1;
            for (std::size_t i = 0; i < frac_digits; ++i) den *= 10;
            bool negative = !text.empty() && text.front() == '-';
            long long num = whole * den + (negative ? -frac : frac);
            return {num, den};
        }
        return {parse_ll(text), 1};
    } catch (const std::invalid_argument&) {
        throw bad();
    }
}

RateSchedule derive_lengths(long long k, std::vector<Rational> rates, long long n1) {
    if (rates.empty()) throw std::invalid_argument("at least one rate is required");
    if (n1 < 1) throw std::invalid_argument("n1 must be positive");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (rates[i] <= Rational(0)) throw std::invalid_argument("rates must be positive");
        if (i > 0 && rates[i] >= rates[i - 1])
            throw std::invalid_argument("rates must be strictly decreasing");
    }
    if (rates[0] * n1 != Rational(k))
        throw std::invalid_argument("k mismatch: R_1 * n_1 must equal k exactly");

    RateSchedule s;
    s.k = k;
    s.rates = std::move(rates);
    s.lengths = {n1};
    s.cumulative = {n1};
    for (std::size_t i = 1; i < s.rates.size(); ++i) {
        Rational ni = s.rates[0] * (Rational(1) / s.rates[i] - Rational(1) / s.rates[i - 1]) * n1;
        if (ni.denominator() != 1)
            throw std::invalid_argument("non-integer incremental length n_" + std::to_string(i + 1) +
                                        "; adjust n_1 or the rates");
        if (ni.numerator() <= 0) throw std::invalid_argument("incremental lengths must be positive");
        s.lengths.push_back(ni.numerator());
        s.cumulative.push_back(s.cumulative.back() + ni.numerator());
    }
    // the incremental lengths must reproduce the rate identity
    for (std::size_t i = 0; i < s.rates.size(); ++i) {
        Rational sum(0);
        for (std::size_t j = 1; j <= i; ++j) sum += Rational(s.lengths[j], n1);
        if (s.rates[i] != s.rates[0] / (Rational(1) + sum))
            throw std::logic_error("length derivation failed the rate round trip");
        if (s.rates[i] * s.cumulative[i] != Rational(k))
            throw std::logic_error("length derivation violated R_i * cumulative_i = k");
    }
    return s;
}

RateSchedule schedule_from_lengths(long long k, std::vector<long long> lengths) {
    if (lengths.empty()) throw std::invalid_argument("at least one length is required");
    if (k < 1) throw std::invalid_argument("k must be positive");
    RateSchedule s;
    s.k = k;
    s.lengths = std::move(lengths);
    long long cum = 0;
    for (long long n : s.lengths) {
        if (n < 1) throw std::invalid_argument("lengths must be positive");
        cum += n;
        s.cumulative.push_back(cum);
        s.rates.emplace_back(k, cum);
    }
    return s;
}

DyadicResult check_dyadic_feasibility(std::span<const Rational> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] <= Rational(0)) throw std::invalid_argument("values must be positive");
        if (i > 0 && values[i] >= values[i - 1])
            throw std::invalid_argument("values must be strictly decreasing");
    }
    DyadicResult out;
    out.feasible = true;
    if (values.size() <= 1) return out;
    Rational prev_sum(0);  // sum_{j<=i} 2^{l_j} = R_1/R_i - 1
    for (std::size_t i = 1; i < values.size(); ++i) {
        Rational sum = values[0] / values[i] - Rational(1);
        Rational step = sum - prev_sum;  // n_i / n_1
        prev_sum = sum;
        if (step <= Rational(0) || !is_pow2_ll(step.numerator()) || !is_pow2_ll(step.denominator())) {
            out.feasible = false;
            out.exponents.clear();
            return out;
        }
        out.exponents.push_back(log2_ll(step.numerator()) - log2_ll(step.denominator()));
    }
    return out;
}

std::vector<std::vector<long long>> apportion_sizes(const RateSchedule& schedule) {
    int K = schedule.levels();
    long long k = schedule.k;
    std::vector<std::vector<long long>> rows(K);
    std::vector<std::vector<Rational>> rems(K);
    for (int j = 1; j <= K; ++j) {
        auto& row = rows[j - 1];
        auto& rem = rems[j - 1];
        row.resize(j);
        rem.resize(j);
        long long assigned = 0;
        for (int i = 1; i <= j; ++i) {
            Rational share = schedule.rates[j - 1] * schedule.lengths[i - 1];
            long long fl = floor_of(share);
            row[i - 1] = fl;
            rem[i - 1] = share - Rational(fl);
            assigned += fl;
        }
        long long units = k - assigned;
        if (units < 0 || units > j)
            throw std::logic_error("largest-remainder bookkeeping failed");
        std::vector<int> order(j);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (rem[a] != rem[b]) return rem[a] > rem[b];
            return a < b;
        });
        for (long long t = 0; t < units; ++t) ++row[order[static_cast<std::size_t>(t)]];
    }

    // column monotonicity: a_j^(i) >= a_{j+1}^(i); surplus units move to the
    // column with headroom whose remainder is smallest
    for (int r = 1; r < K; ++r) {
        auto& row = rows[r];
        const auto& cap = rows[r - 1];
        const auto& rem = rems[r];
        for (;;) {
            int bad = -1;
            for (int i = 0; i < r; ++i)
                if (row[i] > cap[i]) { bad = i; break; }
            if (bad < 0) break;
            int dest = -1;
            for (int i = 0; i <= r; ++i) {
                if (i == bad) continue;
                bool headroom = (i == r) ? row[i] < schedule.lengths[static_cast<std::size_t>(i)]
                                         : row[i] < cap[i];
                if (!headroom) continue;
                if (dest < 0 || rem[i] < rem[dest]) dest = i;
            }
            if (dest < 0) throw std::logic_error("monotone apportionment is infeasible");
            --row[bad];
            ++row[dest];
        }
    }
    return rows;
}

std::vector<BitMapping> build_bit_mappings(const std::vector<std::vector<long long>>& size_rows,
                                           long long k) {
    int K = static_cast<int>(size_rows.size());
    if (K == 0) throw std::invalid_argument("no levels");
    if (size_rows[0].size() != 1 || size_rows[0][0] != k)
        throw std::invalid_argument("a_1^(1) must equal k");
    std::vector<BitMapping> maps(K);
    maps[0].level = 1;
    maps[0].table.resize(static_cast<std::size_t>(k));
    std::iota(maps[0].table.begin(), maps[0].table.end(), 1LL);
    for (int i = 1; i < K; ++i) {
        // h^(i+1) over [a_{i+1}^{(i+1)}], consecutive blocks of size q_i^{(j)}
        long long domain = size_rows[i][i];
        BitMapping& map = maps[i];
        map.level = i + 1;
        map.table.reserve(static_cast<std::size_t>(domain));
        for (int j = 1; j <= i; ++j) {
            long long a_hi = size_rows[i - 1][j - 1];  // a_i^{(j)}
            long long a_lo = size_rows[i][j - 1];      // a_{i+1}^{(j)}
            long long q = a_hi - a_lo;
            if (q < 0) throw std::invalid_argument("sizes are not column-monotone");
            for (long long t = 0; t < q; ++t)
                map.table.push_back(maps[j - 1].table[static_cast<std::size_t>(a_lo + t)]);
        }
        if (static_cast<long long>(map.table.size()) != domain)
            throw std::invalid_argument("block sizes do not match the q counts");
    }
    return maps;
}

PcpSpec build_pcp(long long k, std::span<const ChannelModel> channels, long long n1,
                  const PcpBuildOptions& opts) {
    if (channels.empty()) throw std::invalid_argument("at least one channel is required");
    if (!is_degraded_sequence(channels))
        throw std::invalid_argument("channels must form a degraded sequence");

    RateSchedule sched;
    if (opts.pinned_lengths) {
        sched = schedule_from_lengths(k, *opts.pinned_lengths);
    } else if (opts.rates) {
        sched = derive_lengths(k, *opts.rates, n1);
    } else {
        // default: dyadic lengths n_i = 2^{l_i} n_1 with the smallest l_i >= 0
        // such that R_i stays at or below the channel capacity
        if (channels.size() < 2)
            throw std::invalid_argument("default schedule needs one channel per rate; give --rates otherwise");
        std::vector<long long> lengths{n1};
        long long cum = n1;
        for (std::size_t i = 1; i < channels.size(); ++i) {
            double cap = channels[i].capacity();
            if (!(cap > 0.0))
                throw std::invalid_argument("channel " + std::to_string(i + 1) +
                                            " has zero capacity; no finite schedule exists");
            long long ni = n1;
            while (static_cast<double>(k) / static_cast<double>(cum + ni) > cap && ni < (1LL << 30))
                ni <<= 1;
            if (static_cast<double>(k) / static_cast<double>(cum + ni) > cap)
                throw std::invalid_argument("cannot reach the capacity of channel " + std::to_string(i + 1));
            lengths.push_back(ni);
            cum += ni;
        }
        sched = schedule_from_lengths(k, std::move(lengths));
    }

    int K = sched.levels();
    if (channels.size() != 1 && static_cast<int>(channels.size()) != K)
        throw std::invalid_argument("channel count must be 1 or match the number of rates");
    if (sched.rates[0] > Rational(1))
        throw std::invalid_argument("R_1 exceeds 1; k must be at most n_1");

    auto rows = apportion_sizes(sched);
    auto maps = build_bit_mappings(rows, k);

    PcpSpec spec;
    spec.schedule = sched;
    spec.levels.resize(K);
    for (int i = 1; i <= K; ++i) {
        PcpLevel& lvl = spec.levels[i - 1];
        lvl.level = i;
        lvl.n = sched.lengths[i - 1];
        std::size_t n_u = 1;
        while (n_u < static_cast<std::size_t>(lvl.n)) n_u <<= 1;
        lvl.pattern = make_uniform_pattern(n_u, static_cast<std::size_t>(lvl.n));

        lvl.sizes.clear();
        for (int j = i; j <= K; ++j) lvl.sizes.push_back(rows[j - 1][i - 1]);

        // profiles for W_i..W_K over this level's pattern; duplicated sizes
        // share the set built from the worst profile of the duplicate group
        std::vector<ReliabilityProfile> profiles;
        for (int j = i; j <= K; ++j) {
            DesignOptions dopts;
            dopts.mc_trials = opts.mc_trials;
            dopts.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
            dopts.threads = opts.threads;
            profiles.push_back(punctured_reliability(channel_for_rate(channels, j), lvl.pattern, dopts));
        }
        std::vector<std::size_t> uniq_sizes;
        std::vector<ReliabilityProfile> uniq_profiles;
        std::vector<std::size_t> group(lvl.sizes.size());
        for (std::size_t t = 0; t < lvl.sizes.size(); ++t) {
            if (!uniq_sizes.empty() && static_cast<long long>(uniq_sizes.back()) == lvl.sizes[t]) {
                uniq_profiles.back() = profiles[t];  // worst channel of the group
            } else {
                uniq_sizes.push_back(static_cast<std::size_t>(lvl.sizes[t]));
                uniq_profiles.push_back(profiles[t]);
            }
            group[t] = uniq_sizes.size() - 1;
        }
        NestedSetFamily uniq = nested_information_sets(uniq_profiles, uniq_sizes);
        lvl.nested.n_u = n_u;
        lvl.nested.sets.clear();
        for (std::size_t t = 0; t < lvl.sizes.size(); ++t) lvl.nested.sets.push_back(uniq.sets[group[t]]);

        lvl.stacked = stacked_row_order(lvl.nested);
        lvl.mapping = maps[i - 1];
        if (lvl.stacked.size() != lvl.mapping.table.size())
            throw std::logic_error("stacked order and bit mapping disagree on a_i^(i)");
    }
    spec.validate();
    return spec;
}

void PcpSpec::validate() const {
    const auto fail = [](const std::string& what) { throw std::runtime_error("PCP invariant violated: " + what); };
    int K = static_cast<int>(levels.size());
    if (K == 0 || schedule.levels() != K) fail("level count does not match the schedule");
    if (schedule.k < 1) fail("k must be positive");

    long long cum = 0;
    for (int i = 0; i < K; ++i) {
        if (schedule.lengths[i] < 1) fail("lengths must be positive");
        cum += schedule.lengths[i];
        if (schedule.cumulative[i] != cum) fail("cumulative lengths are inconsistent");
        if (i > 0 && schedule.rates[i] >= schedule.rates[i - 1]) fail("rates must be strictly decreasing");
        if (schedule.rates[i] * schedule.cumulative[i] != Rational(schedule.k))
            fail("(c.1) R_i * cumulative_i = k fails at i=" + std::to_string(i + 1));
    }

    for (int i = 1; i <= K; ++i) {
        const PcpLevel& lvl = levels[i - 1];
        if (lvl.level != i) fail("level indices out of order");
        if (lvl.n != schedule.lengths[i - 1]) fail("level length disagrees with the schedule");
        if (!is_power_of_two(lvl.pattern.n_u)) fail("mother length is not a power of two");
        if (lvl.pattern.n() != static_cast<std::size_t>(lvl.n)) fail("pattern weight does not equal n_i");
        if (static_cast<int>(lvl.sizes.size()) != K - i + 1) fail("size vector has the wrong length");
        if (static_cast<int>(lvl.nested.sets.size()) != K - i + 1) fail("nested family has the wrong length");
        if (lvl.sizes[0] > lvl.n) fail("a_i^(i) exceeds the transmitted length");

        for (std::size_t t = 0; t < lvl.sizes.size(); ++t) {
            if (static_cast<long long>(lvl.nested.sets[t].size()) != lvl.sizes[t])
                fail("(c.3) set size differs from a_j^(i) at level " + std::to_string(i));
            if (t > 0) {
                if (lvl.sizes[t] > lvl.sizes[t - 1]) fail("(c.2) sizes increase at level " + std::to_string(i));
                std::vector<std::uint8_t> sup = lvl.nested.sets[t - 1].mask();
                for (int idx : lvl.nested.sets[t].indices)
                    if (!sup[static_cast<std::size_t>(idx) - 1])
                        fail("(c.2) nesting fails at level " + std::to_string(i));
            }
        }
        if (lvl.stacked != stacked_row_order(lvl.nested)) fail("stacked row order is stale");
        if (lvl.mapping.table.size() != static_cast<std::size_t>(lvl.sizes[0]))
            fail("bit mapping domain differs from a_i^(i)");
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(schedule.k), 0);
        for (long long g : lvl.mapping.table) {
            if (g < 1 || g > schedule.k) fail("bit mapping image out of range");
            if (seen[static_cast<std::size_t>(g) - 1]) fail("bit mapping is not injective");
            seen[static_cast<std::size_t>(g) - 1] = 1;
        }
    }

    // row sums and the diagonal identity
    for (int j = 1; j <= K; ++j) {
        long long sum = 0;
        for (int i = 1; i <= j; ++i) sum += levels[i - 1].sizes[j - i];
        if (sum != schedule.k) fail("row sum over a_j^(i) differs from k at j=" + std::to_string(j));
    }
    for (int i = 2; i <= K; ++i) {
        long long q_sum = 0;
        for (int j = 1; j < i; ++j)
            q_sum += levels[j - 1].sizes[i - 1 - j] - levels[j - 1].sizes[i - j];
        if (q_sum != levels[i - 1].sizes[0])
            fail("diagonal identity a_i^(i) = sum q_{i-1}^(j) fails at i=" + std::to_string(i));
    }

    // every rate's decodable bits partition [k]
    for (int m = 1; m <= K; ++m) {
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(schedule.k), 0);
        long long total = 0;
        for (int i = 1; i <= m; ++i) {
            const PcpLevel& lvl = levels[i - 1];
            long long a_m = lvl.sizes[m - i];
            for (long long t = 0; t < a_m; ++t) {
                long long g = lvl.mapping.table[static_cast<std::size_t>(t)];
                if (seen[static_cast<std::size_t>(g) - 1])
                    fail("decodable bits overlap at rate index " + std::to_string(m));
                seen[static_cast<std::size_t>(g) - 1] = 1;
                ++total;
            }
        }
        if (total != schedule.k)
            fail("decodable bits do not cover [k] at rate index " + std::to_string(m));
    }
}

std::vector<std::uint8_t> encode_incremental(const PcpSpec& spec, std::span<const std::uint8_t> u,
                                             int level) {
    if (level < 1 || level > spec.level_count()) throw std::invalid_argument("level out of range");
    if (u.size() != static_cast<std::size_t>(spec.k()))
        throw std::invalid_argument("message length must equal k");
    const PcpLevel& lvl = spec.levels[static_cast<std::size_t>(level) - 1];
    std::vector<std::uint8_t> v(lvl.n_u(), 0);
    for (std::size_t m = 0; m < lvl.stacked.size(); ++m)
        v[static_cast<std::size_t>(lvl.stacked[m]) - 1] =
            u[static_cast<std::size_t>(lvl.mapping.table[m]) - 1] & 1;
    polar_transform_inplace(v);
    return puncture(v, lvl.pattern);
}

GeneratorMatrix assemble_generator(const PcpSpec& spec, int upto_level, long long cell_limit) {
    if (upto_level < 1 || upto_level > spec.level_count())
        throw std::invalid_argument("level out of range");
    long long k = spec.k();
    long long cols = spec.schedule.cumulative[static_cast<std::size_t>(upto_level) - 1];
    if (k * cols > cell_limit) throw std::invalid_argument("generator size limit exceeded");

    GeneratorMatrix g;
    g.rows = k;
    g.cols = cols;
    g.bits.assign(static_cast<std::size_t>(k * cols), 0);
    long long col_off = 0;
    for (int li = 0; li < upto_level; ++li) {
        const PcpLevel& lvl = spec.levels[static_cast<std::size_t>(li)];
        auto tx = lvl.pattern.transmitted_positions();
        for (std::size_t m = 0; m < lvl.stacked.size(); ++m) {
            std::vector<std::uint8_t> row(lvl.n_u(), 0);
            row[static_cast<std::size_t>(lvl.stacked[m]) - 1] = 1;
            polar_transform_inplace(row);  // row of P_{n_u} for this position
            long long r = lvl.mapping.table[m] - 1;
            for (std::size_t c = 0; c < tx.size(); ++c)
                g.bits[static_cast<std::size_t>(r * cols + col_off + static_cast<long long>(c))] =
                    row[static_cast<std::size_t>(tx[c]) - 1];
        }
        col_off += lvl.n;
    }
    return g;
}

SequentialDecodeResult sequential_decode(const PcpSpec& spec,
                                         const std::vector<std::vector<double>>& llr_chunks,
                                         ScRule rule) {
    int m = static_cast<int>(llr_chunks.size());
    if (m < 1 || m > spec.level_count()) throw std::invalid_argument("transmission count out of range");
    for (int i = 0; i < m; ++i)
        if (llr_chunks[static_cast<std::size_t>(i)].size() !=
            static_cast<std::size_t>(spec.schedule.lengths[static_cast<std::size_t>(i)]))
            throw std::invalid_argument("chunk length mismatch at level " + std::to_string(i + 1));

    std::size_t k = static_cast<std::size_t>(spec.k());
    SequentialDecodeResult out;
    out.message.assign(k, 0);
    out.stage_bits.resize(static_cast<std::size_t>(m));
    std::vector<std::uint8_t> decided(k, 0);

    long long decisions = 0;
    for (int li = m - 1; li >= 0; --li) {
        const PcpLevel& lvl = spec.levels[static_cast<std::size_t>(li)];
        std::size_t n_u = lvl.n_u();
        std::vector<double> llrs = expand_llrs(llr_chunks[static_cast<std::size_t>(li)], lvl.pattern);
        long long a_m = lvl.sizes[static_cast<std::size_t>(m - 1 - li)];  // |A_m^(i)|

        std::vector<std::uint8_t> fmask(n_u, 1), fval(n_u, 0);
        for (long long t = 0; t < a_m; ++t)
            fmask[static_cast<std::size_t>(lvl.stacked[static_cast<std::size_t>(t)]) - 1] = 0;
        for (std::size_t t = static_cast<std::size_t>(a_m); t < lvl.stacked.size(); ++t) {
            std::size_t g = static_cast<std::size_t>(lvl.mapping.table[t]) - 1;
            if (!decided[g]) throw std::logic_error("sequential decoder needed an undecoded frozen bit");
            fval[static_cast<std::size_t>(lvl.stacked[t]) - 1] = out.message[g];
        }

        ScDecoder dec(n_u, rule);
        const auto& u = dec.decode(llrs, fmask, fval);
        auto& stage = out.stage_bits[static_cast<std::size_t>(li)];
        for (long long t = 0; t < a_m; ++t) {
            std::size_t g = static_cast<std::size_t>(lvl.mapping.table[static_cast<std::size_t>(t)]) - 1;
            out.message[g] = u[static_cast<std::size_t>(lvl.stacked[static_cast<std::size_t>(t)]) - 1];
            decided[g] = 1;
            stage.push_back(static_cast<long long>(g) + 1);
            ++decisions;
        }
    }
    if (decisions != spec.k()) throw std::logic_error("sequential decoder made a wrong number of decisions");
    return out;
}

}  // namespace pcpc
