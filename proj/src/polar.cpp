#include "pcpc/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcpc {

namespace {

void require_pow2(std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("length must be a power of two");
}

int log2_of(std::size_t n) {
    int m = 0;
    while ((std::size_t{1} << m) < n) ++m;
    return m;
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

// boxplus: 2*atanh(tanh(a/2)*tanh(b/2)) in the numerically stable
// min-sum-plus-correction form; exact for finite inputs.
inline double f_tanh(double a, double b) {
    double aa = std::abs(a), ab = std::abs(b);
    double m = std::min(aa, ab);
    double corr = std::log1p(std::exp(-(aa + ab))) - std::log1p(std::exp(-std::abs(aa - ab)));
    return sgn(a) * sgn(b) * m + corr;
}

inline double f_minsum(double a, double b) {
    return sgn(a) * sgn(b) * std::min(std::abs(a), std::abs(b));
}

inline double g_rule(double a, double b, std::uint8_t v) { return (v ? -a : a) + b; }

// GA of the check-node update for BI-AWGN LLR means (Chung-style phi).
// Clamped below 1 so strictly positive means never collapse to an exact zero
// that would tie with a punctured (mean-0) position.
double phi(double x) {
    if (x <= 0.0) return 1.0;
    if (x <= 10.0) return std::min(1.0 - 1e-12, std::exp(-0.4527 * std::pow(x, 0.86) + 0.0218));
    return std::sqrt(3.14159265358979323846 / x) * std::exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x));
}

double phi_inv(double y) {
    if (y >= 1.0) return 0.0;
    // closed-form inverse of the small-x branch
    double x = std::pow((0.0218 - std::log(y)) / 0.4527, 1.0 / 0.86);
    if (x <= 10.0) return x;
    // Newton on log phi for the tail branch
    double lx = std::max(x, 10.0);
    for (int it = 0; it < 64; ++it) {
        double fx = 0.5 * std::log(3.14159265358979323846 / lx) - lx / 4.0 + std::log1p(-10.0 / (7.0 * lx));
        double d = -0.5 / lx - 0.25 + (10.0 / (7.0 * lx * lx)) / (1.0 - 10.0 / (7.0 * lx));
        double step = (fx - std::log(y)) / d;
        lx -= step;
        if (lx < 10.0) lx = 10.0;
        if (std::abs(step) < 1e-12 * std::max(1.0, lx)) break;
    }
    return lx;
}

double ga_minus(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    double pa = phi(a), pb = phi(b);
    // beyond the underflow knee both inputs are effectively perfect and the
    // check-node output tracks the weaker of the two
    if (pa == 0.0 && pb == 0.0) return std::min(a, b);
    double p = 1.0 - (1.0 - pa) * (1.0 - pb);
    return phi_inv(p);
}

}  // namespace

const char* metric_kind_name(MetricKind k) {
    switch (k) {
        case MetricKind::ErasureProb: return "erasure_prob";
        case MetricKind::BhattacharyyaEstimate: return "bhattacharyya_estimate";
        case MetricKind::MeanLlr: return "mean_llr";
    }
    return "?";
}

MetricKind metric_kind_from_name(std::string_view name) {
    if (name == "erasure_prob") return MetricKind::ErasureProb;
    if (name == "bhattacharyya_estimate") return MetricKind::BhattacharyyaEstimate;
    if (name == "mean_llr") return MetricKind::MeanLlr;
    throw std::invalid_argument("unknown metric kind '" + std::string(name) + "'");
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<std::uint8_t> InformationSet::mask() const {
    std::vector<std::uint8_t> m(n_u, 0);
    for (int idx : indices) {
        if (idx < 1 || static_cast<std::size_t>(idx) > n_u)
            throw std::invalid_argument("information set index out of range");
        m[static_cast<std::size_t>(idx) - 1] = 1;
    }
    return m;
}

void polar_transform_inplace(std::span<std::uint8_t> u) {
    require_pow2(u.size());
    std::size_t n = u.size();
    for (std::size_t stride = 1; stride < n; stride <<= 1)
        for (std::size_t blk = 0; blk < n; blk += 2 * stride)
            for (std::size_t i = blk; i < blk + stride; ++i)
                u[i] ^= u[i + stride];
}

std::vector<std::uint8_t> polar_transform(std::vector<std::uint8_t> u) {
    polar_transform_inplace(u);
    return u;
}

std::vector<std::uint8_t> polar_encode(const InformationSet& info, std::span<const std::uint8_t> bits) {
    if (bits.size() != info.indices.size())
        throw std::invalid_argument("message length does not match information set size");
    std::vector<std::uint8_t> u(info.n_u, 0);
    for (std::size_t m = 0; m < bits.size(); ++m)
        u[static_cast<std::size_t>(info.indices[m]) - 1] = bits[m] & 1;
    polar_transform_inplace(u);
    return u;
}

ReliabilityProfile bec_reliability(std::vector<double> per_position_erasure) {
    std::size_t n = per_position_erasure.size();
    require_pow2(n);
    for (double e : per_position_erasure)
        if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("erasure probability outside [0,1]");
    auto& z = per_position_erasure;
    for (std::size_t stride = n / 2; stride >= 1; stride /= 2) {
        for (std::size_t blk = 0; blk < n; blk += 2 * stride) {
            for (std::size_t i = blk; i < blk + stride; ++i) {
                double a = z[i], b = z[i + stride];
                z[i] = a + b - a * b;
                z[i + stride] = a * b;
            }
        }
        if (stride == 1) break;
    }
    return {n, MetricKind::ErasureProb, std::move(z)};
}

ReliabilityProfile gaussian_reliability(double sigma, std::size_t n_u,
                                        std::span<const std::uint8_t> pattern) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    require_pow2(n_u);
    if (!pattern.empty() && pattern.size() != n_u)
        throw std::invalid_argument("pattern length does not match n_u");
    std::vector<double> m(n_u, 2.0 / (sigma * sigma));
    if (!pattern.empty())
        for (std::size_t i = 0; i < n_u; ++i)
            if (!pattern[i]) m[i] = 0.0;
    for (std::size_t stride = n_u / 2; stride >= 1; stride /= 2) {
        for (std::size_t blk = 0; blk < n_u; blk += 2 * stride) {
            for (std::size_t i = blk; i < blk + stride; ++i) {
                double a = m[i], b = m[i + stride];
                m[i] = ga_minus(a, b);
                m[i + stride] = a + b;
            }
        }
        if (stride == 1) break;
    }
    return {n_u, MetricKind::MeanLlr, std::move(m)};
}

ScDecoder::ScDecoder(std::size_t n, ScRule rule) : n_(n), levels_(log2_of(n)), rule_(rule) {
    require_pow2(n);
    llr_.resize(levels_ + 1);
    cw_.resize(levels_ + 1);
    left_.resize(levels_ + 1);
    for (int d = 0; d <= levels_; ++d) {
        std::size_t len = n >> d;
        llr_[d].resize(len);
        cw_[d].resize(len);
        left_[d].resize(len / 2);
    }
    u_.resize(n);
}

template <bool Genie>
void ScDecoder::walk(int depth, std::size_t lo, Rng* rng, std::uint32_t* err_counts) {
    std::size_t len = n_ >> depth;
    if (len == 1) {
        double l = llr_[depth][0];
        std::uint8_t b;
        if constexpr (Genie) {
            bool err = l < 0.0 || (l == 0.0 && rng->bit());
            if (err) ++err_counts[lo];
            b = 0;  // genie feeds the true (all-zero) value forward
        } else {
            if (frozen_mask_[lo]) b = frozen_values_[lo] & 1;
            else b = l < 0.0 ? 1 : 0;
        }
        u_[lo] = b;
        cw_[depth][0] = b;
        return;
    }
    std::size_t half = len / 2;
    auto& cur = llr_[depth];
    auto& nxt = llr_[depth + 1];
    if (rule_ == ScRule::TanhExact) {
        for (std::size_t i = 0; i < half; ++i) nxt[i] = f_tanh(cur[i], cur[i + half]);
    } else {
        for (std::size_t i = 0; i < half; ++i) nxt[i] = f_minsum(cur[i], cur[i + half]);
    }
    walk<Genie>(depth + 1, lo, rng, err_counts);
    std::copy_n(cw_[depth + 1].begin(), half, left_[depth].begin());
    for (std::size_t i = 0; i < half; ++i) nxt[i] = g_rule(cur[i], cur[i + half], left_[depth][i]);
    walk<Genie>(depth + 1, lo + half, rng, err_counts);
    for (std::size_t i = 0; i < half; ++i) {
        cw_[depth][i] = left_[depth][i] ^ cw_[depth + 1][i];
        cw_[depth][i + half] = cw_[depth + 1][i];
    }
}

const std::vector<std::uint8_t>& ScDecoder::decode(std::span<const double> llrs,
                                                   std::span<const std::uint8_t> frozen_mask,
                                                   std::span<const std::uint8_t> frozen_values) {
    if (llrs.size() != n_ || frozen_mask.size() != n_ || frozen_values.size() != n_)
        throw std::invalid_argument("decoder input length mismatch");
    std::copy(llrs.begin(), llrs.end(), llr_[0].begin());
    frozen_mask_ = frozen_mask.data();
    frozen_values_ = frozen_values.data();
    walk<false>(0, 0, nullptr, nullptr);
    return u_;
}

void ScDecoder::genie_zero_pass(std::span<const double> llrs, Rng& rng,
                                std::span<std::uint32_t> err_counts) {
    if (llrs.size() != n_ || err_counts.size() != n_)
        throw std::invalid_argument("decoder input length mismatch");
    std::copy(llrs.begin(), llrs.end(), llr_[0].begin());
    walk<true>(0, 0, &rng, err_counts.data());
}

ReliabilityProfile monte_carlo_reliability(const ChannelModel& ch, std::size_t n_u,
                                           std::span<const std::uint8_t> pattern,
                                           long long trials, std::uint64_t seed, int threads) {
    require_pow2(n_u);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!pattern.empty() && pattern.size() != n_u)
        throw std::invalid_argument("pattern length does not match n_u");

    std::vector<std::uint64_t> total(n_u, 0);
    auto run_range = [&](long long t_begin, long long t_end, std::vector<std::uint32_t>& counts,
                         ScDecoder& dec, std::vector<double>& llrs) {
        for (long long t = t_begin; t < t_end; ++t) {
            Rng rng = Rng::derive(seed, {0x6d63u, static_cast<std::uint64_t>(t)});
            for (std::size_t i = 0; i < n_u; ++i) {
                if (!pattern.empty() && !pattern[i]) {
                    llrs[i] = 0.0;
                } else {
                    llrs[i] = ch.llr(ch.sample(0, rng));
                }
            }
            dec.genie_zero_pass(llrs, rng, counts);
        }
    };

#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel num_threads(threads)
        {
            std::vector<std::uint32_t> counts(n_u, 0);
            ScDecoder dec(n_u);
            std::vector<double> llrs(n_u);
            long long nth = omp_get_num_threads();
            long long tid = omp_get_thread_num();
            long long chunk = (trials + nth - 1) / nth;
            long long b = tid * chunk, e = std::min(trials, b + chunk);
            if (b < e) run_range(b, e, counts, dec, llrs);
#pragma omp critical
            for (std::size_t i = 0; i < n_u; ++i) total[i] += counts[i];
        }
    } else
#endif
    {
        (void)threads;
        std::vector<std::uint32_t> counts(n_u, 0);
        ScDecoder dec(n_u);
        std::vector<double> llrs(n_u);
        run_range(0, trials, counts, dec, llrs);
        for (std::size_t i = 0; i < n_u; ++i) total[i] += counts[i];
    }

    std::vector<double> est(n_u);
    for (std::size_t i = 0; i < n_u; ++i)
        est[i] = static_cast<double>(total[i]) / static_cast<double>(trials);
    return {n_u, MetricKind::BhattacharyyaEstimate, std::move(est)};
}

double brute_force_bit_channel(const ChannelModel& ch, std::size_t n_u,
                               std::span<const std::uint8_t> pattern, int j) {
    if (!ch.finite_output()) throw std::invalid_argument("brute force needs a finite output alphabet");
    require_pow2(n_u);
    if (n_u > 8) throw std::invalid_argument("brute force limited to n_u <= 8");
    if (j < 1 || static_cast<std::size_t>(j) > n_u) throw std::invalid_argument("bit index out of range");
    if (!pattern.empty() && pattern.size() != n_u)
        throw std::invalid_argument("pattern length does not match n_u");

    std::vector<std::size_t> tx;
    for (std::size_t i = 0; i < n_u; ++i)
        if (pattern.empty() || pattern[i]) tx.push_back(i);

    // per-symbol likelihood tables, symbol order: BEC {0,1,e}, BSC {0,1}
    const bool bec = ch.kind() == ChannelKind::BEC;
    const std::size_t nsym = bec ? 3 : 2;
    double w[3][2] = {};
    if (bec) {
        double e = ch.param();
        w[0][0] = 1.0 - e; w[0][1] = 0.0;
        w[1][0] = 0.0;     w[1][1] = 1.0 - e;
        w[2][0] = e;       w[2][1] = e;
    } else {
        double p = ch.param();
        w[0][0] = 1.0 - p; w[0][1] = p;
        w[1][0] = p;       w[1][1] = 1.0 - p;
    }

    std::size_t ny = 1;
    for (std::size_t i = 0; i < tx.size(); ++i) ny *= nsym;
    const std::size_t nprefix = std::size_t{1} << (j - 1);

    // dist[(prefix*2+b)*ny + y] = sum over suffixes of W(y | u P)
    std::vector<double> dist(nprefix * 2 * ny, 0.0);
    std::vector<std::uint8_t> u(n_u);

    for (std::size_t msg = 0; msg < (std::size_t{1} << n_u); ++msg) {
        for (std::size_t i = 0; i < n_u; ++i) u[i] = (msg >> i) & 1;
        std::size_t prefix = msg & (nprefix - 1);
        std::size_t b = (msg >> (j - 1)) & 1;
        std::vector<std::uint8_t> x = u;
        polar_transform_inplace(x);
        double* row = dist.data() + (prefix * 2 + b) * ny;
        for (std::size_t y = 0; y < ny; ++y) {
            double p = 1.0;
            std::size_t rem = y;
            for (std::size_t t = 0; t < tx.size(); ++t) {
                std::size_t sym = rem % nsym;
                rem /= nsym;
                p *= w[sym][x[tx[t]]];
                if (p == 0.0) break;
            }
            row[y] += p;
        }
    }

    double z = 0.0;
    for (std::size_t prefix = 0; prefix < nprefix; ++prefix) {
        const double* d0 = dist.data() + (prefix * 2 + 0) * ny;
        const double* d1 = dist.data() + (prefix * 2 + 1) * ny;
        for (std::size_t y = 0; y < ny; ++y) z += std::sqrt(d0[y] * d1[y]);
    }
    return z / static_cast<double>(std::size_t{1} << (n_u - 1));
}

InformationSet select_information_set(const ReliabilityProfile& profile, std::size_t size) {
    if (size > profile.n_u) throw std::invalid_argument("requested size exceeds n_u");
    if (profile.metric.size() != profile.n_u) throw std::invalid_argument("malformed profile");
    std::vector<std::size_t> order(profile.n_u);
    std::iota(order.begin(), order.end(), 0);
    const auto& m = profile.metric;
    if (profile.lower_is_better()) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (m[a] != m[b]) return m[a] < m[b];
            return a > b;  // equal metrics: prefer the larger index
        });
    } else {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (m[a] != m[b]) return m[a] > m[b];
            return a > b;
        });
    }
    std::vector<int> idx(order.begin(), order.begin() + size);
    std::sort(idx.begin(), idx.end());
    for (int& v : idx) ++v;
    return {profile.n_u, std::move(idx)};
}

NestedSetFamily nested_information_sets(std::span<const ReliabilityProfile> profiles,
                                        std::span<const std::size_t> sizes) {
    if (profiles.empty() || profiles.size() != sizes.size())
        throw std::invalid_argument("profiles and sizes must align");
    std::size_t n_u = profiles.front().n_u;
    for (const auto& p : profiles)
        if (p.n_u != n_u) throw std::invalid_argument("profiles disagree on n_u");
    for (std::size_t t = 1; t < sizes.size(); ++t)
        if (sizes[t] >= sizes[t - 1]) throw std::invalid_argument("sizes must be strictly decreasing");
    if (sizes.front() > n_u) throw std::invalid_argument("size exceeds n_u");

    std::size_t K = profiles.size();
    std::vector<std::vector<std::uint8_t>> masks(K);
    masks[K - 1] = select_information_set(profiles[K - 1], sizes[K - 1]).mask();
    for (std::size_t t = K - 1; t-- > 0;) {
        // grow the next-smaller set using the better channel's ranking
        const auto& m = profiles[t].metric;
        std::vector<std::size_t> order(n_u);
        std::iota(order.begin(), order.end(), 0);
        if (profiles[t].lower_is_better()) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (m[a] != m[b]) return m[a] < m[b];
                return a > b;
            });
        } else {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (m[a] != m[b]) return m[a] > m[b];
                return a > b;
            });
        }
        masks[t] = masks[t + 1];
        std::size_t need = sizes[t] - sizes[t + 1];
        for (std::size_t r = 0; r < n_u && need > 0; ++r) {
            std::size_t pos = order[r];
            if (!masks[t][pos]) {
                masks[t][pos] = 1;
                --need;
            }
        }
    }

    NestedSetFamily family{n_u, {}};
    family.sets.reserve(K);
    for (std::size_t t = 0; t < K; ++t) {
        InformationSet s{n_u, {}};
        for (std::size_t i = 0; i < n_u; ++i)
            if (masks[t][i]) s.indices.push_back(static_cast<int>(i + 1));
        family.sets.push_back(std::move(s));
    }
    return family;
}

ScResult sc_decode(std::span<const double> llrs, const std::map<int, std::uint8_t>& frozen,
                   const InformationSet& info, ScRule rule) {
    std::size_t n = llrs.size();
    require_pow2(n);
    if (info.n_u != n) throw std::invalid_argument("information set n_u does not match llr length");
    std::vector<std::uint8_t> fmask(n, 0), fval(n, 0), imask = info.mask();
    for (const auto& [pos, val] : frozen) {
        if (pos < 1 || static_cast<std::size_t>(pos) > n)
            throw std::invalid_argument("frozen position out of range");
        if (imask[pos - 1]) throw std::invalid_argument("position both frozen and information");
        fmask[pos - 1] = 1;
        fval[pos - 1] = val & 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!fmask[i] && !imask[i])
            throw std::invalid_argument("frozen map and information set must partition [n]");

    ScDecoder dec(n, rule);
    ScResult out;
    out.u = dec.decode(llrs, fmask, fval);
    out.info_bits.reserve(info.indices.size());
    for (int idx : info.indices) out.info_bits.push_back(out.u[static_cast<std::size_t>(idx) - 1]);
    out.codeword = out.u;
    polar_transform_inplace(out.codeword);
    return out;
}

}  // namespace pcpc
