#include "pcpc/channel.hpp"

#include <cmath>
#include <charconv>
#include <stdexcept>

namespace pcpc {

namespace {

const char* kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::BEC: return "bec";
        case ChannelKind::BSC: return "bsc";
        case ChannelKind::BIAWGN: return "biawgn";
    }
    return "?";
}

// Gauss-Hermite nodes/weights for integrals against exp(-t^2).
// Golub-Welsch is overkill here; Newton on the recurrence converges fast.
struct GaussHermite {
    std::vector<double> nodes, weights;
};

GaussHermite gauss_hermite(int n) {
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * gh.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * gh.nodes[1];
        } else {
            z = 2.0 * z - gh.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        gh.nodes[i] = z;
        gh.nodes[n - 1 - i] = -z;
        gh.weights[i] = 2.0 / (pp * pp);
        gh.weights[n - 1 - i] = gh.weights[i];
    }
    return gh;
}

// E over y~N(1, sigma^2) of log2(1 + exp(-2y/sigma^2)), evaluated with a
// 63-node rule; the integrand is smooth and the rule is accurate to <1e-10.
double biawgn_gap(double sigma) {
    static const GaussHermite gh = gauss_hermite(63);
    const double inv_sqrt_pi = 0.5641895835477563;
    double acc = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        double y = 1.0 + std::sqrt(2.0) * sigma * gh.nodes[i];
        double x = -2.0 * y / (sigma * sigma);
        double t = x > 40.0 ? x : std::log1p(std::exp(x));
        acc += gh.weights[i] * t;
    }
    return acc * inv_sqrt_pi / std::log(2.0);
}

double clamp_llr(double v) {
    if (v > kHardLlr) return kHardLlr;
    if (v < -kHardLlr) return -kHardLlr;
    return v;
}

}  // namespace

ChannelModel::ChannelModel(ChannelKind kind, double param) : kind_(kind), param_(param) {
    bool ok = false;
    switch (kind) {
        case ChannelKind::BEC: ok = param >= 0.0 && param <= 1.0; break;
        case ChannelKind::BSC: ok = param >= 0.0 && param <= 0.5; break;
        case ChannelKind::BIAWGN: ok = param > 0.0; break;
    }
    if (!ok || !std::isfinite(param))
        throw std::invalid_argument("channel parameter out of range for " + std::string(kind_name(kind)));
}

ChannelModel ChannelModel::parse(std::string_view spec) {
    auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("channel spec must look like kind:param, got '" + std::string(spec) + "'");
    std::string_view name = spec.substr(0, colon);
    std::string_view num = spec.substr(colon + 1);
    ChannelKind kind;
    if (name == "bec") kind = ChannelKind::BEC;
    else if (name == "bsc") kind = ChannelKind::BSC;
    else if (name == "biawgn") kind = ChannelKind::BIAWGN;
    else throw std::invalid_argument("unknown channel kind '" + std::string(name) + "'");
    double param = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), param);
    if (ec != std::errc() || ptr != num.data() + num.size())
        throw std::invalid_argument("bad channel parameter '" + std::string(num) + "'");
    return ChannelModel(kind, param);
}

std::string ChannelModel::to_string() const {
    std::string s = kind_name(kind_);
    s += ':';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", param_);
    s += buf;
    return s;
}

ChannelSymbol ChannelModel::sample(int bit, Rng& rng) const {
    switch (kind_) {
        case ChannelKind::BEC:
            if (rng.uniform01() < param_) return ChannelSymbol::erasure();
            return ChannelSymbol::of(static_cast<double>(bit));
        case ChannelKind::BSC: {
            int flip = rng.uniform01() < param_ ? 1 : 0;
            return ChannelSymbol::of(static_cast<double>(bit ^ flip));
        }
        case ChannelKind::BIAWGN: {
            double tx = bit == 0 ? 1.0 : -1.0;
            return ChannelSymbol::of(tx + param_ * rng.normal());
        }
    }
    throw std::logic_error("unreachable");
}

double ChannelModel::llr(const ChannelSymbol& y) const {
    if (y.erased) {
        if (kind_ != ChannelKind::BEC) throw std::invalid_argument("erasure symbol on a non-BEC channel");
        return 0.0;
    }
    switch (kind_) {
        case ChannelKind::BEC:
            // unerased BEC output identifies the bit
            return y.value < 0.5 ? kHardLlr : -kHardLlr;
        case ChannelKind::BSC: {
            double l = std::log((1.0 - param_) / param_);  // +inf at p=0, clamped
            return y.value < 0.5 ? clamp_llr(l) : clamp_llr(-l);
        }
        case ChannelKind::BIAWGN:
            return clamp_llr(2.0 * y.value / (param_ * param_));
    }
    throw std::logic_error("unreachable");
}

double ChannelModel::capacity() const {
    switch (kind_) {
        case ChannelKind::BEC:
            return 1.0 - param_;
        case ChannelKind::BSC: {
            double p = param_;
            if (p == 0.0) return 1.0;
            double h = -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
            return 1.0 - h;
        }
        case ChannelKind::BIAWGN: {
            double c = 1.0 - biawgn_gap(param_);
            if (c < 0.0) c = 0.0;
            if (c > 1.0) c = 1.0;
            return c;
        }
    }
    throw std::logic_error("unreachable");
}

bool is_degraded_sequence(std::span<const ChannelModel> chs) {
    if (chs.empty()) return true;
    ChannelKind kind = chs.front().kind();
    for (const auto& ch : chs)
        if (ch.kind() != kind)
            throw std::invalid_argument("degradation is only ordered within one channel family");
    for (std::size_t i = 1; i < chs.size(); ++i) {
        // all three families degrade as the parameter grows
        if (chs[i].param() < chs[i - 1].param()) return false;
    }
    return true;
}

}  // namespace pcpc
