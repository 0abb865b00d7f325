#include "owns/params.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "owns/rng.hpp"

namespace owns {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double spectral_scale(const Vec& alphas) {
    double s = 1.0;
    for (int i = 0; i < alphas.size(); ++i) s = std::max(s, std::abs(alphas[i]));
    return s;
}

/// log |alpha - b+_j| - log |alpha - b-_j| summed over j; -inf marks an exact
/// zero factor (the mode was selected), so exp never overflows silently.
double log_gain(cxd alpha, const Vec& bp, const Vec& bm) {
    double acc = 0.0;
    for (int j = 0; j < bp.size(); ++j) {
        const double dn = std::abs(alpha - bp[j]);
        if (dn == 0.0) return kNegInf;
        acc += std::log(dn) - std::log(std::abs(alpha - bm[j]));
    }
    return acc;
}

cxd mirror(cxd b, double delta, int sign) {
    double im = std::conj(b).imag();
    if (sign < 0 && im > -delta) im = -delta;
    if (sign > 0 && im < delta) im = delta;
    return {b.real(), im};
}

/// Deterministic point at least 1e-6*scale away from every value in `avoid`.
cxd off_spectrum_value(const Vec& avoid, cxd start, double scale) {
    cxd b = start;
    const double tol = 1e-6 * scale;
    for (int tries = 0; tries < 4096; ++tries) {
        bool ok = true;
        for (int k = 0; k < avoid.size(); ++k) {
            if (std::abs(b - avoid[k]) <= tol) {
                ok = false;
                break;
            }
        }
        if (ok) return b;
        b += cxd(0.013, -0.017) * scale;
    }
    throw OwnsError("could not place an off-spectrum recursion parameter");
}

void check_cross_family_distinct(const Spectrum& spec) {
    const double tol = 1e-12 * spectral_scale(spec.alphas);
    for (int m = 0; m < spec.n_plus; ++m) {
        for (int k = spec.n_plus; k < spec.dim(); ++k) {
            if (std::abs(spec.alphas[m] - spec.alphas[k]) <= tol)
                throw DegenerateSpectrum("downstream eigenvalue " + std::to_string(m) +
                                         " coincides with upstream eigenvalue " + std::to_string(k));
        }
    }
}

struct Chain {
    RecursionParamSet xi;
    double j_ownsr = std::numeric_limits<double>::infinity();
    double j_ownsp = std::numeric_limits<double>::infinity();
};

}  // namespace

ObjectiveReport objectives(const Spectrum& spec, const RecursionParamSet& xi) {
    validate_params(xi, spec);
    ObjectiveReport rep;
    rep.J_plus_per_mode.resize(spec.n_plus);
    rep.J_minus_per_mode.resize(spec.n_minus);

    double logmax_p = kNegInf, logmax_m = kNegInf;
    for (int m = 0; m < spec.n_plus; ++m) {
        const double lg = log_gain(spec.alphas[m], xi.beta_plus, xi.beta_minus);
        rep.J_plus_per_mode[m] = lg == kNegInf ? 0.0 : std::exp(lg);
        if (lg > logmax_p) {
            logmax_p = lg;
            rep.argmax_plus = m;
        }
    }
    for (int k = 0; k < spec.n_minus; ++k) {
        const double lg = log_gain(spec.alphas[spec.n_plus + k], xi.beta_minus, xi.beta_plus);
        rep.J_minus_per_mode[k] = lg == kNegInf ? 0.0 : std::exp(lg);
        if (lg > logmax_m) {
            logmax_m = lg;
            rep.argmax_minus = k;
        }
    }

    const double max_p = spec.n_plus == 0 ? 0.0 : (logmax_p == kNegInf ? 0.0 : std::exp(logmax_p));
    const double max_m = spec.n_minus == 0 ? 0.0 : (logmax_m == kNegInf ? 0.0 : std::exp(logmax_m));
    rep.J_ownsp = (spec.n_plus == 0 || spec.n_minus == 0 || logmax_p == kNegInf ||
                   logmax_m == kNegInf)
                      ? 0.0
                      : std::exp(logmax_p + logmax_m);
    rep.J_ownsr = std::max(max_p, max_m);
    return rep;
}

RecursionParamSet greedy_select(const Spectrum& spec, int n_beta, const GreedyOptions& opts) {
    return order_params(greedy_select_unordered(spec, n_beta, opts));
}

RecursionParamSet greedy_select_unordered(const Spectrum& spec, int n_beta,
                                          const GreedyOptions& opts) {
    if (n_beta < 1) throw std::invalid_argument("greedy_select: n_beta must be >= 1");
    if (spec.dim() == 0) throw EmptySpectrum();

    std::vector<int> cand_p, cand_m;    // spectrum indices per family
    for (int m = 0; m < spec.n_plus; ++m)
        if (!opts.exclude || !opts.exclude(spec.alphas[m])) cand_p.push_back(m);
    for (int k = spec.n_plus; k < spec.dim(); ++k)
        if (!opts.exclude || !opts.exclude(spec.alphas[k])) cand_m.push_back(k);
    if (spec.n_plus > 0 && cand_p.empty())
        throw ExcludedAll("every downstream eigenvalue was excluded");
    if (spec.n_minus > 0 && cand_m.empty())
        throw ExcludedAll("every upstream eigenvalue was excluded");

    const double scale = spectral_scale(spec.alphas);
    const double delta = 0.05 * scale;
    const bool no_upstream = spec.n_minus == 0;
    const bool no_downstream = spec.n_plus == 0;

    auto run_chain = [&](int chain_id) -> Chain {
        auto rng = make_rng(opts.seed, static_cast<std::uint64_t>(chain_id));
        std::vector<cxd> bp, bm;
        // running log objectives over the candidate sets
        std::vector<double> logp(cand_p.size(), 0.0), logm(cand_m.size(), 0.0);

        auto append_pair = [&](cxd b_plus, cxd b_minus) {
            bp.push_back(b_plus);
            bm.push_back(b_minus);
            for (size_t i = 0; i < cand_p.size(); ++i) {
                const cxd a = spec.alphas[cand_p[i]];
                const double dn = std::abs(a - b_plus);
                logp[i] = (dn == 0.0 || logp[i] == kNegInf)
                              ? kNegInf
                              : logp[i] + std::log(dn) - std::log(std::abs(a - b_minus));
            }
            for (size_t i = 0; i < cand_m.size(); ++i) {
                const cxd a = spec.alphas[cand_m[i]];
                const double dn = std::abs(a - b_minus);
                logm[i] = (dn == 0.0 || logm[i] == kNegInf)
                              ? kNegInf
                              : logm[i] + std::log(dn) - std::log(std::abs(a - b_plus));
            }
        };
        auto argmax = [](const std::vector<double>& v) {
            size_t best = 0;
            for (size_t i = 1; i < v.size(); ++i)
                if (v[i] > v[best]) best = i;   // ties keep the lowest index
            return best;
        };
        auto pick_plus = [&]() { return spec.alphas[cand_p[argmax(logp)]]; };
        auto pick_minus = [&]() { return spec.alphas[cand_m[argmax(logm)]]; };

        // random seed pair
        cxd b_plus, b_minus;
        if (!no_downstream) {
            std::uniform_int_distribution<size_t> up(0, cand_p.size() - 1);
            b_plus = spec.alphas[cand_p[up(rng)]];
        }
        if (!no_upstream) {
            std::uniform_int_distribution<size_t> um(0, cand_m.size() - 1);
            b_minus = spec.alphas[cand_m[um(rng)]];
        }
        if (no_upstream) b_minus = mirror(b_plus, delta, -1);
        if (no_downstream) b_plus = mirror(b_minus, delta, +1);
        append_pair(b_plus, b_minus);

        while (static_cast<int>(bp.size()) < n_beta) {
            cxd nb_plus = no_downstream ? cxd{} : pick_plus();
            cxd nb_minus = no_upstream ? cxd{} : pick_minus();
            if (no_upstream) nb_minus = mirror(nb_plus, delta, -1);
            if (no_downstream) nb_plus = mirror(nb_minus, delta, +1);
            append_pair(nb_plus, nb_minus);
        }

        Chain c;
        c.xi.beta_plus = Eigen::Map<Vec>(bp.data(), bp.size());
        c.xi.beta_minus = Eigen::Map<Vec>(bm.data(), bm.size());
        c.xi.origin = ParamOrigin::Greedy;
        // chain quality over the algorithm's candidate view
        double mp = kNegInf, mm = kNegInf;
        for (double v : logp) mp = std::max(mp, v);
        for (double v : logm) mm = std::max(mm, v);
        const double jp = cand_p.empty() || mp == kNegInf ? 0.0 : std::exp(mp);
        const double jm = cand_m.empty() || mm == kNegInf ? 0.0 : std::exp(mm);
        c.j_ownsr = std::max(jp, jm);
        c.j_ownsp = (cand_p.empty() || cand_m.empty()) ? 0.0 : jp * jm;
        return c;
    };

    const int n_starts = std::max(1, opts.n_starts);
    std::vector<Chain> chains(n_starts);
    if (n_starts == 1) {
        chains[0] = run_chain(0);
    } else {
        std::vector<std::future<Chain>> futs;
        futs.reserve(n_starts);
        for (int k = 0; k < n_starts; ++k)
            futs.push_back(std::async(std::launch::async, run_chain, k));
        for (int k = 0; k < n_starts; ++k) chains[k] = futs[k].get();
    }

    int best = 0;
    for (int k = 1; k < n_starts; ++k) {
        if (chains[k].j_ownsr < chains[best].j_ownsr ||
            (chains[k].j_ownsr == chains[best].j_ownsr && chains[k].j_ownsp < chains[best].j_ownsp))
            best = k;
    }
    return chains[best].xi;
}

RecursionParamSet heuristic_select(const HeuristicConfig& config) {
    if (config.n_beta < 1) throw BadConfig("heuristic: n_beta must be >= 1");
    if (!(config.ratio > 0.0)) throw BadConfig("heuristic: ratio must be positive");
    if (std::abs(config.anchor_plus) == 0.0) throw BadConfig("heuristic: anchor must be nonzero");
    const cxd am = config.anchor_minus.value_or(std::conj(config.anchor_plus));

    RecursionParamSet xi;
    xi.beta_plus.resize(config.n_beta);
    xi.beta_minus.resize(config.n_beta);
    double r = 1.0;
    for (int j = 0; j < config.n_beta; ++j) {
        xi.beta_plus[j] = config.anchor_plus * r;
        xi.beta_minus[j] = am * r;
        r *= config.ratio;
    }
    xi.origin = ParamOrigin::Heuristic;
    return xi;
}

RecursionParamSet minimal_set_ownsp(const Spectrum& spec) {
    check_cross_family_distinct(spec);
    if (spec.n_plus == 0 || spec.n_minus == 0)
        throw DegenerateSpectrum("minimal OWNS-P set needs both families nonempty");
    const double scale = spectral_scale(spec.alphas);
    const double delta = 0.05 * scale;

    RecursionParamSet xi;
    if (spec.n_plus <= spec.n_minus) {
        const int nb = spec.n_plus;
        xi.beta_plus = spec.alphas.head(nb);
        xi.beta_minus.resize(nb);
        for (int j = 0; j < nb; ++j)
            xi.beta_minus[j] =
                off_spectrum_value(spec.alphas, mirror(xi.beta_plus[j], delta, -1), scale);
    } else {
        const int nb = spec.n_minus;
        xi.beta_minus = spec.alphas.tail(nb);
        xi.beta_plus.resize(nb);
        for (int j = 0; j < nb; ++j)
            xi.beta_plus[j] =
                off_spectrum_value(spec.alphas, mirror(xi.beta_minus[j], delta, +1), scale);
    }
    xi.origin = ParamOrigin::MinimalP;
    RecursionParamSet sorted = order_params(xi);
    sorted.origin = ParamOrigin::MinimalP;
    return sorted;
}

RecursionParamSet minimal_set_ownsr(const Spectrum& spec) {
    check_cross_family_distinct(spec);
    const double scale = spectral_scale(spec.alphas);
    const double delta = 0.05 * scale;
    const int nb = std::max(spec.n_plus, spec.n_minus);
    if (nb == 0) throw EmptySpectrum();

    RecursionParamSet xi;
    xi.beta_plus.resize(nb);
    xi.beta_minus.resize(nb);
    for (int j = 0; j < nb; ++j) {
        if (j < spec.n_plus) {
            xi.beta_plus[j] = spec.alphas[j];
        } else {
            const cxd base = spec.n_plus > 0 ? spec.alphas[j % spec.n_plus]
                                             : spec.alphas[spec.n_plus + (j % spec.n_minus)];
            xi.beta_plus[j] = off_spectrum_value(spec.alphas, mirror(base, delta, +1), scale);
        }
        if (j < spec.n_minus) {
            xi.beta_minus[j] = spec.alphas[spec.n_plus + j];
        } else {
            const cxd base = spec.n_minus > 0 ? spec.alphas[spec.n_plus + (j % spec.n_minus)]
                                              : spec.alphas[j % spec.n_plus];
            xi.beta_minus[j] = off_spectrum_value(spec.alphas, mirror(base, delta, -1), scale);
        }
    }
    xi.origin = ParamOrigin::MinimalR;
    RecursionParamSet sorted = order_params(xi);
    sorted.origin = ParamOrigin::MinimalR;
    return sorted;
}

RecursionParamSet order_params(const RecursionParamSet& xi) {
    const int nb = xi.n_beta();
    std::vector<int> ip(nb), im(nb);
    std::iota(ip.begin(), ip.end(), 0);
    std::iota(im.begin(), im.end(), 0);
    std::stable_sort(ip.begin(), ip.end(), [&](int a, int b) {
        return std::abs(xi.beta_plus[a]) < std::abs(xi.beta_plus[b]);
    });
    std::stable_sort(im.begin(), im.end(), [&](int a, int b) {
        return std::abs(xi.beta_minus[a]) < std::abs(xi.beta_minus[b]);
    });
    RecursionParamSet out;
    out.beta_plus.resize(nb);
    out.beta_minus.resize(nb);
    for (int j = 0; j < nb; ++j) {
        out.beta_plus[j] = xi.beta_plus[ip[j]];
        out.beta_minus[j] = xi.beta_minus[im[j]];
    }
    out.order_plus = std::move(ip);
    out.order_minus = std::move(im);
    out.origin = xi.origin;
    return out;
}

Vec reflect_family(const Vec& betas, double scale) {
    Vec out(betas.size());
    for (int j = 0; j < betas.size(); ++j) out[j] = mirror(betas[j], 0.05 * scale, -1);
    return out;
}

}  // namespace owns
