#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coopsense/model.hpp"

namespace coopsense {

inline double normal_cdf(double x, double mean, double variance) noexcept
{
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

inline double normal_pdf(double x, double mean, double variance) noexcept
{
    const double d = x - mean;
    return std::exp(-d * d / (2.0 * variance)) / std::sqrt(2.0 * M_PI * variance);
}

/// Gaussian law of one fusion-statistic increment within a drift segment.
struct IncrementLaw {
    double mean = 0.0;
    double variance = 1.0;
};

// ---------------------------------------------------------------------------
// Mean first passage of a walk reflected at zero

enum class QuadratureRule { Trapezoidal, Simpson };

/// L(s) on the grid s_i = i*step, i = 0..n, with s_n = threshold.
struct RenewalGrid {
    double threshold = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double at_origin() const { return values.front(); }
    double rate() const { return 1.0 / values.front(); } ///< lambda_beta
};

/// Solves L(s) = 1 + F(-s) L(0) + int_0^beta L(u) f(u - s) du for the walk W' = max(0, W + S) started
/// at s, where L(s) is the mean number of steps until W' >= beta. Nystrom discretization on a uniform
/// grid (Simpson by default, which rounds the grid up to an even interval count), dense LU solve.
inline RenewalGrid renewal_solve(const IncrementLaw& law, double beta, double step,
                                 QuadratureRule rule = QuadratureRule::Simpson)
{
    if (!(beta > 0.0)) throw UsageError("renewal: threshold must be positive");
    if (!(law.variance > 0.0)) throw UsageError("renewal: increment variance must be positive");
    if (!(step > 0.0) || step > beta / 200.0 * (1.0 + 1e-12)) throw UsageError("renewal: step must be in (0, beta/200]");
    auto n = static_cast<Eigen::Index>(std::ceil(beta / step - 1e-9));
    if (rule == QuadratureRule::Simpson && n % 2 != 0) ++n;
    const double h = beta / static_cast<double>(n);
    const Eigen::Index size = n + 1;

    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const double s = static_cast<double>(i) * h;
        for (Eigen::Index j = 0; j < size; ++j) {
            double w = 0.0;
            if (rule == QuadratureRule::Trapezoidal)
                w = (j == 0 || j == n) ? 0.5 * h : h;
            else
                w = (j == 0 || j == n) ? h / 3.0 : (j % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
            a(i, j) -= w * normal_pdf(static_cast<double>(j) * h - s, law.mean, law.variance);
        }
        a(i, 0) -= normal_cdf(-s, law.mean, law.variance);
    }
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(size);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite() || !(x(0) >= 1.0 - 1e-9))
        throw NumericalError("renewal: linear system produced no admissible solution");

    RenewalGrid g{beta, h, std::vector<double>(x.data(), x.data() + size)};
    return g;
}

inline double renewal_first_passage_mean(const IncrementLaw& law, double beta, double step,
                                        QuadratureRule rule = QuadratureRule::Simpson)
{
    return renewal_solve(law, beta, step, rule).at_origin();
}

// ---------------------------------------------------------------------------
// Local first-passage law (CLT approximation of the SPRT crossing time)

struct LocalPassageLaw {
    double mean = 0.0;
    double variance = 0.0;
};

/// Drift and variance of one node's LLR increment under H1: theta^2/(2 sigma^2) and theta^2/sigma^2.
inline double local_drift(const NodeParams& n) noexcept
{
    return n.post_change_mean * n.post_change_mean / (2.0 * n.noise_std * n.noise_std);
}

inline LocalPassageLaw local_passage_law(const NodeParams& n, double gamma) noexcept
{
    const double s2 = n.noise_std * n.noise_std;
    const double t2 = n.post_change_mean * n.post_change_mean;
    return {2.0 * s2 * gamma / t2, 8.0 * s2 * s2 * gamma / (t2 * t2)};
}

inline double local_passage_cdf(const NodeParams& n, double gamma, double k)
{
    const auto law = local_passage_law(n, gamma);
    return normal_cdf(k, law.mean, law.variance);
}

// ---------------------------------------------------------------------------
// False-alarm probability under H1 for SPRT-CSPRT

struct PfaOptions {
    double grid_fraction = 1e-3;   ///< renewal grid step as a fraction of beta
    double truncation = 1e-12;     ///< stop the series once prod(1 - Phi) falls below this
    std::int64_t max_terms = 10'000'000;
};

struct PfaAnalysis {
    double pfa = 0.0;
    double lambda = 0.0;     ///< 1 / mean first passage of the false-alarm walk
    IncrementLaw walk_law;   ///< sign-normalized increment law of that walk
    std::int64_t terms = 0;
};

/// Increment law of -F^0 before any node transmits (only receiver noise reaches the fusion center),
/// reflected at zero and heading for +beta.
inline IncrementLaw false_alarm_walk_law(const ScenarioConfig& cfg) noexcept
{
    const FusionChannelParams& f = cfg.fusion;
    const double scale = f.drift_convention == DriftConvention::ExactLLR ? 2.0 * f.design_mean / f.noise_variance
                                                                          : 2.0 * f.design_mean;
    return {-cfg.bias.d0, scale * scale * f.noise_variance};
}

/// sum_k (1 - exp(-lambda k)) prod_l (1 - Phi_l(k)); only the "before the first transmission" term.
inline PfaAnalysis pfa_analytic(const ScenarioConfig& cfg, const PfaOptions& opt = {})
{
    if (cfg.algorithm != Algorithm::SprtCsprt) throw UsageError("pfa_analytic: only SPRT-CSPRT is analysed");
    PfaAnalysis out;
    out.walk_law = false_alarm_walk_law(cfg);
    const double beta = cfg.fusion_threshold;
    out.lambda = 1.0 / renewal_first_passage_mean(out.walk_law, beta, beta * opt.grid_fraction);

    std::vector<LocalPassageLaw> laws;
    for (const auto& n : cfg.nodes) laws.push_back(local_passage_law(n, cfg.local_threshold));
    double total = 0.0;
    std::int64_t k = 1;
    for (; k <= opt.max_terms; ++k) {
        double survive = 1.0;
        for (const auto& l : laws) survive *= 1.0 - normal_cdf(static_cast<double>(k), l.mean, l.variance);
        if (survive < opt.truncation) break;
        total += -std::expm1(-out.lambda * static_cast<double>(k)) * survive;
    }
    out.pfa = total;
    out.terms = k - 1;
    return out;
}

// ---------------------------------------------------------------------------
// Order statistics of independent, non-identical Gaussians

/// P(at least i of the variables are <= x), given each one's CDF value at x.
inline double at_least_count_probability(std::span<const double> p, std::size_t i)
{
    std::vector<double> dist(p.size() + 1, 0.0);
    dist[0] = 1.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        for (std::size_t c = m + 1; c > 0; --c) dist[c] = dist[c] * (1.0 - p[m]) + dist[c - 1] * p[m];
        dist[0] *= 1.0 - p[m];
    }
    double s = 0.0;
    for (std::size_t c = i; c < dist.size(); ++c) s += dist[c];
    return std::clamp(s, 0.0, 1.0);
}

/// E[t_(i)], i = 1..L, by integrating the survival function of each order statistic.
inline std::vector<double> order_stat_epoch_means(std::span<const LocalPassageLaw> laws)
{
    if (laws.empty()) throw UsageError("order statistics: no variables");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& l : laws) {
        if (!(l.variance > 0.0)) throw UsageError("order statistics: variances must be positive");
        const double sd = std::sqrt(l.variance);
        lo = std::min(lo, l.mean - 14.0 * sd);
        hi = std::max(hi, l.mean + 14.0 * sd);
    }
    std::vector<double> p(laws.size());
    std::vector<double> out;
    for (std::size_t i = 1; i <= laws.size(); ++i) {
        auto survival = [&](double x) {
            for (std::size_t m = 0; m < laws.size(); ++m) p[m] = normal_cdf(x, laws[m].mean, laws[m].variance);
            return 1.0 - at_least_count_probability(p, i);
        };
        double err = 0.0;
        const double integral =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(survival, lo, hi, 20, 1e-13, &err);
        out.push_back(lo + integral);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Drift schedule and detection delay under H1

struct Epoch {
    double time = 0.0;      ///< E[T_k]
    double drift = 0.0;     ///< mu_k, mean fusion increment from T_k on
    double level_sum = 0.0; ///< sum of transmitted levels from T_k on
    double pre_mean = 0.0;  ///< mean fusion statistic just before T_k
};

struct EpochSchedule {
    std::vector<Epoch> epochs;
    double terminal_drift = 0.0; ///< every node at its top level
};

/// Node i (sorted by mean passage time) starts sending the first level at E[t_i]; it moves up one
/// level every 2*delta_up/delta_l slots (one quantizer band at its local drift) while that stays
/// before E[t_{i+1}].
inline EpochSchedule build_epoch_schedule(const ScenarioConfig& cfg, std::span<const double> epoch_means)
{
    const std::size_t n = cfg.nodes.size();
    if (epoch_means.size() != n) throw UsageError("epoch schedule: need one epoch mean per node");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return local_passage_law(cfg.nodes[a], cfg.local_threshold).mean <
               local_passage_law(cfg.nodes[b], cfg.local_threshold).mean;
    });
    const auto& levels = cfg.quantizer.upper_levels;
    auto drift_of = [&](double level_sum) { return fusion_llr_increment(level_sum, cfg.fusion) + cfg.bias.d1; };

    EpochSchedule sched;
    std::vector<double> node_level(n, 0.0);
    auto push = [&](double t) {
        const double sum = std::accumulate(node_level.begin(), node_level.end(), 0.0);
        Epoch e{t, drift_of(sum), sum, 0.0};
        if (!sched.epochs.empty()) {
            const Epoch& prev = sched.epochs.back();
            e.pre_mean = prev.pre_mean + prev.drift * (t - prev.time);
        }
        sched.epochs.push_back(e);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t node = order[i];
        const double next = i + 1 < n ? epoch_means[i + 1] : std::numeric_limits<double>::infinity();
        const double spacing = 2.0 * cfg.quantizer.delta_up / local_drift(cfg.nodes[node]);
        double t = epoch_means[i];
        node_level[node] = levels[0];
        push(t);
        for (std::size_t j = 1; j < 4 && t + spacing < next; ++j) {
            t += spacing;
            node_level[node] = levels[j];
            push(t);
        }
    }
    sched.terminal_drift = drift_of(levels[3] * static_cast<double>(n));
    return sched;
}

/// E[T_j] + (beta - Fbar_j)/mu_j for the first segment in which the mean path reaches beta.
inline double edd_analytic(const EpochSchedule& sched, double beta)
{
    if (sched.epochs.empty()) throw UsageError("edd_analytic: empty schedule");
    const auto& e = sched.epochs;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double span = i + 1 < e.size() ? e[i + 1].time - e[i].time : std::numeric_limits<double>::infinity();
        if (e[i].drift > 0.0 && (beta - e[i].pre_mean) / e[i].drift < span)
            return e[i].time + (beta - e[i].pre_mean) / e[i].drift;
    }
    if (!(sched.terminal_drift > 0.0))
        throw NumericalError("edd_analytic: fusion drift never becomes positive; beta is unreachable");
    const Epoch& last = e.back();
    const double f_end = last.pre_mean; // the final segment's own drift was non-positive
    return last.time + std::max(0.0, beta - f_end) / sched.terminal_drift;
}

inline std::vector<LocalPassageLaw> local_passage_laws(const ScenarioConfig& cfg)
{
    std::vector<LocalPassageLaw> laws;
    for (const auto& n : cfg.nodes) laws.push_back(local_passage_law(n, cfg.local_threshold));
    std::sort(laws.begin(), laws.end(), [](const auto& a, const auto& b) { return a.mean < b.mean; });
    return laws;
}

inline double edd_analytic(const ScenarioConfig& cfg)
{
    const auto laws = local_passage_laws(cfg);
    const auto means = order_stat_epoch_means(laws);
    return edd_analytic(build_epoch_schedule(cfg, means), cfg.fusion_threshold);
}

} // namespace coopsense
