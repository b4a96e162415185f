#pragma once

#include <adjustkit/dataset.hpp>
#include <adjustkit/detail/table.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace adjustkit {

/// Arguments of the adjustment functional T_{A,x,y} = sum_a P(y | x, a) P(a).
struct AdjustmentQuery {
    Event x;
    Event y;
    VarSet adjust;
};

struct EstimateReport {
    double value = 0.0;
    std::size_t n_effective = 0;
    /// Observed covariate cells with no treated row (N_{x,a} = 0).
    std::size_t zero_cells = 0;
    SamplingMode mode = SamplingMode::FixedN;
};

namespace detail {

inline void require_disjoint(const VarSet& a, const VarSet& b, const char* what) {
    for (const auto& name : a) {
        if (std::find(b.begin(), b.end(), name) != b.end()) {
            throw Error(ErrorCode::InvalidQuery, std::string(what) + " share variable " + name);
        }
    }
}

inline void validate_query(const AdjustmentQuery& q) {
    const auto xs = q.x.variables();
    const auto ys = q.y.variables();
    require_disjoint(xs, ys, "treatment and outcome");
    require_disjoint(xs, q.adjust, "treatment and adjustment set");
    require_disjoint(ys, q.adjust, "outcome and adjustment set");
}

/// Projection of a source onto [A..., X..., Y...] plus the fixed x and y
/// offsets inside that layout.
struct AdjustmentLayout {
    std::vector<std::size_t> positions;
    std::size_t a_cells = 1;
    std::size_t x_cells = 1;
    std::size_t y_cells = 1;
    std::size_t x_index = 0;
    std::size_t y_index = 0;
};

template <typename Source>
AdjustmentLayout adjustment_layout(const Source& src, const AdjustmentQuery& q) {
    validate_query(q);
    const auto cards = src.cardinalities();
    auto lookup = [&](const std::string& n) { return src.index_of(n); };
    const auto a_pos = src.positions(q.adjust);
    const auto xb = bind_event(q.x, cards, lookup);
    const auto yb = bind_event(q.y, cards, lookup);

    AdjustmentLayout out;
    out.positions = a_pos;
    out.positions.insert(out.positions.end(), xb.positions.begin(), xb.positions.end());
    out.positions.insert(out.positions.end(), yb.positions.begin(), yb.positions.end());
    for (std::size_t p : a_pos) out.a_cells *= cards[p];
    for (std::size_t p : xb.positions) out.x_cells *= cards[p];
    for (std::size_t p : yb.positions) out.y_cells *= cards[p];
    out.x_index = sub_index(cards, xb.positions, xb.values);
    out.y_index = sub_index(cards, yb.positions, yb.values);
    return out;
}

}  // namespace detail

/// Exact T_{A,x,y}. Throws POSITIVITY_VIOLATION when some a has P(a) > 0
/// but P(x | a) = 0.
inline double exact_adjustment(const JointDistribution& dist, const AdjustmentQuery& q) {
    const auto layout = detail::adjustment_layout(dist, q);
    const auto table = detail::project(dist.cardinalities(), dist.probabilities(), layout.positions);
    const std::size_t block = layout.x_cells * layout.y_cells;

    double total = 0.0;
    for (std::size_t a = 0; a < layout.a_cells; ++a) {
        const double* cell = table.data() + a * block;
        double p_a = 0.0;
        for (std::size_t i = 0; i < block; ++i) p_a += cell[i];
        if (p_a <= 0.0) continue;
        const double* treated = cell + layout.x_index * layout.y_cells;
        double p_xa = 0.0;
        for (std::size_t i = 0; i < layout.y_cells; ++i) p_xa += treated[i];
        if (p_xa <= 0.0) {
            throw Error(ErrorCode::PositivityViolation,
                        "P(x | a) = 0 for adjustment cell " + std::to_string(a) + " with P(a) > 0");
        }
        total += p_a * treated[layout.y_index] / p_xa;
    }
    return std::clamp(total, 0.0, 1.0);
}

/// Plug-in estimate sum_a (N_a / N) (N_{y,x,a} / N_{x,a}), with 0/0 := 0.
inline EstimateReport plugin_adjustment(const SampleDataset& data, const AdjustmentQuery& q) {
    const auto layout = detail::adjustment_layout(data, q);
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    const auto counts = detail::count_table(data, layout.positions);
    const std::size_t block = layout.x_cells * layout.y_cells;
    const double n = static_cast<double>(data.rows());

    EstimateReport report;
    report.n_effective = data.rows();
    report.mode = data.provenance().mode;
    double total = 0.0;
    for (std::size_t a = 0; a < layout.a_cells; ++a) {
        const double* cell = counts.data() + a * block;
        double n_a = 0.0;
        for (std::size_t i = 0; i < block; ++i) n_a += cell[i];
        if (n_a == 0.0) continue;
        const double* treated = cell + layout.x_index * layout.y_cells;
        double n_xa = 0.0;
        for (std::size_t i = 0; i < layout.y_cells; ++i) n_xa += treated[i];
        if (n_xa == 0.0) {
            ++report.zero_cells;
            continue;
        }
        total += (n_a / n) * (treated[layout.y_index] / n_xa);
    }
    report.value = std::clamp(total, 0.0, 1.0);
    return report;
}

/// Positivity parameter alpha_A = min over a with P(a) > 0 of P(x | a);
/// P(x) when A is empty.
inline double alpha(const JointDistribution& dist, const Event& x, const VarSet& adjust) {
    AdjustmentQuery q{x, Event{}, adjust};
    const auto layout = detail::adjustment_layout(dist, q);
    const auto table = detail::project(dist.cardinalities(), dist.probabilities(), layout.positions);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < layout.a_cells; ++a) {
        const double* cell = table.data() + a * layout.x_cells;
        double p_a = 0.0;
        for (std::size_t i = 0; i < layout.x_cells; ++i) p_a += cell[i];
        if (p_a <= 0.0) continue;
        best = std::min(best, cell[layout.x_index] / p_a);
    }
    return best;
}

/// Empirical alpha: min over observed s of N_{x,s} / N_s, floored at
/// 1 / (N + |Sigma_S|) so the result is never zero.
inline double empirical_alpha(const SampleDataset& data, const Event& x, const VarSet& adjust) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    AdjustmentQuery q{x, Event{}, adjust};
    const auto layout = detail::adjustment_layout(data, q);
    const auto counts = detail::count_table(data, layout.positions);
    double best = 1.0;
    for (std::size_t a = 0; a < layout.a_cells; ++a) {
        const double* cell = counts.data() + a * layout.x_cells;
        double n_a = 0.0;
        for (std::size_t i = 0; i < layout.x_cells; ++i) n_a += cell[i];
        if (n_a == 0.0) continue;
        best = std::min(best, cell[layout.x_index] / n_a);
    }
    const double floor = 1.0 / static_cast<double>(data.rows() + layout.a_cells);
    return std::max(best, floor);
}

/// Draws N ~ Pois(mean), then N i.i.d. rows, all from one stream keyed by seed.
inline SampleDataset poissonized_sample(const JointDistribution& dist, double mean, std::uint64_t seed) {
    if (!(mean >= 1.0) || !std::isfinite(mean)) {
        throw Error(ErrorCode::OutOfRange, "Poisson mean must be >= 1");
    }
    CounterRng rng(seed);
    std::poisson_distribution<std::uint64_t> pois(mean);
    const auto n = static_cast<std::size_t>(pois(rng));
    return SampleDataset(dist.variables(), detail::draw_rows(dist, n, rng),
                         Provenance{SamplingMode::Poissonized, static_cast<std::size_t>(std::llround(mean))}, seed);
}

namespace detail {

inline void require_open_unit(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::OutOfRange, std::string(name) + " must lie in (0, 1)");
}

inline void require_alpha(double a) {
    if (!(a > 0.0 && a <= 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0, 1]");
}

inline std::size_t ceil_count(double v) {
    if (!std::isfinite(v) || v > 9.0e18) throw Error(ErrorCode::OutOfRange, "sample size overflows");
    return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace detail

/// Samples sufficient for |T_hat - T| <= eps w.p. >= 1 - delta:
///   36 s / (eps alpha) ln(3 s / delta) + 9 / (2 eps^2 alpha) ln(6 / delta)
///   + c0 (s + ln(1 / delta)) / (eps / 3)^2
/// where s = |Sigma_A|. The last term's constant is unnamed in the analysis;
/// c0 is that constant.
inline std::size_t sample_size_estimation(double eps, double delta, std::size_t sigma, double alpha_a,
                                          double c0 = 2.0) {
    detail::require_open_unit(eps, "eps");
    detail::require_open_unit(delta, "delta");
    detail::require_alpha(alpha_a);
    if (sigma < 1) throw Error(ErrorCode::OutOfRange, "alphabet size must be >= 1");
    if (!(c0 > 0.0)) throw Error(ErrorCode::OutOfRange, "c0 must be positive");
    const double s = static_cast<double>(sigma);
    const double cells = 36.0 * s / (eps * alpha_a) * std::log(3.0 * s / delta);
    const double ratio = 9.0 / (2.0 * eps * eps * alpha_a) * std::log(6.0 / delta);
    const double third = eps / 3.0;
    const double tv = c0 * (s + std::log(1.0 / delta)) / (third * third);
    return detail::ceil_count(cells + ratio + tv);
}

/// Samples sufficient for E|T_hat - T| <= lambda: ceil((s/(lambda alpha) +
/// 1/(lambda^2 alpha)) c). Comparison only.
inline std::size_t sample_size_expectation(double lambda, std::size_t sigma, double alpha_z, double c = 2.0) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorCode::OutOfRange, "lambda must lie in (0, 1]");
    detail::require_alpha(alpha_z);
    if (sigma < 1) throw Error(ErrorCode::OutOfRange, "alphabet size must be >= 1");
    if (!(c > 0.0)) throw Error(ErrorCode::OutOfRange, "c must be positive");
    const double s = static_cast<double>(sigma);
    return detail::ceil_count((s / (lambda * alpha_z) + 1.0 / (lambda * lambda * alpha_z)) * c);
}

struct BoundMode {
    enum class Kind { Direct, Amba, Bamba };

    Kind kind = Kind::Direct;
    std::size_t sigma_x = 1;
    std::size_t sigma_y = 1;
    std::size_t k = 0;

    static BoundMode direct() { return {}; }
    static BoundMode amba(std::size_t sigma_x, std::size_t k) { return {Kind::Amba, sigma_x, 1, k}; }
    static BoundMode bamba(std::size_t sigma_x, std::size_t sigma_y, std::size_t k) {
        return {Kind::Bamba, sigma_x, sigma_y, k};
    }
};

/// Error achievable with n samples, log factors dropped:
///   direct: s/(n alpha) + 1/sqrt(n alpha) + sqrt(s/n)
///   amba:   (1/alpha) sqrt(k/n) (sigma_x s)^(1/4)
///   bamba:  (1/alpha) sqrt(k/n) (sigma_x sigma_y s)^(1/4)
/// scaled by `constant`.
inline double error_bound(std::size_t n, std::size_t sigma, double alpha_s, BoundMode mode,
                          double constant = 1.0) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
    if (sigma < 1) throw Error(ErrorCode::OutOfRange, "alphabet size must be >= 1");
    detail::require_alpha(alpha_s);
    const double nn = static_cast<double>(n);
    const double s = static_cast<double>(sigma);
    switch (mode.kind) {
    case BoundMode::Kind::Direct:
        return constant * (s / (nn * alpha_s) + 1.0 / std::sqrt(nn * alpha_s) + std::sqrt(s / nn));
    case BoundMode::Kind::Amba:
        return constant / alpha_s * std::sqrt(static_cast<double>(mode.k) / nn) *
               std::pow(static_cast<double>(mode.sigma_x) * s, 0.25);
    case BoundMode::Kind::Bamba:
        return constant / alpha_s * std::sqrt(static_cast<double>(mode.k) / nn) *
               std::pow(static_cast<double>(mode.sigma_x) * static_cast<double>(mode.sigma_y) * s, 0.25);
    }
    return 0.0;
}

}  // namespace adjustkit
