#pragma once

#include <adjustkit/dataset.hpp>
#include <adjustkit/detail/table.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/estimators.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace adjustkit {

/// Delta_{A _||_ B | C}; C may be empty.
struct CiQuery {
    VarSet a;
    VarSet b;
    VarSet c;
};

namespace detail {

struct CiLayout {
    std::vector<std::size_t> positions;  // [C..., A..., B...]
    std::size_t c_cells = 1;
    std::size_t a_cells = 1;
    std::size_t b_cells = 1;
};

template <typename Source>
CiLayout ci_layout(const Source& src, const CiQuery& q) {
    require_disjoint(q.a, q.b, "CI separands");
    require_disjoint(q.a, q.c, "CI separand and conditioning set");
    require_disjoint(q.b, q.c, "CI separand and conditioning set");
    const auto cards = src.cardinalities();
    CiLayout out;
    for (const VarSet* set : {&q.c, &q.a, &q.b}) {
        const auto pos = src.positions(*set);
        std::size_t cells = 1;
        for (std::size_t p : pos) cells *= cards[p];
        if (set == &q.c) out.c_cells = cells;
        else if (set == &q.a) out.a_cells = cells;
        else out.b_cells = cells;
        out.positions.insert(out.positions.end(), pos.begin(), pos.end());
    }
    return out;
}

/// sum_{c,a,b} |P(a,b,c) - P(a,c) P(b,c) / P(c)| over a [C, A, B] table;
/// cells with P(c) = 0 contribute nothing.
inline double delta_from_table(const std::vector<double>& table, const CiLayout& l) {
    const std::size_t block = l.a_cells * l.b_cells;
    std::vector<double> pa(l.a_cells), pb(l.b_cells);
    double total = 0.0;
    for (std::size_t c = 0; c < l.c_cells; ++c) {
        const double* m = table.data() + c * block;
        std::fill(pa.begin(), pa.end(), 0.0);
        std::fill(pb.begin(), pb.end(), 0.0);
        double pc = 0.0;
        for (std::size_t a = 0; a < l.a_cells; ++a) {
            for (std::size_t b = 0; b < l.b_cells; ++b) {
                const double v = m[a * l.b_cells + b];
                pa[a] += v;
                pb[b] += v;
                pc += v;
            }
        }
        if (pc <= 0.0) continue;
        for (std::size_t a = 0; a < l.a_cells; ++a) {
            for (std::size_t b = 0; b < l.b_cells; ++b) {
                total += std::abs(m[a * l.b_cells + b] - pa[a] * pb[b] / pc);
            }
        }
    }
    return total;
}

}  // namespace detail

/// Approximate conditional independence measure
///   Delta = sum_{a,b,c} P(c) |P(a,b | c) - P(a | c) P(b | c)|,  in [0, 2].
inline double delta_ci(const JointDistribution& dist, const CiQuery& q) {
    const auto layout = detail::ci_layout(dist, q);
    return detail::delta_from_table(
        detail::project(dist.cardinalities(), dist.probabilities(), layout.positions), layout);
}

/// The same quantity through the conditional form
///   sum_{a,c} P(a,c) sum_b |P(b | a,c) - P(b | c)|.
inline double delta_ci_conditional_form(const JointDistribution& dist, const CiQuery& q) {
    const auto l = detail::ci_layout(dist, q);
    const auto m = detail::project(dist.cardinalities(), dist.probabilities(), l.positions);
    double total = 0.0;
    for (std::size_t c = 0; c < l.c_cells; ++c) {
        const std::size_t base = c * l.a_cells * l.b_cells;
        double pc = 0.0;
        std::vector<double> pbc(l.b_cells, 0.0);
        for (std::size_t a = 0; a < l.a_cells; ++a) {
            for (std::size_t b = 0; b < l.b_cells; ++b) {
                pbc[b] += m[base + a * l.b_cells + b];
                pc += m[base + a * l.b_cells + b];
            }
        }
        if (pc <= 0.0) continue;
        for (std::size_t a = 0; a < l.a_cells; ++a) {
            double pac = 0.0;
            for (std::size_t b = 0; b < l.b_cells; ++b) pac += m[base + a * l.b_cells + b];
            if (pac <= 0.0) continue;
            double dev = 0.0;
            for (std::size_t b = 0; b < l.b_cells; ++b) {
                dev += std::abs(m[base + a * l.b_cells + b] / pac - pbc[b] / pc);
            }
            total += pac * dev;
        }
    }
    return total;
}

/// delta_ci of the empirical distribution of `data` over A u B u C.
inline double delta_ci_empirical(const SampleDataset& data, const CiQuery& q) {
    const auto layout = detail::ci_layout(data, q);
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    auto table = detail::count_table(data, layout.positions);
    const double n = static_cast<double>(data.rows());
    for (double& v : table) v /= n;
    return detail::delta_from_table(table, layout);
}

/// Rows needed to learn P(A u B u C) to within eps/4 in L1 w.p. 1 - delta:
/// ceil(c0 (|Sigma| + ln(1/delta)) / (eps/4)^2).
inline std::size_t ci_sample_budget(std::size_t sigma, double eps, double delta, double c0 = 2.0) {
    detail::require_open_unit(eps, "eps");
    detail::require_open_unit(delta, "delta");
    if (sigma < 1) throw Error(ErrorCode::OutOfRange, "alphabet size must be >= 1");
    if (!(c0 > 0.0)) throw Error(ErrorCode::OutOfRange, "c0 must be positive");
    const double quarter = eps / 4.0;
    return detail::ceil_count(c0 * (static_cast<double>(sigma) + std::log(1.0 / delta)) / (quarter * quarter));
}

template <typename Source>
std::size_t ci_sample_budget(const Source& src, const CiQuery& q, double eps, double delta, double c0 = 2.0) {
    const auto l = detail::ci_layout(src, q);
    return ci_sample_budget(l.a_cells * l.b_cells * l.c_cells, eps, delta, c0);
}

enum class CiMode { ExactOracle, Empirical };
enum class Verdict { Yes, No };

inline std::string_view to_string(CiMode m) { return m == CiMode::ExactOracle ? "exact" : "empirical"; }
inline std::string_view to_string(Verdict v) { return v == Verdict::Yes ? "YES" : "NO"; }

/// Configuration of the YES/NO approximate-CI tester.
///
/// Exact-oracle mode answers YES iff Delta <= eps on the true distribution.
/// Empirical mode answers YES iff the plug-in Delta is <= eps/2, and refuses
/// to run on fewer rows than `ci_sample_budget`; at that budget it says YES
/// on Delta = 0 and NO on Delta > eps, each w.p. >= 1 - delta.
struct CiTester {
    CiMode mode = CiMode::ExactOracle;
    double epsilon = 0.05;
    double delta = 0.1;
    double c0 = 2.0;

    static CiTester exact(double eps, double delta = 0.1) {
        return checked({CiMode::ExactOracle, eps, delta, 2.0});
    }
    static CiTester empirical(double eps, double delta, double c0 = 2.0) {
        return checked({CiMode::Empirical, eps, delta, c0});
    }

    CiTester with_delta(double d) const {
        CiTester t = *this;
        t.delta = d;
        return t;
    }

private:
    static CiTester checked(CiTester t) {
        detail::require_open_unit(t.epsilon, "eps");
        detail::require_open_unit(t.delta, "delta");
        if (!(t.c0 > 0.0)) throw Error(ErrorCode::OutOfRange, "c0 must be positive");
        return t;
    }
};

/// What a tester is run against: the true distribution or a dataset.
class Evidence {
public:
    Evidence(const JointDistribution& dist) : source_(&dist) {}  // NOLINT(google-explicit-constructor)
    Evidence(const SampleDataset& data) : source_(&data) {}      // NOLINT(google-explicit-constructor)

    const JointDistribution* oracle() const noexcept {
        auto* p = std::get_if<const JointDistribution*>(&source_);
        return p ? *p : nullptr;
    }
    const SampleDataset* data() const noexcept {
        auto* p = std::get_if<const SampleDataset*>(&source_);
        return p ? *p : nullptr;
    }

    template <typename Fn>
    decltype(auto) visit(Fn&& fn) const {
        return std::visit([&](auto* src) -> decltype(auto) { return fn(*src); }, source_);
    }

private:
    std::variant<const JointDistribution*, const SampleDataset*> source_;
};

struct CiOutcome {
    Verdict verdict = Verdict::No;
    double statistic = 0.0;
    /// Rows required (empirical mode only; 0 for the exact oracle).
    std::size_t budget = 0;
};

inline CiOutcome ci_evaluate(const CiTester& tester, const Evidence& evidence, const CiQuery& q) {
    if (tester.mode == CiMode::ExactOracle) {
        const auto* dist = evidence.oracle();
        if (!dist) throw Error(ErrorCode::Usage, "exact-oracle tester needs a distribution");
        const double d = delta_ci(*dist, q);
        return {d <= tester.epsilon ? Verdict::Yes : Verdict::No, d, 0};
    }
    const auto* data = evidence.data();
    if (!data) throw Error(ErrorCode::Usage, "empirical tester needs a dataset");
    const std::size_t budget = ci_sample_budget(*data, q, tester.epsilon, tester.delta, tester.c0);
    if (data->rows() < budget) throw InsufficientSamples(budget, data->rows());
    const double d = delta_ci_empirical(*data, q);
    return {d <= tester.epsilon / 2.0 ? Verdict::Yes : Verdict::No, d, budget};
}

inline Verdict ci_test(const CiTester& tester, const Evidence& evidence, const CiQuery& q) {
    return ci_evaluate(tester, evidence, q).verdict;
}

}  // namespace adjustkit
