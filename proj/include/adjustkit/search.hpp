#pragma once

#include <adjustkit/ci.hpp>
#include <adjustkit/dataset.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/estimators.hpp>
#include <adjustkit/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace adjustkit {

inline constexpr std::size_t kMaxSearchCandidates = 25;
inline constexpr std::size_t kMaxBruteForceCandidates = 15;

struct DecisionInputs {
    std::size_t n = 1;
    std::size_t sigma_x = 1;
    std::size_t sigma_z = 1;
    std::size_t k = 0;
    double alpha_s = 1.0;
};

enum class Decision { UseSubset, UseZ };

inline std::string_view to_string(Decision d) { return d == Decision::UseSubset ? "use-subset" : "use-Z"; }

struct DecisionRecord {
    DecisionInputs inputs;
    double lhs = 0.0;
    double rhs = 0.0;
    Decision decision = Decision::UseZ;
};

struct SearchReport {
    VarSet chosen;
    std::size_t level_reached = 0;
    std::size_t tests_run = 0;
    std::vector<std::size_t> tests_per_level;
    std::size_t samples_required = 0;
    bool fallback_used = false;
    std::optional<DecisionRecord> decision_trace;
};

/// Whether estimating on the AMBA subset beats estimating on Z directly:
/// use-subset iff k sqrt(sigma_x / sigma_z) < max{sigma_z/n, alpha_s/sigma_z, alpha_s^2}.
inline DecisionRecord amba_decision(const DecisionInputs& d) {
    if (d.n < 1 || d.sigma_x < 1 || d.sigma_z < 1 || !(d.alpha_s > 0.0)) {
        throw Error(ErrorCode::OutOfRange, "decision inputs must be positive");
    }
    const double sx = static_cast<double>(d.sigma_x);
    const double sz = static_cast<double>(d.sigma_z);
    DecisionRecord r;
    r.inputs = d;
    r.lhs = static_cast<double>(d.k) * std::sqrt(sx / sz);
    r.rhs = std::max({sz / static_cast<double>(d.n), d.alpha_s / sz, d.alpha_s * d.alpha_s});
    r.decision = r.lhs < r.rhs ? Decision::UseSubset : Decision::UseZ;
    return r;
}

namespace detail {

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n) return out;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

/// w_k = (|A| C(|A|, k))^-1; |A| = 0 is treated as |A| = 1.
inline double level_weight(std::size_t size, std::size_t k) {
    return 1.0 / (static_cast<double>(std::max<std::size_t>(size, 1)) * binomial(size, k));
}

/// Source-agnostic view of the variable list.
struct Schema {
    std::vector<VariableSpec> variables;

    std::vector<std::size_t> positions(const VarSet& names) const {
        std::vector<std::size_t> out;
        for (const auto& name : names) {
            auto it = std::find_if(variables.begin(), variables.end(),
                                   [&](const VariableSpec& v) { return v.name == name; });
            if (it == variables.end()) throw Error(ErrorCode::UnknownVariable, "unknown variable " + name);
            out.push_back(static_cast<std::size_t>(it - variables.begin()));
        }
        std::sort(out.begin(), out.end());
        if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
            throw Error(ErrorCode::InvalidQuery, "variable listed twice in a set");
        }
        return out;
    }

    VarSet names(const std::vector<std::size_t>& pos) const {
        VarSet out;
        for (std::size_t p : pos) out.push_back(variables[p].name);
        return out;
    }

    std::size_t alphabet(const std::vector<std::size_t>& pos) const {
        std::size_t s = 1;
        for (std::size_t p : pos) s *= variables[p].cardinality;
        return s;
    }
};

inline Schema schema_of(const Evidence& evidence) {
    return evidence.visit([](const auto& src) { return Schema{src.variables()}; });
}

inline std::vector<std::size_t> pick(const std::vector<std::size_t>& pool, const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> out;
    for (std::size_t i : idx) out.push_back(pool[i]);
    return out;
}

inline std::vector<std::size_t> minus(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<std::size_t> unite(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline void require_disjoint_pos(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                 const char* what) {
    std::vector<std::size_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (!common.empty()) throw Error(ErrorCode::InvalidQuery, std::string(what) + " overlap");
}

inline void require_search_size(std::size_t size, std::size_t cap) {
    if (size > cap) {
        throw Error(ErrorCode::CandidateSetTooLarge,
                    "candidate set has " + std::to_string(size) + " variables, limit " + std::to_string(cap));
    }
}

/// Budget of one empirical test at failure probability `delta`.
inline std::size_t test_budget(const CiTester& t, std::size_t sigma, double delta) {
    return t.mode == CiMode::Empirical ? ci_sample_budget(sigma, t.epsilon, delta, t.c0) : 0;
}

}  // namespace detail

/// Level-wise exhaustive search for a smallest S subset of A with
/// X _||_eps A \ S | S. Level k tests every k-subset at failure budget
/// delta * w_k and returns the lexicographically smallest passer; falls back
/// to A when no level passes.
inline SearchReport amba(const CiTester& tester, const Evidence& evidence, const VarSet& x, const VarSet& a) {
    const auto schema = detail::schema_of(evidence);
    const auto x_pos = schema.positions(x);
    const auto a_pos = schema.positions(a);
    detail::require_disjoint_pos(x_pos, a_pos, "treatment and candidate set");
    detail::require_search_size(a_pos.size(), kMaxSearchCandidates);

    const std::size_t m = a_pos.size();
    const std::size_t sigma = schema.alphabet(x_pos) * schema.alphabet(a_pos);
    const auto level_budget = [&](std::size_t k) {
        return detail::test_budget(tester, sigma, tester.delta * detail::level_weight(m, k));
    };
    const std::size_t available = evidence.data() ? evidence.data()->rows() : 0;

    SearchReport report;
    for (std::size_t k = 0; k <= m; ++k) {
        const std::size_t budget = level_budget(k);
        if (tester.mode == CiMode::Empirical && available < budget) {
            std::size_t worst = 0;
            for (std::size_t j = 0; j <= m; ++j) worst = std::max(worst, level_budget(j));
            throw InsufficientSamples(worst, available);
        }
        report.samples_required = std::max(report.samples_required, budget);

        const auto level_tester = tester.with_delta(tester.delta * detail::level_weight(m, k));
        const auto subsets = detail::combinations(m, k);
        const auto passed = parallel_map<char>(subsets.size(), [&](std::size_t i) -> char {
            const auto s = detail::pick(a_pos, subsets[i]);
            const CiQuery q{schema.names(x_pos), schema.names(detail::minus(a_pos, s)), schema.names(s)};
            return ci_test(level_tester, evidence, q) == Verdict::Yes ? 1 : 0;
        });
        report.tests_per_level.push_back(subsets.size());
        report.tests_run += subsets.size();
        report.level_reached = k;

        const auto hit = std::find(passed.begin(), passed.end(), char{1});
        if (hit != passed.end()) {
            report.chosen = schema.names(detail::pick(a_pos, subsets[static_cast<std::size_t>(hit - passed.begin())]));
            return report;
        }
    }
    report.chosen = schema.names(a_pos);
    report.level_reached = m;
    report.fallback_used = true;
    return report;
}

/// Level-wise search for a smallest S' subset of A with |Sigma_S'| <= |Sigma_S|,
///   Y _||_eps S \ S' | X u S'   and   X _||_eps S' \ S | S,
/// each tested at failure budget delta * w_k / 2. Falls back to S.
inline SearchReport bamba(const CiTester& tester, const Evidence& evidence, const VarSet& x, const VarSet& y,
                          const VarSet& a, const VarSet& s) {
    const auto schema = detail::schema_of(evidence);
    const auto x_pos = schema.positions(x);
    const auto y_pos = schema.positions(y);
    const auto a_pos = schema.positions(a);
    const auto s_pos = schema.positions(s);
    detail::require_disjoint_pos(x_pos, y_pos, "treatment and outcome");
    detail::require_disjoint_pos(x_pos, a_pos, "treatment and candidate set");
    detail::require_disjoint_pos(y_pos, a_pos, "outcome and candidate set");
    if (!detail::minus(s_pos, a_pos).empty()) {
        throw Error(ErrorCode::InvalidQuery, "blanket S must be a subset of the candidate set");
    }
    detail::require_search_size(a_pos.size(), kMaxSearchCandidates);

    const std::size_t m = a_pos.size();
    const std::size_t sigma_s = schema.alphabet(s_pos);
    const std::size_t sigma_x = schema.alphabet(x_pos);
    const std::size_t sigma_y = schema.alphabet(y_pos);
    const std::size_t available = evidence.data() ? evidence.data()->rows() : 0;

    struct Candidate {
        std::vector<std::size_t> set;
        std::size_t budget = 0;
    };
    const auto level_candidates = [&](std::size_t k) {
        const double d = tester.delta * detail::level_weight(m, k) / 2.0;
        std::vector<Candidate> out;
        for (const auto& idx : detail::combinations(m, k)) {
            auto cand = detail::pick(a_pos, idx);
            if (schema.alphabet(cand) > sigma_s) continue;
            // Y _||_ S\S' | X u S' spans Y, X, S u S'; X _||_ S'\S | S spans X, S u S'.
            const std::size_t joint = schema.alphabet(detail::unite(s_pos, cand));
            const std::size_t budget = std::max(detail::test_budget(tester, sigma_y * sigma_x * joint, d),
                                                detail::test_budget(tester, sigma_x * joint, d));
            out.push_back({std::move(cand), budget});
        }
        return out;
    };
    const auto max_budget = [](const std::vector<Candidate>& cs) {
        std::size_t b = 0;
        for (const auto& c : cs) b = std::max(b, c.budget);
        return b;
    };

    SearchReport report;
    for (std::size_t k = 0; k <= m; ++k) {
        const auto candidates = level_candidates(k);
        const std::size_t budget = max_budget(candidates);
        if (tester.mode == CiMode::Empirical && available < budget) {
            std::size_t worst = 0;
            for (std::size_t j = 0; j <= m; ++j) worst = std::max(worst, max_budget(level_candidates(j)));
            throw InsufficientSamples(worst, available);
        }
        report.samples_required = std::max(report.samples_required, budget);

        const auto level_tester = tester.with_delta(tester.delta * detail::level_weight(m, k) / 2.0);
        const auto passed = parallel_map<char>(candidates.size(), [&](std::size_t i) -> char {
            const auto& cand = candidates[i].set;
            const CiQuery outcome{schema.names(y_pos), schema.names(detail::minus(s_pos, cand)),
                                  schema.names(detail::unite(x_pos, cand))};
            const CiQuery treatment{schema.names(x_pos), schema.names(detail::minus(cand, s_pos)),
                                    schema.names(s_pos)};
            const bool first = ci_test(level_tester, evidence, outcome) == Verdict::Yes;
            const bool second = ci_test(level_tester, evidence, treatment) == Verdict::Yes;
            return first && second ? 1 : 0;
        });
        report.tests_per_level.push_back(2 * candidates.size());
        report.tests_run += 2 * candidates.size();
        report.level_reached = k;

        const auto hit = std::find(passed.begin(), passed.end(), char{1});
        if (hit != passed.end()) {
            report.chosen = schema.names(candidates[static_cast<std::size_t>(hit - passed.begin())].set);
            return report;
        }
    }
    report.chosen = schema.names(s_pos);
    report.level_reached = m;
    report.fallback_used = true;
    return report;
}

/// Worst-case rows an empirical AMBA run may need over all levels.
inline std::size_t amba_sample_budget(const CiTester& tester, std::size_t sigma_x, std::size_t sigma_a,
                                      std::size_t candidates) {
    std::size_t worst = 0;
    for (std::size_t k = 0; k <= candidates; ++k) {
        worst = std::max(worst, ci_sample_budget(sigma_x * sigma_a, tester.epsilon,
                                                 tester.delta * detail::level_weight(candidates, k), tester.c0));
    }
    return worst;
}

/// Exhaustive oracle: first S (by size, then lexicographically) with
/// Delta_{X _||_ A \ S | S} <= tol.
inline VarSet brute_force_min_blanket(const JointDistribution& dist, const VarSet& x, const VarSet& a, double tol) {
    const auto a_pos = dist.positions(a);
    detail::require_search_size(a_pos.size(), kMaxBruteForceCandidates);
    const detail::Schema schema{dist.variables()};
    for (std::size_t k = 0; k <= a_pos.size(); ++k) {
        for (const auto& idx : detail::combinations(a_pos.size(), k)) {
            const auto s = detail::pick(a_pos, idx);
            if (delta_ci(dist, {x, schema.names(detail::minus(a_pos, s)), schema.names(s)}) <= tol) {
                return schema.names(s);
            }
        }
    }
    return schema.names(a_pos);
}

/// Exhaustive oracle for screening sets of (S, X, Y) within A.
inline VarSet brute_force_min_screening(const JointDistribution& dist, const VarSet& x, const VarSet& y,
                                        const VarSet& a, const VarSet& s, double tol) {
    const auto a_pos = dist.positions(a);
    const auto s_pos = dist.positions(s);
    const auto x_pos = dist.positions(x);
    detail::require_search_size(a_pos.size(), kMaxBruteForceCandidates);
    const detail::Schema schema{dist.variables()};
    const std::size_t sigma_s = schema.alphabet(s_pos);
    for (std::size_t k = 0; k <= a_pos.size(); ++k) {
        for (const auto& idx : detail::combinations(a_pos.size(), k)) {
            const auto cand = detail::pick(a_pos, idx);
            if (schema.alphabet(cand) > sigma_s) continue;
            const double outcome = delta_ci(
                dist, {y, schema.names(detail::minus(s_pos, cand)), schema.names(detail::unite(x_pos, cand))});
            if (outcome > tol) continue;
            const double treatment = delta_ci(dist, {x, schema.names(detail::minus(cand, s_pos)), s});
            if (treatment <= tol) return schema.names(cand);
        }
    }
    return schema.names(s_pos);
}

struct AutoResult {
    EstimateReport estimate;
    SearchReport blanket;
    std::optional<SearchReport> screening;
    DecisionRecord decision;
    VarSet s_star;
};

struct AutoConfig {
    double epsilon = 0.05;
    double delta = 0.1;
    double c0 = 2.0;
};

/// AMBA on Z, then the subset-vs-Z decision, then BAMBA when the subset
/// wins; the plug-in estimate is taken on the resulting S*. With an oracle
/// the searches and alpha_S use the true distribution; the estimate is
/// always computed from `data`. Z must be a valid adjustment set, which
/// cannot be checked from data.
inline AutoResult auto_estimate(const SampleDataset& data, const AdjustmentQuery& q, const AutoConfig& cfg,
                                const JointDistribution* oracle = nullptr) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    detail::validate_query(q);
    const VarSet x = q.x.variables();
    const VarSet y = q.y.variables();
    const CiTester tester =
        oracle ? CiTester::exact(cfg.epsilon, cfg.delta) : CiTester::empirical(cfg.epsilon, cfg.delta, cfg.c0);
    const Evidence evidence = oracle ? Evidence(*oracle) : Evidence(data);

    AutoResult out;
    out.blanket = amba(tester, evidence, x, q.adjust);
    const VarSet& s = out.blanket.chosen;
    const double alpha_s = oracle ? alpha(*oracle, q.x, s) : empirical_alpha(data, q.x, s);
    out.decision = amba_decision({data.rows(), data.alphabet_size(x), data.alphabet_size(q.adjust), s.size(),
                                  alpha_s});
    out.blanket.decision_trace = out.decision;

    if (out.decision.decision == Decision::UseSubset) {
        out.screening = bamba(tester, evidence, x, y, q.adjust, s);
        out.s_star = out.screening->chosen;
    } else {
        out.s_star = detail::Schema{data.variables()}.names(data.positions(q.adjust));
    }
    out.estimate = plugin_adjustment(data, {q.x, q.y, out.s_star});
    return out;
}

}  // namespace adjustkit
