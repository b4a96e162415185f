#pragma once

#include <adjustkit/ci.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/estimators.hpp>
#include <adjustkit/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace adjustkit {

namespace detail {

/// Builds a table over binary variables from a per-assignment mass function.
inline JointDistribution binary_table(const std::vector<std::string>& names,
                                      const std::function<double(const std::vector<std::size_t>&)>& mass) {
    std::vector<VariableSpec> vars;
    for (const auto& n : names) vars.push_back({n, 2});
    const std::size_t cells = std::size_t{1} << names.size();
    std::vector<double> probs(cells);
    std::vector<std::size_t> bits(names.size());
    for (std::size_t flat = 0; flat < cells; ++flat) {
        for (std::size_t d = 0; d < names.size(); ++d) bits[d] = (flat >> (names.size() - 1 - d)) & 1U;
        probs[flat] = mass(bits);
    }
    return JointDistribution(std::move(vars), std::move(probs));
}

inline double bern(double p_one, std::size_t v) { return v ? p_one : 1.0 - p_one; }

}  // namespace detail

/// Two-level construction over binary A < B < X < Y where {A} is an
/// eps-Markov blanket of X w.r.t. {A, B} yet adjusting on {A} instead of
/// {A, B} is off by exactly eps^2 / (16 alpha) at x: X=0, y: Y=1.
/// Requires 0 < sqrt(eps) <= alpha <= 1/2.
inline JointDistribution gallery_hardness(double eps, double alpha_param) {
    if (!(eps > 0.0) || !(std::sqrt(eps) <= alpha_param) || !(alpha_param <= 0.5)) {
        throw Error(ErrorCode::ParamRange, "hardness family needs 0 < sqrt(eps) <= alpha <= 1/2");
    }
    const double r = std::sqrt(eps);
    const double p_a1 = eps / (4.0 * alpha_param) * (alpha_param - eps / 4.0) / (1.0 - r / 2.0);
    return detail::binary_table({"A", "B", "X", "Y"}, [&](const std::vector<std::size_t>& v) {
        const std::size_t a = v[0], b = v[1], x = v[2], y = v[3];
        const double pa = detail::bern(p_a1, a);
        const double pb = (b == 1 - a ? 1.0 - r : 0.0) + r / 2.0;
        const double px = (x == a ? 1.0 - alpha_param : 0.0) + (x == 1 - a ? alpha_param - r / 2.0 : 0.0) +
                          (x == b ? r / 2.0 : 0.0);
        const std::size_t indicator = (x == 0 && a == 1 && b == 0) ? 1 : 0;
        return pa * pb * px * (y == indicator ? 1.0 : 0.0);
    });
}

/// Z ~ Bern(1/2); X = Z w.p. eps, else Bern(1/2); Y = X xor Z.
/// eps = 0 is accepted as the independent limit.
inline JointDistribution gallery_weak_edge(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorCode::ParamRange, "weak-edge family needs 0 <= eps < 1");
    return detail::binary_table({"Z", "X", "Y"}, [&](const std::vector<std::size_t>& v) {
        const std::size_t z = v[0], x = v[1], y = v[2];
        const double px = (x == z ? eps : 0.0) + (1.0 - eps) / 2.0;
        return 0.5 * px * (y == (x ^ z) ? 1.0 : 0.0);
    });
}

/// A, B ~ Bern(1/2) independent; X = A xor B w.p. 1 - 2 eps, A w.p. eps,
/// B w.p. eps. X is eps-close to independent of each parent but
/// far from independent of the pair (1 - 2 eps for eps <= 1/4).
inline JointDistribution gallery_xor(double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorCode::ParamRange, "xor family needs 0 < eps <= 1/2");
    return detail::binary_table({"A", "B", "X"}, [&](const std::vector<std::size_t>& v) {
        const std::size_t a = v[0], b = v[1], x = v[2];
        const double px = (x == (a ^ b) ? 1.0 - 2.0 * eps : 0.0) + (x == a ? eps : 0.0) + (x == b ? eps : 0.0);
        return 0.25 * px;
    });
}

inline VarSet backdoor_parents(std::size_t k) {
    VarSet out;
    for (std::size_t i = 1; i <= k; ++i) out.push_back("A" + std::to_string(i));
    return out;
}

/// Binary B -> {A1..Ak} -> X -> Y with B -> Y. Every CPT entry is drawn from
/// [0.2, 0.8]; draws are rejected until each parent of X, the B-A links and
/// the B-Y link carry a detectable dependence (Delta >= 1e-3), so Pa(X) is
/// the unique minimum blanket and {B} the minimum screening set.
inline JointDistribution gallery_backdoor(std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > 8) throw Error(ErrorCode::ParamRange, "backdoor family needs 1 <= k <= 8");
    CounterRng rng(seed);
    auto draw = [&] { return 0.2 + 0.6 * rng.uniform(); };

    std::vector<std::string> names{"B"};
    for (const auto& a : backdoor_parents(k)) names.push_back(a);
    names.push_back("X");
    names.push_back("Y");
    const VarSet parents = backdoor_parents(k);
    VarSet z = parents;
    z.insert(z.begin(), "B");

    constexpr double kDependence = 1e-3;
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const double p_b = draw();
        std::vector<std::array<double, 2>> p_a(k);
        for (auto& row : p_a) row = {draw(), draw()};
        std::vector<double> p_x(std::size_t{1} << k);
        for (double& p : p_x) p = draw();
        std::array<std::array<double, 2>, 2> p_y{};
        for (auto& row : p_y) row = {draw(), draw()};

        auto dist = detail::binary_table(names, [&](const std::vector<std::size_t>& v) {
            const std::size_t b = v[0];
            double m = detail::bern(p_b, b);
            std::size_t parent_cfg = 0;
            for (std::size_t i = 0; i < k; ++i) {
                m *= detail::bern(p_a[i][b], v[1 + i]);
                parent_cfg = (parent_cfg << 1) | v[1 + i];
            }
            const std::size_t x = v[k + 1], y = v[k + 2];
            return m * detail::bern(p_x[parent_cfg], x) * detail::bern(p_y[x][b], y);
        });

        bool ok = delta_ci(dist, {{"X"}, {"B"}, parents}) <= 1e-12 &&
                  delta_ci(dist, {{"Y"}, parents, {"X", "B"}}) <= 1e-12 &&
                  delta_ci(dist, {{"Y"}, parents, {"X"}}) >= kDependence &&
                  delta_ci(dist, {{"Y"}, {"B"}, {"X"}}) >= kDependence;
        for (std::size_t i = 0; ok && i < k; ++i) {
            VarSet rest = z;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            ok = delta_ci(dist, {{"X"}, {parents[i]}, rest}) >= kDependence &&
                 delta_ci(dist, {{parents[i]}, {"B"}, {}}) >= kDependence;
        }
        ok = ok && alpha(dist, Event{{"X", 0}}, z) >= 0.01 && alpha(dist, Event{{"X", 1}}, z) >= 0.01;
        if (ok) return dist;
    }
    throw Error(ErrorCode::ParamRange, "no admissible parameterization found for this seed");
}

/// Dense random table: cardinalities uniform in [min(2, max_card), max_card],
/// masses from a flat Dirichlet, then mixed with the uniform table so every
/// cell holds at least positivity_floor / |table|. Variables are V0, V1, ...
inline JointDistribution gallery_random(std::size_t num_vars, std::size_t max_card, std::uint64_t seed,
                                        double positivity_floor = 0.0) {
    if (num_vars < 1 || num_vars > 6) throw Error(ErrorCode::ParamRange, "random family needs 1..6 variables");
    if (max_card < 1 || max_card > 4) throw Error(ErrorCode::ParamRange, "random family needs cardinality 1..4");
    if (!(positivity_floor >= 0.0 && positivity_floor <= 1.0)) {
        throw Error(ErrorCode::ParamRange, "positivity floor must lie in [0, 1]");
    }
    CounterRng rng(seed);
    const std::size_t lo = std::min<std::size_t>(2, max_card);
    std::vector<VariableSpec> vars;
    std::size_t cells = 1;
    for (std::size_t i = 0; i < num_vars; ++i) {
        const std::size_t card = lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_card - lo + 1));
        vars.push_back({"V" + std::to_string(i), card});
        cells *= card;
    }
    std::vector<double> probs(cells);
    double total = 0.0;
    for (double& p : probs) total += (p = -std::log1p(-rng.uniform()) + 1e-300);
    const double share = positivity_floor / static_cast<double>(cells);
    for (double& p : probs) p = (1.0 - positivity_floor) * (p / total) + share;
    // Fold the rounding residue into the largest cell so the sum is 1 to the ulp.
    double sum = 0.0;
    for (double p : probs) sum += p;
    *std::max_element(probs.begin(), probs.end()) += 1.0 - sum;
    return JointDistribution(std::move(vars), std::move(probs));
}

struct GallerySpec {
    std::string family;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

inline JointDistribution make_gallery(const GallerySpec& spec) {
    auto param = [&](const std::string& key) {
        auto it = spec.params.find(key);
        if (it == spec.params.end()) throw Error(ErrorCode::Usage, spec.family + " needs parameter " + key);
        return it->second;
    };
    auto count = [&](const std::string& key) {
        const double v = param(key);
        if (!(v >= 0.0) || v != std::floor(v)) throw Error(ErrorCode::ParamRange, key + " must be a whole number");
        return static_cast<std::size_t>(v);
    };
    if (spec.family == "hardness") return gallery_hardness(param("eps"), param("alpha"));
    if (spec.family == "weak-edge") return gallery_weak_edge(param("eps"));
    if (spec.family == "xor" || spec.family == "xor-compositionality") return gallery_xor(param("eps"));
    if (spec.family == "backdoor") return gallery_backdoor(count("k"), spec.seed);
    if (spec.family == "random") {
        const auto floor_it = spec.params.find("floor");
        return gallery_random(count("vars"), count("card"), spec.seed,
                              floor_it == spec.params.end() ? 0.0 : floor_it->second);
    }
    throw Error(ErrorCode::Usage, "unknown gallery family " + spec.family);
}

}  // namespace adjustkit
