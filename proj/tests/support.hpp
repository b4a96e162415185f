#pragma once

// Reference computations for the tests. Everything here works directly on
// the flat table with maps keyed by sub-assignments and shares no code with
// the library's projection routines.

#include <adjustkit/adjustkit.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace support {

namespace ak = adjustkit;
using Key = std::vector<std::size_t>;

// Decodes flat index -> full assignment, last variable fastest.
inline Key decode(std::size_t flat, const std::vector<std::size_t>& cards) {
    Key out(cards.size());
    for (std::size_t d = cards.size(); d-- > 0;) {
        out[d] = flat % cards[d];
        flat /= cards[d];
    }
    return out;
}

inline std::vector<std::size_t> cards_of(const ak::JointDistribution& dist) {
    std::vector<std::size_t> out;
    for (const auto& v : dist.variables()) out.push_back(v.cardinality);
    return out;
}

inline std::vector<std::size_t> index_set(const ak::JointDistribution& dist, const ak::VarSet& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(dist.index_of(n));
    return out;
}

inline Key restrict(const Key& full, const std::vector<std::size_t>& idx) {
    Key out;
    for (std::size_t i : idx) out.push_back(full[i]);
    return out;
}

// Marginal table keyed by the values of `idx` (in the given order).
inline std::map<Key, double> marg(const ak::JointDistribution& dist, const std::vector<std::size_t>& idx) {
    const auto cards = cards_of(dist);
    std::map<Key, double> out;
    const auto probs = dist.probabilities();
    for (std::size_t f = 0; f < probs.size(); ++f) out[restrict(decode(f, cards), idx)] += probs[f];
    return out;
}

inline double get(const std::map<Key, double>& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
}

inline Key concat(const Key& a, const Key& b) {
    Key out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Delta: sum_{a,b,c} P(c) |P(a,b|c) - P(a|c) P(b|c)|.
inline double delta(const ak::JointDistribution& dist, const ak::VarSet& a, const ak::VarSet& b,
                    const ak::VarSet& c) {
    const auto ia = index_set(dist, a), ib = index_set(dist, b), ic = index_set(dist, c);
    const auto pabc = marg(dist, concat(concat(ia, ib), ic));
    const auto pac = marg(dist, concat(ia, ic));
    const auto pbc = marg(dist, concat(ib, ic));
    const auto pc = marg(dist, ic);
    const auto sa = marg(dist, ia), sb = marg(dist, ib);
    double total = 0.0;
    for (const auto& [kc, vc] : pc) {
        if (vc <= 0.0) continue;
        for (const auto& [ka, unused_a] : sa) {
            for (const auto& [kb, unused_b] : sb) {
                const double joint = get(pabc, concat(concat(ka, kb), kc)) / vc;
                const double fa = get(pac, concat(ka, kc)) / vc;
                const double fb = get(pbc, concat(kb, kc)) / vc;
                total += vc * std::abs(joint - fa * fb);
            }
        }
    }
    return total;
}

inline std::pair<std::vector<std::size_t>, Key> bound(const ak::JointDistribution& dist, const ak::Event& e) {
    std::vector<std::size_t> idx;
    Key vals;
    for (const auto& [name, value] : e.bindings()) {
        idx.push_back(dist.index_of(name));
        vals.push_back(value);
    }
    return {idx, vals};
}

// sum_a P(a) P(y | x, a), skipping a with P(a, x) = 0.
inline double adjustment(const ak::JointDistribution& dist, const ak::Event& x, const ak::Event& y,
                         const ak::VarSet& a) {
    const auto [ix, vx] = bound(dist, x);
    const auto [iy, vy] = bound(dist, y);
    const auto ia = index_set(dist, a);
    const auto pa = marg(dist, ia);
    const auto pxa = marg(dist, concat(ix, ia));
    const auto pyxa = marg(dist, concat(concat(iy, ix), ia));
    double total = 0.0;
    for (const auto& [ka, va] : pa) {
        const double den = get(pxa, concat(vx, ka));
        if (den <= 0.0) continue;
        total += va * get(pyxa, concat(concat(vy, vx), ka)) / den;
    }
    return total;
}

// min over a with P(a) > 0 of P(x | a).
inline double alpha(const ak::JointDistribution& dist, const ak::Event& x, const ak::VarSet& a) {
    const auto [ix, vx] = bound(dist, x);
    const auto ia = index_set(dist, a);
    const auto pa = marg(dist, ia);
    const auto pxa = marg(dist, concat(ix, ia));
    double best = 1.0;
    for (const auto& [ka, va] : pa) {
        if (va > 0.0) best = std::min(best, get(pxa, concat(vx, ka)) / va);
    }
    return best;
}

// All subsets of `pool`, each in pool order.
inline std::vector<ak::VarSet> subsets(const ak::VarSet& pool) {
    std::vector<ak::VarSet> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << pool.size()); ++mask) {
        ak::VarSet s;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (mask >> i & 1U) s.push_back(pool[i]);
        }
        out.push_back(s);
    }
    return out;
}

inline ak::VarSet minus(const ak::VarSet& a, const ak::VarSet& b) {
    ak::VarSet out;
    for (const auto& n : a) {
        if (std::find(b.begin(), b.end(), n) == b.end()) out.push_back(n);
    }
    return out;
}

inline ak::VarSet unite(const ak::VarSet& a, const ak::VarSet& b) {
    ak::VarSet out = a;
    for (const auto& n : b) {
        if (std::find(a.begin(), a.end(), n) == a.end()) out.push_back(n);
    }
    return out;
}

// Random binary Bayes net over V0..V{n-1} in topological order. Each node
// gets each earlier node as a parent with probability `edge_p`; CPT entries
// are uniform in [lo, 1 - lo]. Sparse graphs give exact independences.
inline ak::JointDistribution random_bayes_net(std::size_t n, std::uint64_t seed, double edge_p = 0.4,
                                              double lo = 0.1) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> cpt(lo, 1.0 - lo);
    std::bernoulli_distribution edge(edge_p);
    std::vector<std::vector<std::size_t>> parents(n);
    std::vector<std::vector<double>> p_one(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t u = 0; u < v; ++u) {
            if (edge(gen)) parents[v].push_back(u);
        }
        p_one[v].resize(std::size_t{1} << parents[v].size());
        for (double& p : p_one[v]) p = cpt(gen);
    }
    std::vector<ak::VariableSpec> vars;
    for (std::size_t v = 0; v < n; ++v) vars.push_back({"V" + std::to_string(v), 2});
    const std::vector<std::size_t> cards(n, 2);
    std::vector<double> probs(std::size_t{1} << n);
    for (std::size_t f = 0; f < probs.size(); ++f) {
        const auto x = decode(f, cards);
        double m = 1.0;
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t cfg = 0;
            for (std::size_t u : parents[v]) cfg = (cfg << 1) | x[u];
            m *= x[v] ? p_one[v][cfg] : 1.0 - p_one[v][cfg];
        }
        probs[f] = m;
    }
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;
    return ak::JointDistribution(std::move(vars), std::move(probs));
}

inline ak::VarSet names(const ak::JointDistribution& dist) {
    ak::VarSet out;
    for (const auto& v : dist.variables()) out.push_back(v.name);
    return out;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace support
