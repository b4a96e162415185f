#pragma once

#include <adjustkit/detail/table.hpp>
#include <adjustkit/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace adjustkit {

inline constexpr std::size_t kMaxVariables = 25;
inline constexpr std::size_t kMaxCells = std::size_t{1} << 26;
inline constexpr double kNormalizationTolerance = 1e-12;

struct VariableSpec {
    std::string name;
    std::size_t cardinality = 1;

    friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

/// A set of variables, referenced by name. Order carries no meaning; the
/// library canonicalizes to declaration order wherever order matters.
using VarSet = std::vector<std::string>;

/// Partial assignment: variable name -> category index.
class Event {
public:
    Event() = default;
    Event(std::initializer_list<std::pair<std::string, std::size_t>> bindings) {
        for (const auto& [name, value] : bindings) bind(name, value);
    }

    Event& bind(const std::string& name, std::size_t value) {
        if (!bindings_.emplace(name, value).second) {
            throw Error(ErrorCode::InvalidQuery, "variable bound twice in event: " + name);
        }
        return *this;
    }

    const std::map<std::string, std::size_t>& bindings() const noexcept { return bindings_; }
    bool empty() const noexcept { return bindings_.empty(); }
    std::size_t size() const noexcept { return bindings_.size(); }

    VarSet variables() const {
        VarSet names;
        names.reserve(bindings_.size());
        for (const auto& [name, value] : bindings_) names.push_back(name);
        return names;
    }

    friend bool operator==(const Event&, const Event&) = default;

private:
    std::map<std::string, std::size_t> bindings_;
};

namespace detail {

inline void validate_variables(std::span<const VariableSpec> variables) {
    if (variables.size() > kMaxVariables) {
        throw Error(ErrorCode::TooLarge, "at most " + std::to_string(kMaxVariables) +
                                             " variables are supported, got " +
                                             std::to_string(variables.size()));
    }
    std::unordered_set<std::string> seen;
    std::size_t cells = 1;
    for (const auto& v : variables) {
        if (v.name.empty()) throw Error(ErrorCode::ShapeMismatch, "variable with empty name");
        if (v.cardinality < 1) {
            throw Error(ErrorCode::ShapeMismatch, "variable " + v.name + " has cardinality 0");
        }
        if (!seen.insert(v.name).second) {
            throw Error(ErrorCode::ShapeMismatch, "duplicate variable name " + v.name);
        }
        if (v.cardinality > kMaxCells || cells > kMaxCells / v.cardinality) {
            throw Error(ErrorCode::TooLarge, "table exceeds 2^26 cells");
        }
        cells *= v.cardinality;
    }
}

}  // namespace detail

/// Throws NEGATIVE_MASS, NOT_NORMALIZED or SHAPE_MISMATCH (or TOO_LARGE for
/// the size caps) unless the table is a valid joint distribution.
inline void validate(std::span<const VariableSpec> variables, std::span<const double> probabilities) {
    detail::validate_variables(variables);
    std::size_t cells = 1;
    for (const auto& v : variables) cells *= v.cardinality;
    if (probabilities.size() != cells) {
        throw Error(ErrorCode::ShapeMismatch, "table has " + std::to_string(probabilities.size()) +
                                                  " entries, variables imply " + std::to_string(cells));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        if (!(p >= 0.0) || !std::isfinite(p)) {
            std::ostringstream msg;
            msg << "entry " << i << " has mass " << p;
            throw Error(ErrorCode::NegativeMass, msg.str());
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << total << " (deviation " << total - 1.0 << ")";
        throw Error(ErrorCode::NotNormalized, msg.str());
    }
}

/// Dense probability table over an ordered list of finite variables.
/// Immutable; every instance satisfies `validate`.
class JointDistribution {
public:
    JointDistribution(std::vector<VariableSpec> variables, std::vector<double> probabilities)
        : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
        validate(variables_, probabilities_);
        init_cards();
    }

    const std::vector<VariableSpec>& variables() const noexcept { return variables_; }
    std::span<const double> probabilities() const noexcept { return probabilities_; }
    std::span<const std::size_t> cardinalities() const noexcept { return cards_; }
    std::size_t size() const noexcept { return probabilities_.size(); }

    bool contains(const std::string& name) const noexcept {
        return std::any_of(variables_.begin(), variables_.end(),
                           [&](const VariableSpec& v) { return v.name == name; });
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i].name == name) return i;
        }
        throw Error(ErrorCode::UnknownVariable, "unknown variable " + name);
    }

    /// Positions of `names`, sorted by declaration order. Rejects duplicates.
    std::vector<std::size_t> positions(const VarSet& names) const {
        std::vector<std::size_t> out;
        out.reserve(names.size());
        for (const auto& name : names) out.push_back(index_of(name));
        std::sort(out.begin(), out.end());
        if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
            throw Error(ErrorCode::InvalidQuery, "variable listed twice in a set");
        }
        return out;
    }

    std::size_t alphabet_size(const VarSet& names) const {
        std::size_t size = 1;
        for (std::size_t p : positions(names)) size *= cards_[p];
        return size;
    }

    friend bool operator==(const JointDistribution& a, const JointDistribution& b) {
        return a.variables_ == b.variables_ && a.probabilities_ == b.probabilities_;
    }

private:
    struct Derived {};

    // Tables computed from a valid distribution or from counts: the shape is
    // trusted and the sum is exact up to rounding, so only the shape is kept.
    JointDistribution(Derived, std::vector<VariableSpec> variables, std::vector<double> probabilities)
        : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
        init_cards();
    }

    void init_cards() {
        cards_.clear();
        for (const auto& v : variables_) cards_.push_back(v.cardinality);
    }

    friend JointDistribution make_derived(std::vector<VariableSpec>, std::vector<double>);

    std::vector<VariableSpec> variables_;
    std::vector<double> probabilities_;
    std::vector<std::size_t> cards_;
};

inline JointDistribution make_derived(std::vector<VariableSpec> variables, std::vector<double> probabilities) {
    return JointDistribution(JointDistribution::Derived{}, std::move(variables), std::move(probabilities));
}

inline void validate(const JointDistribution& dist) {
    validate(dist.variables(), dist.probabilities());
}

/// Marginal over `names`, variables kept in declaration order.
inline JointDistribution marginal(const JointDistribution& dist, const VarSet& names) {
    const auto pos = dist.positions(names);
    std::vector<VariableSpec> vars;
    for (std::size_t p : pos) vars.push_back(dist.variables()[p]);
    return make_derived(std::move(vars), detail::project(dist.cardinalities(), dist.probabilities(), pos));
}

namespace detail {

struct BoundEvent {
    std::vector<std::size_t> positions;
    std::vector<std::size_t> values;
};

/// Resolves an event against a variable list; positions in declaration order.
template <typename Lookup>
BoundEvent bind_event(const Event& event, std::span<const std::size_t> cards, Lookup&& index_of) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [name, value] : event.bindings()) {
        const std::size_t p = index_of(name);
        if (value >= cards[p]) {
            throw Error(ErrorCode::InvalidQuery, "value " + std::to_string(value) + " out of range for " + name);
        }
        pairs.emplace_back(p, value);
    }
    std::sort(pairs.begin(), pairs.end());
    BoundEvent out;
    for (const auto& [p, v] : pairs) {
        out.positions.push_back(p);
        out.values.push_back(v);
    }
    return out;
}

inline BoundEvent bind_event(const JointDistribution& dist, const Event& event) {
    return bind_event(event, dist.cardinalities(), [&](const std::string& n) { return dist.index_of(n); });
}

}  // namespace detail

/// P(event).
inline double probability(const JointDistribution& dist, const Event& event) {
    const auto bound = detail::bind_event(dist, event);
    const auto table = detail::project(dist.cardinalities(), dist.probabilities(), bound.positions);
    return table[detail::sub_index(dist.cardinalities(), bound.positions, bound.values)];
}

/// P(target | given). Throws ZERO_CONDITION when P(given) = 0.
inline double conditional_prob(const JointDistribution& dist, const Event& target, const Event& given) {
    for (const auto& [name, value] : target.bindings()) {
        if (given.bindings().count(name)) {
            throw Error(ErrorCode::InvalidQuery, "target and condition both bind " + name);
        }
    }
    const double p_given = probability(dist, given);
    if (p_given <= 0.0) throw Error(ErrorCode::ZeroCondition, "conditioning event has probability 0");
    Event joint = given;
    for (const auto& [name, value] : target.bindings()) joint.bind(name, value);
    return probability(dist, joint) / p_given;
}

}  // namespace adjustkit
