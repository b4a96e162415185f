#pragma once

#include <adjustkit/detail/table.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace adjustkit {

enum class SamplingMode { FixedN, Poissonized };

struct Provenance {
    SamplingMode mode = SamplingMode::FixedN;
    /// Requested size: n for fixed-n, the Poisson mean for poissonized draws.
    std::size_t requested = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Rows of full assignments over an ordered variable list. Immutable.
class SampleDataset {
public:
    SampleDataset(std::vector<VariableSpec> variables, std::vector<std::uint32_t> cells,
                  Provenance provenance = {}, std::uint64_t seed = 0)
        : variables_(std::move(variables)), cells_(std::move(cells)),
          provenance_(provenance), seed_(seed) {
        detail::validate_variables(variables_);
        for (const auto& v : variables_) cards_.push_back(v.cardinality);
        const std::size_t width = variables_.size();
        if (width == 0 ? !cells_.empty() : cells_.size() % width != 0) {
            throw Error(ErrorCode::ShapeMismatch, "cell count is not a multiple of the row width");
        }
        rows_ = width == 0 ? 0 : cells_.size() / width;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (cells_[i] >= cards_[i % width]) {
                throw Error(ErrorCode::OutOfRange,
                            "row " + std::to_string(i / width) + ": index " + std::to_string(cells_[i]) +
                                " out of range for " + variables_[i % width].name);
            }
        }
        if (provenance_.mode == SamplingMode::FixedN && provenance_.requested == 0) {
            provenance_.requested = rows_;
        }
    }

    const std::vector<VariableSpec>& variables() const noexcept { return variables_; }
    std::span<const std::size_t> cardinalities() const noexcept { return cards_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t width() const noexcept { return variables_.size(); }
    bool empty() const noexcept { return rows_ == 0; }
    const Provenance& provenance() const noexcept { return provenance_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const std::uint32_t> row(std::size_t i) const noexcept {
        return std::span<const std::uint32_t>(cells_).subspan(i * width(), width());
    }
    std::span<const std::uint32_t> cells() const noexcept { return cells_; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i].name == name) return i;
        }
        throw Error(ErrorCode::UnknownVariable, "unknown variable " + name);
    }

    std::vector<std::size_t> positions(const VarSet& names) const {
        std::vector<std::size_t> out;
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

    friend bool operator==(const SampleDataset& a, const SampleDataset& b) {
        return a.variables_ == b.variables_ && a.cells_ == b.cells_;
    }

private:
    std::vector<VariableSpec> variables_;
    std::vector<std::size_t> cards_;
    std::vector<std::uint32_t> cells_;
    std::size_t rows_ = 0;
    Provenance provenance_;
    std::uint64_t seed_ = 0;
};

namespace detail {

/// Draws `n` rows by inverse CDF over the flat table.
inline std::vector<std::uint32_t> draw_rows(const JointDistribution& dist, std::size_t n, CounterRng& rng) {
    const auto probs = dist.probabilities();
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);

    const auto cards = dist.cardinalities();
    const std::size_t width = cards.size();
    std::vector<std::uint32_t> cells(n * width);
    for (std::size_t r = 0; r < n; ++r) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t flat = static_cast<std::size_t>(it - cdf.begin());
        // upper_bound can land past the end only through rounding; fall back
        // to the last cell with positive mass.
        if (flat >= probs.size()) flat = probs.size() - 1;
        while (probs[flat] == 0.0 && flat > 0) --flat;
        for (std::size_t d = width; d-- > 0;) {
            cells[r * width + d] = static_cast<std::uint32_t>(flat % cards[d]);
            flat /= cards[d];
        }
    }
    return cells;
}

/// Count table over `positions` (in that order), row-major.
inline std::vector<double> count_table(const SampleDataset& data, std::span<const std::size_t> positions) {
    const auto cards = data.cardinalities();
    std::vector<double> counts(1, 0.0);
    std::size_t size = 1;
    for (std::size_t p : positions) size *= cards[p];
    counts.assign(size, 0.0);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        std::size_t index = 0;
        for (std::size_t p : positions) index = index * cards[p] + row[p];
        counts[index] += 1.0;
    }
    return counts;
}

}  // namespace detail

/// n i.i.d. rows from `dist`; deterministic in (dist, n, seed).
inline SampleDataset sample(const JointDistribution& dist, std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    return SampleDataset(dist.variables(), detail::draw_rows(dist, n, rng),
                         Provenance{SamplingMode::FixedN, n}, seed);
}

/// Number of rows matching every binding of `event`.
inline std::size_t count(const SampleDataset& data, const Event& event) {
    const auto bound = detail::bind_event(event, data.cardinalities(),
                                          [&](const std::string& n) { return data.index_of(n); });
    std::size_t matches = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        bool hit = true;
        for (std::size_t i = 0; i < bound.positions.size() && hit; ++i) {
            hit = row[bound.positions[i]] == bound.values[i];
        }
        matches += hit ? 1 : 0;
    }
    return matches;
}

/// Empirical distribution of the rows restricted to `names` (declaration order).
inline JointDistribution empirical_distribution(const SampleDataset& data, const VarSet& names) {
    if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    const auto pos = data.positions(names);
    auto table = detail::count_table(data, pos);
    const double n = static_cast<double>(data.rows());
    for (double& c : table) c /= n;
    std::vector<VariableSpec> vars;
    for (std::size_t p : pos) vars.push_back(data.variables()[p]);
    return make_derived(std::move(vars), std::move(table));
}

}  // namespace adjustkit
