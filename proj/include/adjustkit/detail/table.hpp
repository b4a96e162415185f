#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adjustkit::detail {

/// Mixed-radix row-major layout, last axis fastest.
inline std::size_t table_size(std::span<const std::size_t> cards) {
    std::size_t size = 1;
    for (std::size_t c : cards) size *= c;
    return size;
}

/// Sums `mass` (laid out over `cards`) onto the axes listed in `positions`,
/// in that order. The result is laid out row-major over those axes.
inline std::vector<double> project(std::span<const std::size_t> cards,
                                   std::span<const double> mass,
                                   std::span<const std::size_t> positions) {
    std::vector<std::size_t> coef(cards.size(), 0);
    std::size_t sub_size = 1;
    for (std::size_t i = positions.size(); i-- > 0;) {
        coef[positions[i]] = sub_size;
        sub_size *= cards[positions[i]];
    }

    std::vector<double> out(sub_size, 0.0);
    std::vector<std::size_t> digits(cards.size(), 0);
    std::size_t sub = 0;
    for (std::size_t flat = 0; flat < mass.size(); ++flat) {
        out[sub] += mass[flat];
        for (std::size_t d = cards.size(); d-- > 0;) {
            if (++digits[d] < cards[d]) {
                sub += coef[d];
                break;
            }
            sub -= coef[d] * (cards[d] - 1);
            digits[d] = 0;
        }
    }
    return out;
}

/// Index of a (partial) assignment within the sub-table over `positions`.
inline std::size_t sub_index(std::span<const std::size_t> cards,
                             std::span<const std::size_t> positions,
                             std::span<const std::size_t> values) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        index = index * cards[positions[i]] + values[i];
    }
    return index;
}

/// Splits a flat index over `cards` into its digits.
inline std::vector<std::size_t> decode(std::span<const std::size_t> cards, std::size_t flat) {
    std::vector<std::size_t> digits(cards.size(), 0);
    for (std::size_t d = cards.size(); d-- > 0;) {
        digits[d] = flat % cards[d];
        flat /= cards[d];
    }
    return digits;
}

}  // namespace adjustkit::detail
