#pragma once

#include <string>
#include <vector>

#include "itofl/coefficients.hpp"

namespace itofl {

// Frozen copies of the published coefficient blocks, stored as exact
// rationals. The generator must reproduce every cell bit for bit; any gap is
// a correctness bug in the integration pipeline, never a tolerance matter.

struct ReferenceCell {
    std::vector<int> idx;  // full index tuple, innermost first
    Rational expected;
};

struct ReferenceBlock {
    std::string label;
    int multiplicity = 0;
    std::vector<int> bounds;  // grid bounds covering every cell
    std::vector<ReferenceCell> cells;
};

namespace detail {

// rows vary the second-innermost index, columns the innermost one
inline ReferenceBlock make_block(std::string label, const std::vector<int>& outer,
                                 const std::vector<std::vector<Rational>>& grid) {
    ReferenceBlock b;
    b.label = std::move(label);
    b.multiplicity = static_cast<int>(outer.size()) + 2;
    const int rows = static_cast<int>(grid.size());
    const int cols = static_cast<int>(grid.front().size());
    b.bounds = {cols - 1, rows - 1};
    for (int o : outer) b.bounds.push_back(o);
    for (int row = 0; row < rows; ++row)
        for (int col = 0; col < cols; ++col) {
            ReferenceCell cell;
            cell.idx = {col, row};
            for (int o : outer) cell.idx.push_back(o);
            cell.expected = grid[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
            b.cells.push_back(std::move(cell));
        }
    return b;
}

}  // namespace detail

inline const std::vector<ReferenceBlock>& published_reference_blocks() {
    auto R = [](long long n, long long d) { return Rational(n, d); };
    static const std::vector<ReferenceBlock> blocks = {
        detail::make_block(
            "triple-outer-3", {3},
            {
                {R(0, 1), R(2, 105), R(0, 1), R(-4, 315), R(0, 1), R(2, 693), R(0, 1)},
                {R(4, 105), R(0, 1), R(-2, 315), R(0, 1), R(-8, 3465), R(0, 1), R(10, 9009)},
                {R(2, 35), R(-2, 105), R(0, 1), R(4, 3465), R(0, 1), R(-74, 45045), R(0, 1)},
                {R(2, 315), R(0, 1), R(-2, 3465), R(0, 1), R(16, 45045), R(0, 1), R(-10, 9009)},
                {R(-2, 63), R(46, 3465), R(0, 1), R(-32, 45045), R(0, 1), R(2, 9009), R(0, 1)},
                {R(-10, 693), R(0, 1), R(38, 9009), R(0, 1), R(-4, 9009), R(0, 1), R(122, 765765)},
                {R(0, 1), R(-10, 3003), R(0, 1), R(20, 9009), R(0, 1), R(-226, 765765), R(0, 1)},
            }),
        detail::make_block("quad-outer-1-2", {1, 2},
                           {
                               {R(2, 21), R(-2, 45), R(2, 315)},
                               {R(2, 315), R(2, 315), R(-2, 225)},
                               {R(-2, 105), R(2, 225), R(2, 1155)},
                           }),
        detail::make_block("quint-outer-1-0-1", {1, 0, 1},
                           {
                               {R(4, 315), R(0, 1)},
                               {R(4, 315), R(-8, 945)},
                           }),
    };
    return blocks;
}

struct TableMismatch {
    std::string block;
    std::vector<int> idx;
    Rational expected;
    Rational computed;
};

// Recomputes every frozen cell from scratch; empty result means the generator
// reproduces all blocks exactly.
inline std::vector<TableMismatch> verify_reference_blocks() {
    std::vector<TableMismatch> out;
    for (const ReferenceBlock& b : published_reference_blocks()) {
        CoefficientGrid grid(WeightSpec::unit(b.multiplicity), b.bounds);
        for (const ReferenceCell& cell : b.cells) {
            const Rational& got = grid.cbar_at(cell.idx);
            if (got != cell.expected) out.push_back({b.label, cell.idx, cell.expected, got});
        }
    }
    return out;
}

inline std::int64_t reference_cell_count() {
    std::int64_t n = 0;
    for (const ReferenceBlock& b : published_reference_blocks())
        n += static_cast<std::int64_t>(b.cells.size());
    return n;
}

}  // namespace itofl
