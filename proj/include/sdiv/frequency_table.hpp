#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace sdiv {

using Support = std::uint64_t;

struct Cell {
    Support x;
    std::uint64_t count;
};

/// Sparse observed counts over {0, 1, 2, ...}. Absent keys are empty cells.
/// Cells are kept sorted by support point; every stored count is positive.
class FrequencyTable {
public:
    FrequencyTable() = default;

    /// Throws NonPositiveCount on a zero count and std::invalid_argument when
    /// the table would be empty.
    explicit FrequencyTable(const std::map<Support, std::uint64_t>& counts);

    /// Aggregates raw observations.
    static FrequencyTable from_observations(std::span<const Support> xs);

    std::uint64_t n() const noexcept { return n_; }
    std::span<const Cell> cells() const noexcept { return cells_; }
    std::size_t distinct() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }

    std::uint64_t count(Support x) const;
    double relative(Support x) const;
    Support max_support() const;
    double mean() const;

    /// True if some x in [0, upto] has no observation.
    bool has_empty_cell_upto(Support upto) const;

    std::map<Support, std::uint64_t> to_map() const;

    friend bool operator==(const FrequencyTable& a, const FrequencyTable& b);

private:
    std::vector<Cell> cells_;
    std::uint64_t n_ = 0;
};

bool operator==(const Cell& a, const Cell& b);

}  // namespace sdiv
