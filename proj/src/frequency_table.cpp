#include "sdiv/frequency_table.hpp"

#include <algorithm>
#include <stdexcept>

#include "sdiv/errors.hpp"

namespace sdiv {

FrequencyTable::FrequencyTable(const std::map<Support, std::uint64_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("frequency table needs at least one cell");
    cells_.reserve(counts.size());
    for (const auto& [x, c] : counts) {
        if (c == 0) throw NonPositiveCount(x, 0);
        cells_.push_back({x, c});
        n_ += c;
    }
}

FrequencyTable FrequencyTable::from_observations(std::span<const Support> xs) {
    std::map<Support, std::uint64_t> counts;
    for (Support x : xs) ++counts[x];
    return FrequencyTable(counts);
}

std::uint64_t FrequencyTable::count(Support x) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), x,
                               [](const Cell& c, Support v) { return c.x < v; });
    return (it != cells_.end() && it->x == x) ? it->count : 0;
}

double FrequencyTable::relative(Support x) const {
    return n_ == 0 ? 0.0 : static_cast<double>(count(x)) / static_cast<double>(n_);
}

Support FrequencyTable::max_support() const { return cells_.empty() ? 0 : cells_.back().x; }

double FrequencyTable::mean() const {
    if (n_ == 0) return 0.0;
    double s = 0.0;
    for (const auto& c : cells_) s += static_cast<double>(c.x) * static_cast<double>(c.count);
    return s / static_cast<double>(n_);
}

bool FrequencyTable::has_empty_cell_upto(Support upto) const {
    // cells_ is sorted and unique, so [0, upto] is fully covered iff the
    // number of cells with x <= upto equals upto + 1.
    auto end = std::upper_bound(cells_.begin(), cells_.end(), upto,
                                [](Support v, const Cell& c) { return v < c.x; });
    return static_cast<Support>(end - cells_.begin()) != upto + 1;
}

std::map<Support, std::uint64_t> FrequencyTable::to_map() const {
    std::map<Support, std::uint64_t> m;
    for (const auto& c : cells_) m.emplace(c.x, c.count);
    return m;
}

bool operator==(const Cell& a, const Cell& b) { return a.x == b.x && a.count == b.count; }

bool operator==(const FrequencyTable& a, const FrequencyTable& b) {
    return a.n_ == b.n_ && a.cells_ == b.cells_;
}

}  // namespace sdiv
