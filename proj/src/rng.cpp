#include "sdiv/rng.hpp"

#include <bit>

namespace sdiv {

std::uint64_t data_cell_key(std::uint64_t n, double theta) {
    return splitmix64(n) ^ splitmix64(std::bit_cast<std::uint64_t>(theta) + 0x632be59bd9b4e019ULL);
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t cell_key, std::uint64_t replicate) {
    return splitmix64(splitmix64(splitmix64(base_seed) ^ cell_key) ^ replicate);
}

}  // namespace sdiv
