#pragma once

#include "fsard/config.hpp"

#include <vector>

namespace fsard::cli {

/// One published optimum: for framed schemes the reported (gamma*, M*) and AAoI,
/// for slotted ALOHA only the AAoI.
struct ReferenceCell {
    char table;          // 'a': N = 30, rho swept; 'b': rho = 0.04, N swept
    Scheme scheme;
    int users;
    int mini_slots;      // 0 for slotted ALOHA
    double rho;
    double gamma;        // 0 for slotted ALOHA
    int frame_size;      // 0 for slotted ALOHA
    double aaoi;
};

inline std::vector<ReferenceCell> reference_cells() {
    constexpr auto rd = Scheme::fsa_rd;
    constexpr auto one = Scheme::fsa_rd_one;
    constexpr auto aloha = Scheme::slotted_aloha;
    return {
        // N = 30
        {'a', rd, 30, 4, 0.01, 0.82, 2, 105.55},   {'a', rd, 30, 4, 0.02, 0.38, 2, 72.38},
        {'a', rd, 30, 4, 0.04, 0.20, 3, 70.25},    {'a', rd, 30, 4, 0.08, 0.16, 3, 70.16},
        {'a', rd, 30, 4, 0.1, 0.15, 3, 70.15},     {'a', rd, 30, 6, 0.01, 1, 2, 104.37},
        {'a', rd, 30, 6, 0.02, 0.85, 3, 60.75},    {'a', rd, 30, 6, 0.04, 0.35, 3, 56.53},
        {'a', rd, 30, 6, 0.08, 0.25, 3, 56.45},    {'a', rd, 30, 6, 0.1, 0.24, 3, 56.45},
        {'a', rd, 30, 8, 0.01, 1, 3, 104.16},      {'a', rd, 30, 8, 0.02, 1, 3, 57.84},
        {'a', rd, 30, 8, 0.04, 0.50, 3, 51.38},    {'a', rd, 30, 8, 0.08, 0.34, 3, 51.32},
        {'a', rd, 30, 8, 0.1, 0.32, 3, 52.30},     {'a', one, 30, 4, 0.01, 1, 3, 131.16},
        {'a', one, 30, 4, 0.02, 1, 3, 86.46},      {'a', one, 30, 4, 0.04, 1, 3, 70.74},
        {'a', one, 30, 4, 0.08, 0.6025, 3, 70.18}, {'a', one, 30, 4, 0.1, 0.4920, 3, 70.16},
        {'a', one, 30, 6, 0.01, 1, 3, 124.06},     {'a', one, 30, 6, 0.02, 1, 3, 78.74},
        {'a', one, 30, 6, 0.04, 1, 3, 60.42},      {'a', one, 30, 6, 0.08, 0.9037, 3, 56.47},
        {'a', one, 30, 6, 0.1, 0.7380, 3, 56.46},  {'a', one, 30, 8, 0.01, 1, 3, 120.82},
        {'a', one, 30, 8, 0.02, 1, 4, 74.55},      {'a', one, 30, 8, 0.04, 1, 4, 55.67},
        {'a', one, 30, 8, 0.08, 0.9403, 4, 51.37}, {'a', one, 30, 8, 0.1, 0.9840, 3, 51.32},
        {'a', aloha, 30, 0, 0.01, 0, 0, 110.14},   {'a', aloha, 30, 0, 0.02, 0, 0, 82.55},
        {'a', aloha, 30, 0, 0.04, 0, 0, 81.30},    {'a', aloha, 30, 0, 0.08, 0, 0, 80.22},
        {'a', aloha, 30, 0, 0.1, 0, 0, 80.12},
        // rho = 0.04
        {'b', rd, 10, 4, 0.04, 1, 2, 30.58},       {'b', rd, 20, 4, 0.04, 0.4, 3, 47.71},
        {'b', rd, 40, 4, 0.04, 0.13, 3, 93.14},    {'b', rd, 50, 4, 0.04, 0.10, 3, 116.02},
        {'b', rd, 10, 6, 0.04, 1, 3, 29.77},       {'b', rd, 20, 6, 0.04, 0.77, 3, 38.89},
        {'b', rd, 40, 6, 0.04, 0.22, 3, 74.67},    {'b', rd, 50, 6, 0.04, 0.16, 3, 92.84},
        {'b', rd, 10, 8, 0.04, 1, 3, 29.45},       {'b', rd, 20, 8, 0.04, 1, 3, 35.78},
        {'b', rd, 40, 8, 0.04, 0.51, 3, 67.73},    {'b', rd, 50, 8, 0.04, 0.22, 3, 84.12},
        {'b', one, 10, 4, 0.04, 1, 3, 37.40},      {'b', one, 20, 4, 0.04, 1, 3, 52.12},
        {'b', one, 40, 4, 0.04, 0.8676, 3, 93.12}, {'b', one, 50, 4, 0.04, 0.6941, 3, 116.04},
        {'b', one, 10, 6, 0.04, 1, 3, 35.12},      {'b', one, 20, 6, 0.04, 1, 3, 46.63},
        {'b', one, 40, 6, 0.04, 1, 3, 75.89},      {'b', one, 50, 6, 0.04, 1, 3, 92.90},
        {'b', one, 10, 8, 0.04, 1, 3, 34.09},      {'b', one, 20, 8, 0.04, 1, 4, 43.89},
        {'b', one, 40, 8, 0.04, 1, 4, 69.19},      {'b', one, 50, 8, 0.04, 1, 4, 84.23},
        {'b', aloha, 10, 0, 0.04, 0, 0, 31.63},    {'b', aloha, 20, 0, 0.04, 0, 0, 53.72},
        {'b', aloha, 40, 0, 0.04, 0, 0, 107.66},   {'b', aloha, 50, 0, 0.04, 0, 0, 136.97},
    };
}

} // namespace fsard::cli
