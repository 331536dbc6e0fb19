#include "cdsu/ackermann.hpp"

#include <cmath>
#include <stdexcept>

namespace cdsu {

const char* to_string(Splitting s) {
    switch (s) {
        case Splitting::none: return "none";
        case Splitting::one_try: return "one-try";
        case Splitting::two_try: return "two-try";
        case Splitting::conditional_two_try: return "cond-two-try";
    }
    return "?";
}

namespace {

std::optional<uint64_t> checked(uint64_t v) {
    if (v > kAckermannCap) return std::nullopt;
    return v;
}

}  // namespace

std::optional<uint64_t> ackermann(uint64_t k, uint64_t n) {
    // Rows 0..2 in closed form so that higher rows do not fold quadratically:
    // A_0(n) = n + 1, A_1(n) = n + 2, A_2(n) = 2n + 3.
    switch (k) {
        case 0: return checked(n + 1);
        case 1: return checked(n + 2);
        case 2:
            if (n > (kAckermannCap - 3) / 2) return std::nullopt;
            return checked(2 * n + 3);
        default: break;
    }
    // A_k(n) = A_{k-1} folded n+1 times starting from 1. For k >= 3 the
    // iterate at least doubles each round, so the cap is reached within a
    // few dozen folds and the recursion stays shallow.
    uint64_t value = 1;
    for (uint64_t i = 0; i <= n; i++) {
        auto next = ackermann(k - 1, value);
        if (!next) return std::nullopt;
        value = *next;
    }
    return value;
}

uint64_t alpha(uint64_t n, double d) {
    if (d < 0) throw std::invalid_argument("alpha: density must be non-negative");
    const auto floor_d = static_cast<uint64_t>(std::floor(d));
    for (uint64_t k = 1;; k++) {
        auto v = ackermann(k, floor_d);
        if (!v || *v > n) return k;  // out of range counts as > n
    }
}

double density(const WorkBoundParams& params) {
    if (params.n == 0 || params.m == 0 || params.p == 0)
        throw std::invalid_argument("density: n, m, p must be positive");
    const double n = static_cast<double>(params.n);
    const double m = static_cast<double>(params.m);
    const double p = static_cast<double>(params.p);
    switch (params.splitting) {
        case Splitting::two_try:
        case Splitting::conditional_two_try:
            return m / (n * p);
        case Splitting::one_try:
            return m / (n * p * p);
        case Splitting::none:
            break;
    }
    throw std::invalid_argument("density undefined for uncompacted finds");
}

double work_bound(const WorkBoundParams& params) {
    const double d = density(params);
    const double a = static_cast<double>(alpha(params.n, d));
    return static_cast<double>(params.m) * (a + std::log2(1.0 + 1.0 / d));
}

NodePotential node_potential(uint64_t rank, uint64_t parent_rank, uint64_t n, double d) {
    if (rank > parent_rank)
        throw std::invalid_argument("node_potential: rank exceeds parent rank");
    if (static_cast<double>(rank) < std::ceil(d))
        throw std::invalid_argument("node_potential: node is not high for this density");
    (void)n;

    NodePotential pot;
    // level = min k with A_k(rank) > parent_rank; k = 0 iff ranks are equal.
    for (uint64_t k = 0;; k++) {
        auto v = ackermann(k, rank);
        if (!v || *v > parent_rank) {
            pot.level = k;
            break;
        }
    }
    // index = max i with A_level(i) <= parent_rank. A_level(0) <= parent_rank
    // always holds here (see the level bound), so the scan starts at 1.
    uint64_t i = 1;
    for (;; i++) {
        auto v = ackermann(pot.level, i);
        if (!v || *v > parent_rank) break;
    }
    pot.index = i - 1;
    pot.count = rank * pot.level + pot.index;
    return pot;
}

}  // namespace cdsu
