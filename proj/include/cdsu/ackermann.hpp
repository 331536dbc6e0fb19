#pragma once

#include <cstdint>
#include <optional>

// Ackermann arithmetic, inverse-Ackermann, problem density and the node
// potentials used by the work-accounting diagnostics and the acceptance
// yardsticks. Everything here is a pure function.

namespace cdsu {

// Results are capped: values that would exceed kAckermannCap are reported
// as "out of range" (nullopt). alpha() treats an out-of-range value as
// larger than any node count, which is the only way callers consume it.
inline constexpr uint64_t kAckermannCap = uint64_t{1} << 62;

enum class Splitting { none, one_try, two_try, conditional_two_try };

const char* to_string(Splitting s);

struct WorkBoundParams {
    uint64_t n = 0;  // element count
    uint64_t m = 0;  // operation count
    uint64_t p = 0;  // process count
    Splitting splitting = Splitting::none;

    // The standing assumption 2 <= p <= n <= m. Callers that cannot satisfy
    // it (tiny smoke tests) still get well-defined values; the harness warns.
    bool satisfies_standing_assumption() const { return 2 <= p && p <= n && n <= m; }
};

struct NodePotential {
    uint64_t level = 0;  // min k with A_k(rank) > parent_rank
    uint64_t index = 0;  // max i with A_level(i) <= parent_rank
    uint64_t count = 0;  // rank * level + index
};

// A_k(n) with the three-case recursion. nullopt means the value exceeds
// kAckermannCap.
std::optional<uint64_t> ackermann(uint64_t k, uint64_t n);

// Smallest k > 0 such that A_k(floor(d)) > n.
uint64_t alpha(uint64_t n, double d);

// m/(np) for two-try and conditional splitting, m/(np^2) for one-try.
// Throws std::invalid_argument for Splitting::none: density is undefined
// for uncompacted finds.
double density(const WorkBoundParams& params);

// m * (alpha(n, d) + lg(1 + 1/d)) with constant 1; used only for ratio
// reporting, never as a proof.
double work_bound(const WorkBoundParams& params);

// Level/index/count of a high node with the given rank whose parent has
// rank parent_rank. Requires parent_rank >= rank and rank >= ceil(d).
NodePotential node_potential(uint64_t rank, uint64_t parent_rank, uint64_t n, double d);

}  // namespace cdsu
