#pragma once

#include <cstdint>
#include <string>

#include "cdsu/forest.hpp"

namespace cdsu {

enum class OpKind : uint8_t { find, unite, same_set };

const char* to_string(OpKind k);

// One queued set operation.
struct OpSpec {
    OpKind kind = OpKind::find;
    Node a = 0;
    Node b = 0;  // unused for find
};

// Invocation, response and linearization data for one completed operation,
// collected in verification runs and replayed through the sequential oracle.
struct OpRecord {
    OpKind kind = OpKind::find;
    Node a = 0;
    Node b = 0;
    uint64_t answer = 0;       // root for find, boolean for same-set, root for unite
    bool linked = false;       // unite only: this call's link took effect
    int proc = 0;
    uint64_t invoke_stamp = 0;
    uint64_t response_stamp = 0;
    uint64_t lin_stamp = 0;
};

// Results the operation coroutines return. `lin` is the stamp of the
// operation's linearization point (0 when not in verify mode).
struct FindResult {
    Node root = 0;
    uint64_t lin = 0;
};

struct LinkResult {
    bool linked = false;    // a parent change attributable to this call took effect
    uint64_t lin = 0;       // stamp of that parent change
    Node child = 0;         // the node this call tried to make a child
    Node target = 0;
};

struct OpResult {
    uint64_t answer = 0;
    uint64_t lin = 0;
    bool linked = false;
};

}  // namespace cdsu
