#include "cdsu/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cdsu {

SequentialDSU::SequentialDSU(Node n, SeqLink link, SeqCompaction compaction)
    : link_(link), compaction_(compaction), parent_(n), rank_(n, 0) {
    if (n == 0) throw std::invalid_argument("oracle: element count must be positive");
    std::iota(parent_.begin(), parent_.end(), Node{0});
    if (link_ == SeqLink::size) rank_.assign(n, 1);
}

SequentialDSU::SequentialDSU(std::vector<Node> parents, SeqLink link, SeqCompaction compaction)
    : link_(link), compaction_(compaction), parent_(std::move(parents)),
      rank_(parent_.size(), link == SeqLink::size ? 1 : 0) {
    if (parent_.empty()) throw std::invalid_argument("oracle: element count must be positive");
    partition_of_parents(parent_);  // validates acyclicity
}

Node SequentialDSU::root_of(Node x) {
    Node u = x;
    visits_++;
    while (parent_[u] != u) {
        u = parent_[u];
        visits_++;
    }
    return u;
}

void SequentialDSU::compact(Node x, Node root) {
    switch (compaction_) {
        case SeqCompaction::none:
            return;
        case SeqCompaction::compression: {
            Node u = x;
            while (parent_[u] != root && parent_[u] != u) {
                Node next = parent_[u];
                parent_[u] = root;
                u = next;
            }
            return;
        }
        case SeqCompaction::splitting: {
            // every node on the path points to its grandparent
            Node u = x;
            while (parent_[parent_[u]] != parent_[u]) {
                Node next = parent_[u];
                parent_[u] = parent_[next];
                u = next;
            }
            return;
        }
        case SeqCompaction::halving: {
            // every other node, starting with x
            Node u = x;
            while (parent_[parent_[u]] != parent_[u]) {
                parent_[u] = parent_[parent_[u]];
                u = parent_[u];
            }
            return;
        }
    }
}

Node SequentialDSU::find(Node x) {
    if (x >= parent_.size()) throw std::invalid_argument("oracle find: node out of range");
    Node root = root_of(x);
    compact(x, root);
    return root;
}

void SequentialDSU::unite(Node x, Node y) {
    Node u = find(x);
    Node v = find(y);
    if (u == v) return;
    switch (link_) {
        case SeqLink::rank:
            if (rank_[u] > rank_[v]) std::swap(u, v);
            if (rank_[u] == rank_[v]) rank_[v]++;
            parent_[u] = v;
            return;
        case SeqLink::size:
            if (rank_[u] > rank_[v]) std::swap(u, v);
            rank_[v] += rank_[u];
            parent_[u] = v;
            return;
        case SeqLink::index:
            if (u < v)
                parent_[u] = v;
            else
                parent_[v] = u;
            return;
    }
}

// ---------------------------------------------------------------------------
// partitions
// ---------------------------------------------------------------------------

PartitionSummary partition_of_parents(const std::vector<Node>& parents) {
    const Node n = static_cast<Node>(parents.size());
    // root of each node, then minimum index per root
    std::vector<Node> root(n);
    for (Node x = 0; x < n; x++) {
        Node u = x;
        Node guard = 0;
        while (parents[u] != u) {
            u = parents[u];
            if (++guard > n) throw std::invalid_argument("partition: parent array has a cycle");
        }
        root[x] = u;
    }
    std::vector<Node> min_label(n, n);
    for (Node x = 0; x < n; x++) min_label[root[x]] = std::min(min_label[root[x]], x);
    PartitionSummary s;
    s.label.resize(n);
    for (Node x = 0; x < n; x++) s.label[x] = min_label[root[x]];
    return s;
}

PartitionSummary partition_of_edges(Node n, std::span<const std::pair<Node, Node>> edges) {
    // brute-force components via a plain sequential union-find
    SequentialDSU dsu(n, SeqLink::rank, SeqCompaction::compression);
    for (auto [a, b] : edges) dsu.unite(a, b);
    std::vector<Node> parents(n);
    for (Node x = 0; x < n; x++) parents[x] = dsu.find(x);
    return partition_of_parents(parents);
}

PartitionSummary partition_by_label_propagation(Node n,
                                                std::span<const std::pair<Node, Node>> edges) {
    PartitionSummary s;
    s.label.resize(n);
    std::iota(s.label.begin(), s.label.end(), Node{0});
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [a, b] : edges) {
            Node m = std::min(s.label[a], s.label[b]);
            if (s.label[a] != m) { s.label[a] = m; changed = true; }
            if (s.label[b] != m) { s.label[b] = m; changed = true; }
        }
    }
    // propagate through label chains until fixpoint labels are canonical
    changed = true;
    while (changed) {
        changed = false;
        for (Node x = 0; x < n; x++) {
            if (s.label[x] != s.label[s.label[x]]) {
                s.label[x] = s.label[s.label[x]];
                changed = true;
            }
        }
    }
    return s;
}

CheckResult check_partition(const ForestSnapshot& snapshot,
                            std::span<const std::pair<Node, Node>> unite_pairs) {
    const Node n = static_cast<Node>(snapshot.parents.size());
    PartitionSummary actual;
    try {
        actual = partition_of_parents(snapshot.parents);
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
    PartitionSummary expected = partition_of_edges(n, unite_pairs);
    if (actual == expected) return {};
    for (Node x = 0; x < n; x++) {
        if (actual.label[x] != expected.label[x])
            return {false, "node " + std::to_string(x) + ": tree label " +
                               std::to_string(actual.label[x]) + ", component label " +
                               std::to_string(expected.label[x])};
    }
    return {false, "partition mismatch"};
}

// ---------------------------------------------------------------------------
// linearization replay
// ---------------------------------------------------------------------------

ReplayResult replay_linearization(std::span<const OpRecord> records, Node n) {
    std::vector<size_t> order(records.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return records[a].lin_stamp < records[b].lin_stamp;
    });
    for (size_t i = 0; i + 1 < order.size(); i++) {
        if (records[order[i]].lin_stamp == records[order[i + 1]].lin_stamp)
            return {false, i, "duplicate linearization timestamps"};
    }
    for (size_t i = 0; i < order.size(); i++) {
        const auto& r = records[order[i]];
        if (!(r.invoke_stamp <= r.lin_stamp && r.lin_stamp <= r.response_stamp))
            return {false, i, "linearization point outside the operation's window"};
    }

    SequentialDSU dsu(n, SeqLink::rank, SeqCompaction::compression);
    for (size_t i = 0; i < order.size(); i++) {
        const auto& r = records[order[i]];
        switch (r.kind) {
            case OpKind::find: {
                // the returned representative must lie in the queried node's
                // set at the linearization instant
                if (dsu.find(r.a) != dsu.find(static_cast<Node>(r.answer)))
                    return {false, i,
                            "find(" + std::to_string(r.a) + ") returned " +
                                std::to_string(r.answer) + " outside its set"};
                break;
            }
            case OpKind::same_set: {
                const bool expected = dsu.find(r.a) == dsu.find(r.b);
                if (expected != (r.answer != 0))
                    return {false, i,
                            "same-set(" + std::to_string(r.a) + "," + std::to_string(r.b) +
                                ") answered " + (r.answer ? "true" : "false") +
                                " against the replayed state"};
                break;
            }
            case OpKind::unite: {
                if (!r.linked && dsu.find(r.a) != dsu.find(r.b))
                    return {false, i,
                            "unite(" + std::to_string(r.a) + "," + std::to_string(r.b) +
                                ") made no link but its sets were separate"};
                dsu.unite(r.a, r.b);
                break;
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

OracleOutput oracle_run(Node n, SeqLink link, SeqCompaction compaction,
                        std::span<const OpSpec> ops) {
    SequentialDSU dsu(n, link, compaction);
    OracleOutput out;
    out.answers.reserve(ops.size());
    for (const auto& op : ops) {
        switch (op.kind) {
            case OpKind::find: out.answers.push_back(dsu.find(op.a)); break;
            case OpKind::same_set: out.answers.push_back(dsu.same_set(op.a, op.b) ? 1 : 0); break;
            case OpKind::unite:
                dsu.unite(op.a, op.b);
                out.answers.push_back(dsu.find(op.a));
                break;
        }
    }
    std::vector<Node> parents(n);
    for (Node x = 0; x < n; x++) parents[x] = dsu.find(x);
    out.partition = partition_of_parents(parents);
    out.visits = dsu.visits();
    return out;
}

RankStats check_rank_stats(std::span<const std::vector<uint32_t>> rank_snapshots, uint32_t k,
                           Node n) {
    if (rank_snapshots.size() < 2)
        throw std::invalid_argument("rank stats: need at least two seeded runs");
    RankStats st;
    std::vector<double> counts;
    counts.reserve(rank_snapshots.size());
    for (const auto& ranks : rank_snapshots) {
        uint64_t c = 0;
        for (uint32_t r : ranks) {
            if (r >= k) c++;
            st.max_rank_seen = std::max(st.max_rank_seen, r);
        }
        counts.push_back(static_cast<double>(c));
    }
    const double s = std::accumulate(counts.begin(), counts.end(), 0.0);
    st.mean = s / static_cast<double>(counts.size());
    double var = 0;
    for (double c : counts) var += (c - st.mean) * (c - st.mean);
    var /= static_cast<double>(counts.size() - 1);
    st.stderr_mean = std::sqrt(var / static_cast<double>(counts.size()));
    st.bound = static_cast<double>(n) / std::pow(2.0, static_cast<double>(k));
    st.within = st.mean <= st.bound + 3.0 * st.stderr_mean;
    return st;
}

}  // namespace cdsu
