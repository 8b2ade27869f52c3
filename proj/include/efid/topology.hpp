/*
 * Single-domain network model: nodes with roles, directed edges with
 * LinkIds (both directions always present), shortest-path computation and
 * the document format the CLI loads.
 *
 * Topology documents are JSON:
 *
 *   {
 *     "params": {"m": 256, "k": 5, "rho_max": 0.5},
 *     "seed": 7,
 *     "nodes": [{"id": "pub1", "role": "PUB"}, ...],
 *     "links": [{"a": "pub1", "b": "nap1"},
 *               {"a": "nap1", "b": "fw1", "lid_ab": "<hex>", "lid_ba": "<hex>"}]
 *   }
 *
 * Links are physical (bidirectional); each direction gets its own LinkId,
 * either given as hex or derived deterministically from the document seed.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "efid/filter.hpp"

namespace efid {

enum class Role { Pub, Sub, Nap, Fw, Tm };

const char* role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

// Whether packets transit this node (UE endpoints consume, they never relay).
constexpr bool forwards(Role r) {
    return r == Role::Nap || r == Role::Fw || r == Role::Tm;
}

struct Node {
    std::string id;
    Role role;
    std::vector<std::uint32_t> out_edges;   // sorted by destination id
};

struct Edge {
    std::uint32_t src;
    std::uint32_t dst;
    std::uint32_t reverse;                  // index of the opposite direction
    LinkId lid;
};

class TopologyError : public std::runtime_error {
public:
    explicit TopologyError(const std::vector<std::string>& diagnostics);
    std::vector<std::string> diagnostics;
};

class Unreachable : public std::runtime_error {
public:
    Unreachable(const std::string& from, const std::string& to);
};

class Topology {
public:
    const FilterParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Node& node(std::uint32_t i) const { return nodes_[i]; }
    const Edge& edge(std::uint32_t i) const { return edges_[i]; }

    std::optional<std::uint32_t> find_node(std::string_view id) const;
    std::uint32_t node_index(std::string_view id) const;   // throws on miss

    // Longest finite hop distance in the domain; packets get a TTL of twice
    // this so false-positive wandering terminates.
    std::uint32_t diameter() const { return diameter_; }

    std::vector<std::uint32_t> node_indices_with_role(Role r) const;

private:
    friend class TopologyBuilder;
    FilterParams params_{8, 1, 1.0};
    std::uint64_t seed_ = 0;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::uint32_t diameter_ = 0;
};

class TopologyBuilder {
public:
    TopologyBuilder(FilterParams params, std::uint64_t seed);

    TopologyBuilder& add_node(std::string id, Role role);
    // Adds both directions; empty hex means "derive from the document seed".
    TopologyBuilder& add_link(const std::string& a, const std::string& b,
                              std::string lid_ab_hex = {}, std::string lid_ba_hex = {});

    // Validates every domain invariant and reports all violations at once.
    Topology build();

private:
    struct PendingLink {
        std::string a, b;
        std::string lid_ab, lid_ba;
    };

    FilterParams params_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, Role>> nodes_;
    std::vector<PendingLink> links_;
};

// Parse and validate a topology document (see the format above).
Topology load_topology(const std::string& json_text);

struct Path {
    std::vector<std::uint32_t> edge_indices;   // consecutive, pub to sub

    std::uint32_t length() const { return static_cast<std::uint32_t>(edge_indices.size()); }
};

// Shortest directed path from a publisher to a subscriber, routed through
// forwarding-capable nodes only. Equal-length alternatives resolve to the
// smallest next-node id. Throws Unreachable.
Path compute_path(const Topology& topo, std::string_view pub, std::string_view sub);

// OR of the path's edge LinkIds; inherits the fill-factor cap.
ForwardingId build_path_fid(const Topology& topo, const Path& path);

// Hop count from `from` to `to` through forwarding nodes, if connected.
std::optional<std::uint32_t> hop_distance(const Topology& topo, std::uint32_t from,
                                          std::uint32_t to);

// attacker(PUB) - nap - fw... - victim(SUB) with `l` hops between the NAP and
// the victim; the synthetic scenario used by attack campaigns.
Topology make_chain_topology(const FilterParams& params, std::uint64_t seed, std::uint32_t l);

// Random connected domain: a core of NAP/FW nodes (random tree plus chords)
// with publishers and subscribers attached to NAPs.
Topology make_random_topology(const FilterParams& params, std::uint64_t seed,
                              std::uint32_t n_nodes);

} // namespace efid
