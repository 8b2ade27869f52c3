#include "efid/topology.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace efid {

namespace {

std::string join_diagnostics(const std::vector<std::string>& diags) {
    std::ostringstream os;
    os << "invalid topology (" << diags.size() << " problem"
       << (diags.size() == 1 ? "" : "s") << "):";
    for (const auto& d : diags)
        os << "\n  - " << d;
    return os.str();
}

LinkId derive_lid(const FilterParams& params, std::uint64_t seed, const std::string& src,
                  const std::string& dst, std::uint64_t attempt = 0) {
    Rng rng = Rng::stream(seed, "lid/" + src + "->" + dst, attempt);
    return new_link_id(params, rng);
}

} // namespace

const char* role_name(Role r) {
    switch (r) {
    case Role::Pub: return "PUB";
    case Role::Sub: return "SUB";
    case Role::Nap: return "NAP";
    case Role::Fw: return "FW";
    case Role::Tm: return "TM";
    }
    return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
    if (name == "PUB") return Role::Pub;
    if (name == "SUB") return Role::Sub;
    if (name == "NAP") return Role::Nap;
    if (name == "FW") return Role::Fw;
    if (name == "TM") return Role::Tm;
    return std::nullopt;
}

TopologyError::TopologyError(const std::vector<std::string>& diags)
    : std::runtime_error(join_diagnostics(diags)), diagnostics(diags) {}

Unreachable::Unreachable(const std::string& from, const std::string& to)
    : std::runtime_error("no path from " + from + " to " + to) {}

std::optional<std::uint32_t> Topology::find_node(std::string_view id) const {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].id == id)
            return i;
    return std::nullopt;
}

std::uint32_t Topology::node_index(std::string_view id) const {
    if (auto i = find_node(id))
        return *i;
    throw std::invalid_argument("unknown node id: " + std::string(id));
}

std::vector<std::uint32_t> Topology::node_indices_with_role(Role r) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].role == r)
            out.push_back(i);
    return out;
}

TopologyBuilder::TopologyBuilder(FilterParams params, std::uint64_t seed)
    : params_(params), seed_(seed) {}

TopologyBuilder& TopologyBuilder::add_node(std::string id, Role role) {
    nodes_.emplace_back(std::move(id), role);
    return *this;
}

TopologyBuilder& TopologyBuilder::add_link(const std::string& a, const std::string& b,
                                           std::string lid_ab_hex, std::string lid_ba_hex) {
    links_.push_back({a, b, std::move(lid_ab_hex), std::move(lid_ba_hex)});
    return *this;
}

Topology TopologyBuilder::build() {
    std::vector<std::string> diags;
    Topology topo;
    topo.params_ = params_;
    topo.seed_ = seed_;

    std::map<std::string, std::uint32_t> index_of;
    for (const auto& [id, role] : nodes_) {
        if (id.empty()) {
            diags.push_back("node with empty id");
            continue;
        }
        if (index_of.contains(id)) {
            diags.push_back("duplicate node id: " + id);
            continue;
        }
        index_of[id] = static_cast<std::uint32_t>(topo.nodes_.size());
        topo.nodes_.push_back(Node{id, role, {}});
    }

    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (std::size_t li = 0; li < links_.size(); ++li) {
        const auto& link = links_[li];
        const std::string where = "links[" + std::to_string(li) + "]";
        if (!index_of.contains(link.a) || !index_of.contains(link.b)) {
            diags.push_back(where + ": unknown endpoint " +
                            (!index_of.contains(link.a) ? link.a : link.b));
            continue;
        }
        if (link.a == link.b) {
            diags.push_back(where + ": self-loop at " + link.a);
            continue;
        }
        auto key = std::minmax(link.a, link.b);
        if (!seen_pairs.insert(key).second) {
            diags.push_back(where + ": duplicate link " + link.a + " -- " + link.b);
            continue;
        }

        auto make_lid = [&](const std::string& hex, const std::string& src,
                            const std::string& dst) -> std::optional<LinkId> {
            if (hex.empty())
                return derive_lid(params_, seed_, src, dst);
            try {
                return LinkId(BitVec::from_hex(hex, params_.m), params_);
            } catch (const std::exception& e) {
                diags.push_back(where + "." + (src == link.a ? "lid_ab" : "lid_ba") + ": " +
                                e.what());
                return std::nullopt;
            }
        };
        auto lid_ab = make_lid(link.lid_ab, link.a, link.b);
        auto lid_ba = make_lid(link.lid_ba, link.b, link.a);
        if (!lid_ab || !lid_ba)
            continue;
        if (*lid_ab == *lid_ba) {
            // Derived identifiers must come out distinct; redraw the derived
            // side deterministically. Two identical explicit ones are a
            // document error.
            if (link.lid_ba.empty() || link.lid_ab.empty()) {
                const bool redraw_ba = link.lid_ba.empty();
                for (std::uint64_t attempt = 1; *lid_ab == *lid_ba; ++attempt) {
                    if (redraw_ba)
                        lid_ba = derive_lid(params_, seed_, link.b, link.a, attempt);
                    else
                        lid_ab = derive_lid(params_, seed_, link.a, link.b, attempt);
                }
            } else {
                diags.push_back(where + ": both directions carry the same LinkId");
                continue;
            }
        }

        const auto ai = index_of[link.a], bi = index_of[link.b];
        const auto e_ab = static_cast<std::uint32_t>(topo.edges_.size());
        const auto e_ba = e_ab + 1;
        topo.edges_.push_back(Edge{ai, bi, e_ba, std::move(*lid_ab)});
        topo.edges_.push_back(Edge{bi, ai, e_ab, std::move(*lid_ba)});
        topo.nodes_[ai].out_edges.push_back(e_ab);
        topo.nodes_[bi].out_edges.push_back(e_ba);
    }

    // UE attachment rule: publishers and subscribers hang off exactly one NAP.
    for (const auto& node : topo.nodes_) {
        if (node.role != Role::Pub && node.role != Role::Sub)
            continue;
        if (node.out_edges.size() != 1) {
            diags.push_back("node " + node.id + " (" + role_name(node.role) +
                            ") must attach to exactly one NAP, has " +
                            std::to_string(node.out_edges.size()) + " links");
            continue;
        }
        const auto& peer = topo.nodes_[topo.edges_[node.out_edges[0]].dst];
        if (peer.role != Role::Nap)
            diags.push_back("node " + node.id + " (" + role_name(node.role) +
                            ") attaches to " + peer.id + " (" + role_name(peer.role) +
                            "), expected a NAP");
    }

    if (!diags.empty())
        throw TopologyError(diags);

    for (auto& node : topo.nodes_)
        std::sort(node.out_edges.begin(), node.out_edges.end(),
                  [&](std::uint32_t x, std::uint32_t y) {
                      const auto& dx = topo.nodes_[topo.edges_[x].dst].id;
                      const auto& dy = topo.nodes_[topo.edges_[y].dst].id;
                      return dx != dy ? dx < dy : x < y;
                  });

    // Diameter over the forwarding-constrained reachability.
    std::uint32_t best = 0;
    for (std::uint32_t s = 0; s < topo.nodes_.size(); ++s) {
        std::vector<std::int64_t> dist(topo.nodes_.size(), -1);
        std::deque<std::uint32_t> queue;
        dist[s] = 0;
        queue.push_back(s);
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            if (u != s && !forwards(topo.nodes_[u].role))
                continue;   // endpoints receive but do not relay
            for (auto e : topo.nodes_[u].out_edges) {
                const auto v = topo.edges_[e].dst;
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (auto d : dist)
            if (d > best)
                best = static_cast<std::uint32_t>(d);
    }
    topo.diameter_ = best;
    return topo;
}

Topology load_topology(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw TopologyError({std::string("parse error: ") + e.what()});
    }

    std::vector<std::string> diags;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok)
            diags.push_back(msg);
        return ok;
    };

    if (!require(doc.is_object(), "document root must be an object") ||
        !require(doc.contains("params") && doc["params"].is_object(),
                 "missing or invalid 'params' object") ||
        !require(doc.contains("nodes") && doc["nodes"].is_array(),
                 "missing or invalid 'nodes' array") ||
        !require(doc.contains("links") && doc["links"].is_array(),
                 "missing or invalid 'links' array"))
        throw TopologyError(diags);

    const auto& jp = doc["params"];
    std::optional<FilterParams> params;
    try {
        params.emplace(jp.value("m", 0u), jp.value("k", 0u), jp.value("rho_max", 0.0));
    } catch (const std::exception& e) {
        diags.push_back(std::string("params: ") + e.what());
    }
    const std::uint64_t seed = doc.value("seed", 0ull);
    if (!diags.empty())
        throw TopologyError(diags);

    TopologyBuilder builder(*params, seed);
    for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
        const auto& jn = doc["nodes"][i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (!jn.is_object() || !jn.contains("id") || !jn.contains("role")) {
            diags.push_back(where + ": need {id, role}");
            continue;
        }
        const std::string id = jn["id"].is_string() ? jn["id"].get<std::string>() : "";
        const std::string role_str =
            jn["role"].is_string() ? jn["role"].get<std::string>() : "";
        auto role = role_from_name(role_str);
        if (id.empty() || !role) {
            diags.push_back(where + ": bad id or role '" + role_str +
                            "' (want PUB|SUB|NAP|FW|TM)");
            continue;
        }
        builder.add_node(id, *role);
    }
    for (std::size_t i = 0; i < doc["links"].size(); ++i) {
        const auto& jl = doc["links"][i];
        const std::string where = "links[" + std::to_string(i) + "]";
        if (!jl.is_object() || !jl.contains("a") || !jl.contains("b") ||
            !jl["a"].is_string() || !jl["b"].is_string()) {
            diags.push_back(where + ": need {a, b}");
            continue;
        }
        builder.add_link(jl["a"].get<std::string>(), jl["b"].get<std::string>(),
                         jl.value("lid_ab", std::string{}), jl.value("lid_ba", std::string{}));
    }
    if (!diags.empty())
        throw TopologyError(diags);
    return builder.build();
}

namespace {

// Hop distances to `target` through forwarding nodes, -1 where unreachable.
std::vector<std::int64_t> dist_to(const Topology& topo, std::uint32_t target) {
    std::vector<std::int64_t> dist(topo.nodes().size(), -1);
    std::deque<std::uint32_t> queue;
    dist[target] = 0;
    queue.push_back(target);
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        // Walking backwards over an edge u->v means u relays, so u must be
        // forwarding-capable (sources are handled by the caller).
        for (auto e : topo.nodes()[v].out_edges) {
            const auto rev = topo.edge(e).reverse;
            const auto u = topo.edge(rev).src;
            if (dist[u] < 0 && forwards(topo.nodes()[u].role)) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

} // namespace

Path compute_path(const Topology& topo, std::string_view pub, std::string_view sub) {
    const auto pi = topo.node_index(pub);
    const auto si = topo.node_index(sub);
    if (topo.nodes()[pi].role != Role::Pub)
        throw std::invalid_argument("node " + std::string(pub) + " is not a publisher");
    if (topo.nodes()[si].role != Role::Sub)
        throw std::invalid_argument("node " + std::string(sub) + " is not a subscriber");

    const auto dist = dist_to(topo, si);

    // The publisher's only link leads to its NAP.
    std::int64_t pub_dist = -1;
    for (auto e : topo.nodes()[pi].out_edges) {
        const auto v = topo.edge(e).dst;
        if (dist[v] >= 0)
            pub_dist = dist[v] + 1;
    }
    if (pub_dist < 0)
        throw Unreachable(std::string(pub), std::string(sub));

    Path path;
    std::uint32_t cur = pi;
    std::int64_t remaining = pub_dist;
    while (cur != si) {
        std::optional<std::uint32_t> chosen;
        for (auto e : topo.nodes()[cur].out_edges) {   // sorted by dst id
            const auto v = topo.edge(e).dst;
            if (dist[v] == remaining - 1 && (forwards(topo.nodes()[v].role) || v == si)) {
                chosen = e;
                break;
            }
        }
        if (!chosen)
            throw Unreachable(std::string(pub), std::string(sub));
        path.edge_indices.push_back(*chosen);
        cur = topo.edge(*chosen).dst;
        --remaining;
    }
    return path;
}

ForwardingId build_path_fid(const Topology& topo, const Path& path) {
    std::vector<LinkId> lids;
    lids.reserve(path.edge_indices.size());
    for (auto e : path.edge_indices)
        lids.push_back(topo.edge(e).lid);
    return build_fid(lids, topo.params());
}

std::optional<std::uint32_t> hop_distance(const Topology& topo, std::uint32_t from,
                                          std::uint32_t to) {
    const auto dist = dist_to(topo, to);
    if (from < dist.size() && dist[from] >= 0)
        return static_cast<std::uint32_t>(dist[from]);
    return std::nullopt;
}

Topology make_chain_topology(const FilterParams& params, std::uint64_t seed, std::uint32_t l) {
    if (l < 1)
        throw std::invalid_argument("chain needs at least one hop past the NAP");
    TopologyBuilder b(params, seed);
    b.add_node("att", Role::Pub);
    b.add_node("nap", Role::Nap);
    b.add_node("dst", Role::Sub);
    std::string prev = "nap";
    b.add_link("att", "nap");
    // The victim hangs off its own NAP; everything in between is plain FW.
    for (std::uint32_t i = 1; i < l; ++i) {
        const bool last = i == l - 1;
        const std::string id = last ? "napz" : "fw" + std::to_string(i);
        b.add_node(id, last ? Role::Nap : Role::Fw);
        b.add_link(prev, id);
        prev = id;
    }
    b.add_link(prev, "dst");
    return b.build();
}

Topology make_random_topology(const FilterParams& params, std::uint64_t seed,
                              std::uint32_t n_nodes) {
    if (n_nodes < 4)
        throw std::invalid_argument("need at least 4 nodes (pub, sub, and a core)");
    Rng rng = Rng::stream(seed, "random-topology");

    const std::uint32_t n_ue = std::max<std::uint32_t>(2, n_nodes / 3);
    const std::uint32_t n_core = n_nodes - n_ue;
    const std::uint32_t n_nap = std::max<std::uint32_t>(1, n_core / 3);

    TopologyBuilder b(params, seed);
    std::vector<std::string> core_ids, nap_ids;
    for (std::uint32_t i = 0; i < n_core; ++i) {
        const bool is_nap = i < n_nap;
        const std::string id = (is_nap ? "nap" : "fw") + std::to_string(i);
        b.add_node(id, is_nap ? Role::Nap : Role::Fw);
        core_ids.push_back(id);
        if (is_nap)
            nap_ids.push_back(id);
    }
    // Random spanning tree over the core, then chords for density.
    std::set<std::pair<std::string, std::string>> linked;
    auto link_once = [&](const std::string& a, const std::string& c) {
        auto key = std::minmax(a, c);
        if (a != c && linked.insert(key).second)
            b.add_link(a, c);
    };
    for (std::uint32_t i = 1; i < n_core; ++i)
        link_once(core_ids[i], core_ids[rng.below(i)]);
    const std::uint32_t chords = n_core / 2;
    for (std::uint32_t c = 0; c < chords; ++c)
        link_once(core_ids[rng.below(n_core)], core_ids[rng.below(n_core)]);

    const std::uint32_t n_pub = n_ue / 2, n_sub = n_ue - n_pub;
    for (std::uint32_t i = 0; i < n_pub; ++i) {
        const std::string id = "pub" + std::to_string(i);
        b.add_node(id, Role::Pub);
        b.add_link(id, nap_ids[rng.below(nap_ids.size())]);
    }
    for (std::uint32_t i = 0; i < n_sub; ++i) {
        const std::string id = "sub" + std::to_string(i);
        b.add_node(id, Role::Sub);
        b.add_link(id, nap_ids[rng.below(nap_ids.size())]);
    }
    return b.build();
}

} // namespace efid
