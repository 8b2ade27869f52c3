#include "efid/sim.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace efid {

namespace {

DropReason to_drop_reason(Verdict v) {
    return v == Verdict::StaleEpoch ? DropReason::StaleEpoch : DropReason::BadTag;
}

struct Traversal {
    std::uint32_t edge;
    std::uint32_t depth;   // hop count including this traversal
};

// Expand a packet from a set of first traversals. UE nodes consume; transit
// nodes re-run the forwarding check until the TTL bites.
void propagate(const Topology& topo, const ForwardingId& fid,
               const std::vector<Traversal>& first, std::uint32_t ttl,
               const std::set<std::uint32_t>* tree_edges, DeliveryReport& report) {
    std::deque<Traversal> queue(first.begin(), first.end());
    std::set<std::string> reached;
    while (!queue.empty()) {
        const auto [e, depth] = queue.front();
        queue.pop_front();
        ++report.hops_traversed;
        if (tree_edges && !tree_edges->contains(e))
            report.false_positive_traversals.push_back(e);
        const auto v = topo.edge(e).dst;
        const auto& node = topo.node(v);
        if (!forwards(node.role)) {
            reached.insert(node.id);
            continue;
        }
        if (depth >= ttl)
            continue;
        for (auto out : fw_forward(fid, topo, v, e))
            queue.push_back({out, depth + 1});
    }
    report.actual.assign(reached.begin(), reached.end());
}

Credential tamper_credential(Credential cred, std::uint32_t m_bits, std::uint32_t tag_bits,
                             std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "tamper");
    const auto pos = static_cast<std::uint32_t>(rng.below(m_bits + tag_bits));
    if (pos < m_bits)
        cred.efid.bytes[pos / 8] ^= static_cast<std::uint8_t>(1u << (pos % 8));
    else
        cred.tag ^= std::uint64_t{1} << (pos - m_bits);
    return cred;
}

DeliveryReport run_tree_flow(const Topology& topo, std::string_view pub,
                             const std::vector<std::string>& subs, const MasterKeys& keys,
                             const SimOptions& opts) {
    if (subs.empty())
        throw std::invalid_argument("flow needs at least one subscriber");

    // Delivery tree: union of the per-subscriber shortest paths.
    std::set<std::uint32_t> tree_edges;
    std::vector<std::uint32_t> first_edges;
    for (const auto& sub : subs) {
        const Path path = compute_path(topo, pub, sub);
        first_edges.push_back(path.edge_indices.front());
        tree_edges.insert(path.edge_indices.begin(), path.edge_indices.end());
    }
    std::vector<LinkId> lids;
    for (auto e : tree_edges)
        lids.push_back(topo.edge(e).lid);
    const ForwardingId fid = build_fid(lids, topo.params());

    DeliveryReport report;
    report.intended.assign(subs.begin(), subs.end());
    std::sort(report.intended.begin(), report.intended.end());
    report.intended.erase(std::unique(report.intended.begin(), report.intended.end()),
                          report.intended.end());
    report.path_len = static_cast<std::uint32_t>(tree_edges.size());

    Credential cred = issue_credential(fid, keys, opts.tag_bits);
    if (opts.tamper)
        cred = tamper_credential(std::move(cred), topo.params().m, opts.tag_bits, opts.seed);

    // Publisher -> NAP leg. All per-subscriber paths leave through the
    // publisher's single attachment edge.
    const std::uint32_t ingress_edge = first_edges.front();
    const std::uint32_t nap = topo.edge(ingress_edge).dst;
    Packet pkt{cred, {}, true};

    report.hops_traversed = 1;   // the attachment leg
    const ForwardDecision decision = nap_ingress(pkt, keys, topo, nap, ingress_edge, opts);
    report.security_checks = decision.security_checks;
    if (decision.rejected()) {
        report.drop = decision.drop;
        report.delivered = false;
        return report;
    }

    const std::uint32_t ttl = 2 * topo.diameter();
    std::vector<Traversal> first;
    for (auto e : decision.egress)
        first.push_back({e, 2});   // attachment leg was hop 1
    propagate(topo, *decision.fid, first, ttl, &tree_edges, report);

    report.delivered = std::includes(report.actual.begin(), report.actual.end(),
                                     report.intended.begin(), report.intended.end());
    return report;
}

} // namespace

ForwardDecision nap_ingress(const Packet& pkt, const MasterKeys& keys, const Topology& topo,
                            std::uint32_t nap, std::optional<std::uint32_t> arrival_edge,
                            const SimOptions& opts) {
    if (!pkt.ingress)
        throw std::logic_error("nap_ingress requires an ingress-flagged packet");
    if (!forwards(topo.node(nap).role))
        throw std::invalid_argument("ingress node " + topo.node(nap).id +
                                    " cannot forward packets");

    ForwardDecision decision;
    ForwardingId fid{BitVec(topo.params().m)};
    if (pkt.carries_credential()) {
        decision.security_checks = 1;
        const CheckResult check =
            security_check(std::get<Credential>(pkt.header), keys, opts.tag_bits);
        if (!check.accepted()) {
            decision.drop = to_drop_reason(check.verdict);
            return decision;
        }
        fid = *check.fid;
    } else {
        fid = std::get<ForwardingId>(pkt.header);
    }

    if (opts.enforce_max_fill && fill_factor(fid) > topo.params().rho_max) {
        decision.drop = DropReason::MaxFillExceeded;
        return decision;
    }

    decision.egress = fw_forward(fid, topo, nap, arrival_edge);
    decision.fid = std::move(fid);
    return decision;
}

std::vector<std::uint32_t> fw_forward(const ForwardingId& fid, const Topology& topo,
                                      std::uint32_t node,
                                      std::optional<std::uint32_t> arrival_edge) {
    std::vector<std::uint32_t> egress;
    const std::uint32_t none = ~std::uint32_t{0};
    const std::uint32_t suppressed = arrival_edge ? topo.edge(*arrival_edge).reverse : none;
    for (auto e : topo.node(node).out_edges) {
        if (e == suppressed)
            continue;
        if (membership_check(fid, topo.edge(e).lid))
            egress.push_back(e);
    }
    return egress;
}

DeliveryReport run_flow(const Topology& topo, std::string_view pub, std::string_view sub,
                        const MasterKeys& keys, const SimOptions& opts) {
    return run_tree_flow(topo, pub, {std::string(sub)}, keys, opts);
}

DeliveryReport run_flow_multi(const Topology& topo, std::string_view pub,
                              const std::vector<std::string>& subs, const MasterKeys& keys,
                              const SimOptions& opts) {
    return run_tree_flow(topo, pub, subs, keys, opts);
}

std::string flow_csv_header() {
    return "flow_id,pub,sub,path_len,delivered,false_positive_links,hops";
}

std::string flow_csv_row(std::uint64_t flow_id, std::string_view pub, std::string_view sub,
                         const DeliveryReport& report) {
    std::string out;
    out += std::to_string(flow_id);
    out += ',';
    out += pub;
    out += ',';
    out += sub;
    out += ',';
    out += std::to_string(report.path_len);
    out += ',';
    out += report.delivered ? "true" : "false";
    out += ',';
    out += std::to_string(report.false_positive_traversals.size());
    out += ',';
    out += std::to_string(report.hops_traversed);
    return out;
}

InjectionOutcome inject_packet(const Topology& topo, std::uint32_t nap,
                               std::optional<std::uint32_t> arrival_edge, const Packet& pkt,
                               const MasterKeys& keys, const SimOptions& opts) {
    InjectionOutcome outcome;
    const ForwardDecision decision = nap_ingress(pkt, keys, topo, nap, arrival_edge, opts);
    outcome.security_checks = decision.security_checks;
    outcome.hops_traversed = 1;
    if (decision.rejected())
        return outcome;
    outcome.ingress_accepted = true;

    DeliveryReport scratch;
    scratch.hops_traversed = outcome.hops_traversed;
    const std::uint32_t ttl = 2 * topo.diameter();
    std::vector<Traversal> first;
    for (auto e : decision.egress)
        first.push_back({e, 2});
    propagate(topo, *decision.fid, first, ttl, nullptr, scratch);
    outcome.delivered = std::move(scratch.actual);
    outcome.hops_traversed = scratch.hops_traversed;
    return outcome;
}

} // namespace efid
