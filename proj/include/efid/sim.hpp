/*
 * Packet pipeline for one domain.
 *
 * A publisher's packet carries its credential to the attachment node; the
 * NAP verifies it once, swaps the header for the plaintext forwarding
 * identifier, and every node from there on runs only the per-edge
 * membership check. Copies never return over their arrival edge, and a TTL
 * of twice the topology diameter bounds false-positive wandering.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "efid/secure.hpp"
#include "efid/topology.hpp"

namespace efid {

struct Packet {
    // Credential on the publisher->NAP leg, plaintext FId afterwards.
    std::variant<Credential, ForwardingId> header;
    std::vector<std::uint8_t> payload;
    bool ingress = false;   // set when arriving on a user-facing interface

    bool carries_credential() const { return std::holds_alternative<Credential>(header); }
};

struct SimOptions {
    std::uint32_t tag_bits = 64;
    // Optional NAP policy: drop packets whose forwarding identifier is
    // fuller than rho_max (defeats the all-ones guessing strategy). Off by
    // default.
    bool enforce_max_fill = false;
    bool tamper = false;        // flip one credential bit before ingress
    std::uint64_t seed = 0;
};

enum class DropReason { BadTag, StaleEpoch, MaxFillExceeded };

struct ForwardDecision {
    std::optional<DropReason> drop;             // nullopt == forwarded
    std::vector<std::uint32_t> egress;          // edge indices out of the NAP
    std::optional<ForwardingId> fid;            // header after the swap
    std::uint32_t security_checks = 0;

    bool rejected() const { return drop.has_value(); }
};

// Ingress processing at a NAP: the security check (for credential packets),
// the header swap, then the forwarding check over each outgoing interface.
// Plain-FId packets skip straight to the forwarding check, which is the
// unprotected baseline behaviour.
ForwardDecision nap_ingress(const Packet& pkt, const MasterKeys& keys, const Topology& topo,
                            std::uint32_t nap, std::optional<std::uint32_t> arrival_edge,
                            const SimOptions& opts = {});

// Forwarding check at a transit node: every outgoing edge whose LinkId is a
// subset of the header, minus the reverse of the arrival edge.
std::vector<std::uint32_t> fw_forward(const ForwardingId& fid, const Topology& topo,
                                      std::uint32_t node,
                                      std::optional<std::uint32_t> arrival_edge);

struct DeliveryReport {
    std::vector<std::string> intended;                     // sorted node ids
    std::vector<std::string> actual;                       // sorted node ids
    std::vector<std::uint32_t> false_positive_traversals;  // off-tree edge uses
    std::uint64_t hops_traversed = 0;
    std::uint32_t path_len = 0;
    std::uint32_t security_checks = 0;
    std::optional<DropReason> drop;
    bool delivered = false;   // every intended subscriber reached
};

// Full unicast flow: path computation, credential issuance, publisher send,
// NAP ingress and hop-by-hop forwarding. Throws Unreachable and
// FillFactorExceeded.
DeliveryReport run_flow(const Topology& topo, std::string_view pub, std::string_view sub,
                        const MasterKeys& keys, const SimOptions& opts = {});

// Multicast variant: one forwarding identifier covering the union of the
// per-subscriber shortest paths.
DeliveryReport run_flow_multi(const Topology& topo, std::string_view pub,
                              const std::vector<std::string>& subs, const MasterKeys& keys,
                              const SimOptions& opts = {});

struct InjectionOutcome {
    bool ingress_accepted = false;
    std::vector<std::string> delivered;   // sorted UE node ids reached
    std::uint64_t hops_traversed = 0;
    std::uint32_t security_checks = 0;
};

// Drive an arbitrary (possibly hostile) packet through a NAP and the rest of
// the domain; the attack harness's entry point.
InjectionOutcome inject_packet(const Topology& topo, std::uint32_t nap,
                               std::optional<std::uint32_t> arrival_edge, const Packet& pkt,
                               const MasterKeys& keys, const SimOptions& opts = {});

// One CSV row per flow: flow_id,pub,sub,path_len,delivered,false_positive_links,hops
std::string flow_csv_header();
std::string flow_csv_row(std::uint64_t flow_id, std::string_view pub, std::string_view sub,
                         const DeliveryReport& report);

} // namespace efid
