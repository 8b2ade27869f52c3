/*
 * Executable adversaries and the analytic attack model.
 *
 * Three adversaries run against either the unprotected baseline (plain
 * forwarding identifiers in packet headers) or the credential scheme:
 * brute-force guessing, replay of a captured credential, and a
 * correlation probe over credentials issued for near-identical paths.
 *
 * The analytic side: p_fw = rho_m^(k*l) per guess, the birthday estimate
 * x = sqrt(2 r ln 1/(1-p_sc)) for the number of attempts to hit a tag
 * collision, and the composite p_a = p_sc * p_fw.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "efid/secure.hpp"
#include "efid/sim.hpp"
#include "efid/topology.hpp"

namespace efid {

enum class AttackMode { BruteForce, Replay, Computational };
enum class Scheme { LipsinPlain, EfidSecured };

const char* scheme_name(Scheme s);

// --- analytic model ---------------------------------------------------

// Attempts needed for collision probability p_sc over a hash range of size
// r, unrounded.
double birthday_attempts_real(double r, double p_sc);

// Same, rounded up to a whole attempt.
std::uint64_t birthday_attempts(double r, double p_sc);

// Closed-form inverse: collision probability after x attempts over range r.
double collision_probability(double r, double x);

// p_a = p_sc * rho_m^(k*l).
double attack_probability(double p_sc, double rho_m, std::uint32_t k, std::uint32_t l);

// --- adversaries ------------------------------------------------------

struct AdversaryConfig {
    AttackMode mode = AttackMode::BruteForce;
    Scheme scheme = Scheme::EfidSecured;
    std::uint64_t trials = 1;
    std::string attacker;          // a PUB; guesses enter through its NAP
    std::string target;            // success == this node receives the packet
    std::uint64_t seed = 0;
    std::uint32_t tag_bits = 64;
    std::uint32_t rotations = 0;   // replay: key rotations between capture and replay
};

struct AttackReport {
    AttackMode mode{};
    Scheme scheme{};
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double empirical_rate = 0.0;
    double analytic_p_fw = 1.0;
    double analytic_p_sc = 1.0;
    double analytic_p_a = 1.0;
    std::uint32_t path_len = 0;    // forwarding checks between NAP and target
    double rho_m = 0.0;            // fill factor of the injected identifiers
    std::uint64_t seed = 0;
};

// Guessing campaign. Baseline trials inject identifiers conditioned to the
// domain's maximum fill; secured trials inject uniformly random
// {efid, tag} pairs (whose decryption is uniform, fill 1/2, which is what
// the analytic columns use).
AttackReport run_brute_force(const Topology& topo, const AdversaryConfig& cfg,
                             const MasterKeys& keys);

// Replay of one captured valid credential (or plain identifier). Rotating
// the tag key between capture and replay is what shuts the window.
AttackReport run_replay(const Topology& topo, const AdversaryConfig& cfg,
                        const MasterKeys& keys);

// --- correlation probe ------------------------------------------------

struct PopulationStats {
    double max_bias_z = 0.0;   // worst per-bit deviation from fair-coin bits
    double max_corr_z = 0.0;   // worst pairwise co-occurrence deviation
    bool bias_exceeds = false;
    bool corr_exceeds = false;
};

struct CorrelationStats {
    std::uint64_t samples = 0;
    std::uint64_t tests_per_population = 0;
    double threshold_z = 0.0;   // family threshold at the 4-sigma error level
    PopulationStats fid;        // plaintext identifiers: the positive control
    PopulationStats efid;       // ciphertexts: must stay below threshold
};

// Issues `samples` credentials for paths sharing all but one LinkId and
// tests ciphertext bits against the fair-independent-coin model. The same
// statistics over the plaintext identifiers act as the positive control.
// The per-test threshold is Bonferroni-scaled so the whole family keeps a
// 4-sigma false-alarm level.
CorrelationStats run_correlation_probe(const MasterKeys& keys, const FilterParams& params,
                                       std::uint64_t samples, std::uint64_t seed,
                                       std::uint32_t n_lids = 23, std::uint32_t shared = 22);

// --- sweep ------------------------------------------------------------

struct SweepConfig {
    std::uint32_t efid_m = 256;
    std::uint32_t lipsin_m = 320;
    std::uint32_t k = 5;
    std::uint32_t n_lids = 23;
    std::uint32_t hash_bits = 64;
    double p_sc = 1e-6;
    std::uint32_t l_min = 1;
    std::uint32_t l_max = 8;
    // When set, both schemes use this fill factor instead of the expected
    // fill of n_lids LinkIds.
    std::optional<double> rho_override;
    std::uint64_t trials = 0;   // >0 adds empirical baseline cells where feasible
    std::uint64_t seed = 0;
};

struct SweepRow {
    std::uint32_t l = 0;
    Scheme scheme{};
    std::uint32_t m = 0;
    std::uint32_t k = 0;
    std::uint32_t n_lids = 0;
    double rho_m = 0.0;
    double p_sc = 1.0;
    double p_fw = 0.0;
    double p_a = 0.0;
    std::optional<double> empirical_rate;
    std::optional<std::uint64_t> trials;
    std::uint64_t seed = 0;
};

// Analytic p_a per hop count for both schemes; empirical cells only where
// trials can resolve the probability (trials >= 100/p), otherwise empty.
std::vector<SweepRow> figure1_sweep(const SweepConfig& cfg);

// An empirical cell is resolvable when trials >= 100/p.
bool empirically_feasible(double p, std::uint64_t trials);

// --- CSV --------------------------------------------------------------

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);
SweepRow attack_report_as_row(const AttackReport& report, const Topology& topo);

std::string format_probability(double p);

} // namespace efid
