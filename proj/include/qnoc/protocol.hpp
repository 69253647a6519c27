#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "qnoc/errors.hpp"
#include "qnoc/rng.hpp"
#include "qnoc/topology.hpp"

namespace qnoc {

using Time = double;

/**
 * Durations of one teleportation between adjacent cores, in abstract time
 * units:
 *   t_epr        one Barrett-Kok attempt (photon emission to BSM outcome)
 *   t_meas       source pre-processing and Bell measurement
 *   t_classical  two correction bits over one classical NoC hop
 *   t_correct    destination post-processing
 *   t_gate       gate execution once operands are co-located
 * p_bsm is the per-attempt heralding probability; max_attempts = 0 means
 * unbounded retries.
 */
struct TimingConfig {
    Time t_epr = 10;
    Time t_meas = 2;
    Time t_classical = 1;
    Time t_correct = 1;
    Time t_gate = 2;
    double p_bsm = 1.0;
    std::uint32_t max_attempts = 0;

    void validate() const {
        if (!(p_bsm > 0.0 && p_bsm <= 1.0)) throw ValidationError("p_bsm must be in (0,1]");
        for (Time t : {t_epr, t_meas, t_classical, t_correct, t_gate}) {
            if (!(t >= 0.0)) throw ValidationError("durations must be non-negative");
        }
    }

    // Everything after entanglement is heralded.
    Time post_epr() const noexcept { return t_meas + t_classical + t_correct; }

    friend bool operator==(const TimingConfig&, const TimingConfig&) = default;
};

struct TeleportOutcome {
    BsmLinkId link;
    std::uint32_t attempts = 1;
    Time start = 0;
    Time finish = 0;
};

// Number of Bernoulli(p_bsm) trials up to and including the first success.
// Consumes nothing from the stream when p_bsm == 1.
inline std::uint32_t entanglement_attempts(double p_bsm, RandomStream& rng, std::uint32_t max_attempts = 0) {
    if (p_bsm >= 1.0) return 1;
    std::uint32_t attempts = 1;
    while (!rng.bernoulli(p_bsm)) {
        ++attempts;
        if (max_attempts != 0 && attempts > max_attempts) {
            throw AttemptCapError("entanglement not heralded within " + std::to_string(max_attempts) + " attempts");
        }
    }
    return attempts;
}

/// One teleportation of a data qubit from `src` to the adjacent `dst`.
///
/// EPR generation starts at `start`. The Bell measurement needs the data
/// qubit, so it begins at max(entangled, data_ready); data_ready defaults to
/// `start`, giving finish = start + attempts*t_epr + t_meas + t_classical +
/// t_correct. A later data_ready models EPR generation overlapping the
/// previous hop's correction phase.
inline TeleportOutcome teleport_hop(const MeshTopology& topology, CoreId src, CoreId dst, Time start,
                                    const TimingConfig& cfg, RandomStream& rng, Time data_ready = -1) {
    if (!topology.adjacent(src, dst)) {
        throw ProtocolError("teleport_hop needs adjacent cores, got " + std::to_string(src.index) + " -> " +
                            std::to_string(dst.index));
    }
    TeleportOutcome out;
    out.link = topology.bsm_link_between(src, dst);
    out.attempts = entanglement_attempts(cfg.p_bsm, rng, cfg.max_attempts);
    out.start = start;
    const Time entangled = start + out.attempts * cfg.t_epr;
    out.finish = std::max(entangled, data_ready) + cfg.post_epr();
    return out;
}

}  // namespace qnoc
