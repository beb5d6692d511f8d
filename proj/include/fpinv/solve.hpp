// Strategies over the certificate systems: feasibility probes with concrete
// range bounds (binary search, S2), successive shrinking from a feasible
// point (S1), the residual/sign/containment verification gate, and the
// dynamic inductiveness sampler.

#pragma once

#include "fpinv/coarse.hpp"
#include "fpinv/lp.hpp"

#include <chrono>
#include <functional>

namespace fpinv::solve {

using Clock = std::chrono::steady_clock;

struct MatchedBlock {
    cons::ImplicationConstraint constraint;
    pos::ProductBasis basis;
    pos::LinearCertSystem sys;
};

struct VerifyReport {
    Rat residual;    // max coefficient discrepancy across certificate identities
    Rat min_lambda;  // most negative multiplier (0 when none negative)
    bool identity_ok = false;
    bool lambda_ok = false;
    bool accepted() const { return identity_ok && lambda_ok; }
};

// Re-expands every certificate identity exactly at the given assignment.
VerifyReport verify_solution(const std::vector<MatchedBlock>& blocks,
                             const std::vector<Rat>& assignment);

struct ProbeOutcome {
    bool feasible = false;
    bool timeout = false;
    std::vector<Rat> assignment;
    std::vector<MatchedBlock> dynamic_blocks;
    int term_size = 0;
};

using ProbeFn = std::function<ProbeOutcome(const Rat& up, const Rat& low)>;

struct SearchResult {
    bool ok = false;
    bool timeout = false;
    std::string message;
    Rat up, low;
    ProbeOutcome final_probe;
    int probes = 0;
};

// Binary search on up (downward) and low (upward) independently, each probe
// a pure LP; the searches run concurrently on cloned contexts when probe_up
// and probe_low are distinct closures.
SearchResult strategy_s2(const ProbeFn& probe_up, const ProbeFn& probe_low, const ProbeFn& probe_joint,
                         const Rat& lo0, const Rat& hi0, const Rat& tol, Clock::time_point deadline);

// Successive shrinking seeded by an S2 pass at coarse tolerance.
SearchResult strategy_s1(const ProbeFn& probe_up, const ProbeFn& probe_low, const ProbeFn& probe_joint,
                         const Rat& lo0, const Rat& hi0, const Rat& tol, Clock::time_point deadline);

// Simulates paths through the summarized CFG with error values sampled in
// [-eps,eps] x [-delta,delta] per rounding site; counts states where the
// solved invariant dips below -1e-9 at its location.
struct InductivenessInput {
    const cfg::FpCfg* g;
    const fp::FloatFormat* fmt;
    std::vector<int> template_locs;
    std::vector<Poly> eta;  // aligned with template_locs
};
long sample_inductiveness(const InductivenessInput& in, long n_transitions, uint64_t seed);

} // namespace fpinv::solve
