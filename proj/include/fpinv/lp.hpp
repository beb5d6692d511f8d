// Linear programming over exact rationals: problem form, a reference
// simplex backend (Bland fallback, deterministic), and a text seam so an
// external solver can be plugged in without code changes.

#pragma once

#include "fpinv/positivity.hpp"

#include <chrono>
#include <iosfwd>
#include <optional>

namespace fpinv::lp {

struct LpProblem {
    struct Row {
        std::vector<std::pair<int, Rat>> terms;  // var index, coefficient
        Rat rhs;
    };
    std::vector<std::string> names;
    std::vector<bool> nonneg;
    std::vector<Row> rows;                 // equality rows
    std::vector<std::pair<int, Rat>> objective;  // maximize; empty = feasibility
    int nvars() const { return static_cast<int>(names.size()); }
};

enum class LpStatus { Optimal, Feasible, Infeasible, Unbounded, Timeout };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    std::vector<Rat> assignment;
    Rat objective_value;
};

class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual LpOutcome solve(const LpProblem& p) = 0;
};

// Exact-rational primal simplex; Dantzig pricing with a deterministic Bland
// fallback against cycling. Feasibility problems stop after phase 1.
class SimplexBackend : public LpBackend {
public:
    explicit SimplexBackend(std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt)
        : deadline_(deadline) {}
    LpOutcome solve(const LpProblem& p) override;

private:
    std::optional<std::chrono::steady_clock::time_point> deadline_;
};

// Runs `command < dump > result` through the text formats below.
class PipeBackend : public LpBackend {
public:
    explicit PipeBackend(std::string command) : command_(std::move(command)) {}
    LpOutcome solve(const LpProblem& p) override;

private:
    std::string command_;
};

LpProblem from_cert_system(const pos::LinearCertSystem& sys, const cons::Registry& reg);

// Text seam.  Problem: lines `var <name> free|nonneg`, `eq <c>*<v> + ... = <rhs>`,
// `maximize <c>*<v> + ...`.  Outcome: `status <optimal|feasible|infeasible|
// unbounded|timeout>` then `var <name> <rational>` lines.
std::string dump_problem(const LpProblem& p);
LpProblem parse_problem(std::istream& in);
std::string dump_outcome(const LpOutcome& o, const LpProblem& p);
LpOutcome parse_outcome(std::istream& in, const LpProblem& p);

} // namespace fpinv::lp
