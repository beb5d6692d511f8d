// End-to-end drivers: coarse invariant, per-transition error bounds,
// constraint construction, certificate solving with retry on coarse-range
// failure, verification gates, and inductiveness sampling.

#pragma once

#include "fpinv/solve.hpp"

namespace fpinv::pipeline {

struct Options {
    cons::SolveConfig cc;
    std::string format = "f32";
    std::string rounding = "nearest";
    std::string strategy = "s2";  // s1 | s2
    double timeout_s = 300;
    uint64_t seed = 1;
    long search_denom = 16384;  // binary-search tolerance = initial width / denom
    int retries = 3;
    double enlarge_factor = 2.0;
    int data_inputs = 100;
    long data_iters = 10000;
    double data_pad = 0.10;
    long inductive_samples = 100000;
    std::string lp_backend_cmd;  // empty: reference simplex
    std::string target_override;
    double b_widen = 4.0;  // Algorithm B: search half-width = widen * precondition half-width

    fp::FloatFormat fmt() const {
        return fp::FloatFormat::make(format, rounding == "any" ? fp::FloatFormat::Rounding::Any
                                                               : fp::FloatFormat::Rounding::Nearest);
    }
};

enum class RunStatus { OK, F, TO };

struct RunResult {
    RunStatus status = RunStatus::F;
    std::string message;

    Rat low, up;
    VarTable xvars;
    std::vector<int> template_locs;
    std::vector<Poly> eta;  // aligned with template_locs
    Rat residual;
    Rat min_lambda;
    int term_size = 0;
    long violations = -1;
    bool containment_ok = false;

    std::string coarse_provenance;
    std::vector<std::pair<Rat, Rat>> coarse_box;
    std::vector<Rat> gamma_max;  // per consecution transition
    double wall_s = 0;
    int probes = 0;
    int retries_used = 0;

    double width() const { return rat_to_double(up - low); }
};

RunResult run_program(const lang::SourceProgram& parsed, const Options& opt);
RunResult run_text(const std::string& text, const Options& opt);
RunResult run_file(const std::string& path, const Options& opt);

// Constraint dump (for golden tests / debugging): one implication per line.
std::string dump_constraints(const lang::SourceProgram& parsed, const Options& opt);
std::string dump_cfg(const lang::SourceProgram& parsed, const Options& opt);

} // namespace fpinv::pipeline
