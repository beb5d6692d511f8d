// Run reports: one record per pipeline run, renderable as a text table or
// newline-delimited JSON. Key names are part of the documented interface.

#pragma once

#include "fpinv/pipeline.hpp"

namespace fpinv::report {

struct RunReport {
    std::string benchmark;
    std::string algorithm;   // "A" | "B"
    std::string relaxation;  // "r1" | "r2"
    std::string strategy;    // "s1" | "s2"
    int degree = 2;
    int m = 2;
    std::string bar, a;  // exact rationals as text
    std::string format, rounding;
    uint64_t seed = 0;

    std::string status;  // "OK" | "F" | "TO"
    std::string message;
    std::string low, up;  // exact rationals as text
    double range = 0;
    std::vector<std::pair<int, std::string>> invariants;  // location, canonical polynomial
    std::vector<std::string> gamma;                       // per consecution transition
    int term_size = 0;
    std::string residual;
    long violations = -1;
    std::string coarse_provenance;
    std::vector<std::pair<std::string, std::string>> coarse_box;
    int probes = 0;
    double time_s = 0;
};

RunReport make_report(const std::string& name, const pipeline::Options& opt,
                      const pipeline::RunResult& r);

std::string to_json_line(const RunReport& r);
std::string render_table(const std::vector<RunReport>& rows);

} // namespace fpinv::report
