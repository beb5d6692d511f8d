#include "fpinv/report.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace fpinv::report {

RunReport make_report(const std::string& name, const pipeline::Options& opt,
                      const pipeline::RunResult& r) {
    RunReport rep;
    rep.benchmark = name;
    rep.algorithm = opt.cc.algo == cons::Algo::A ? "A" : "B";
    rep.relaxation = opt.cc.relax == cons::Relax::R1 ? "r1" : "r2";
    rep.strategy = opt.strategy;
    rep.degree = opt.cc.degree;
    rep.m = opt.cc.m;
    rep.bar = rat_str(opt.cc.bar);
    rep.a = rat_str(opt.cc.a);
    rep.format = opt.format;
    rep.rounding = opt.rounding;
    rep.seed = opt.seed;
    rep.status = r.status == pipeline::RunStatus::OK ? "OK"
                 : r.status == pipeline::RunStatus::TO ? "TO"
                                                       : "F";
    rep.message = r.message;
    rep.probes = r.probes;
    rep.time_s = r.wall_s;
    if (r.status == pipeline::RunStatus::OK) {
        rep.low = rat_str(r.low);
        rep.up = rat_str(r.up);
        rep.range = r.width();
        for (size_t i = 0; i < r.template_locs.size(); ++i)
            rep.invariants.emplace_back(r.template_locs[i], r.eta[i].str(r.xvars));
        for (auto& gm : r.gamma_max) rep.gamma.push_back(rat_str(gm));
        rep.term_size = r.term_size;
        rep.residual = rat_str(r.residual);
        rep.violations = r.violations;
        rep.coarse_provenance = r.coarse_provenance;
        for (auto& [lo, hi] : r.coarse_box) rep.coarse_box.emplace_back(rat_str(lo), rat_str(hi));
    }
    return rep;
}

std::string to_json_line(const RunReport& r) {
    nlohmann::json j;
    j["benchmark"] = r.benchmark;
    j["algorithm"] = r.algorithm;
    j["relaxation"] = r.relaxation;
    j["strategy"] = r.strategy;
    j["degree"] = r.degree;
    j["m"] = r.m;
    j["bar"] = r.bar;
    j["a"] = r.a;
    j["format"] = r.format;
    j["rounding"] = r.rounding;
    j["seed"] = r.seed;
    j["status"] = r.status;
    j["message"] = r.message;
    j["low"] = r.low;
    j["up"] = r.up;
    j["range"] = r.range;
    nlohmann::json invs = nlohmann::json::array();
    for (auto& [loc, poly] : r.invariants) invs.push_back({{"location", loc}, {"polynomial", poly}});
    j["invariants"] = invs;
    j["gamma"] = r.gamma;
    j["term_size"] = r.term_size;
    j["residual"] = r.residual;
    j["violations"] = r.violations;
    nlohmann::json cb = nlohmann::json::array();
    for (auto& [lo, hi] : r.coarse_box) cb.push_back({lo, hi});
    j["coarse"] = {{"provenance", r.coarse_provenance}, {"box", cb}};
    j["probes"] = r.probes;
    j["time_s"] = r.time_s;
    return j.dump();
}

std::string render_table(const std::vector<RunReport>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(26) << "Benchmark" << std::setw(5) << "Alg" << std::setw(4) << "d"
       << std::setw(4) << "m" << std::setw(8) << "Status" << std::setw(14) << "Range" << std::setw(12)
       << "Time (s)" << std::setw(10) << "TermSize" << "\n";
    os << std::string(83, '-') << "\n";
    for (auto& r : rows) {
        std::ostringstream range;
        if (r.status == "OK") {
            if (r.range < 0.001)
                range << "<0.001";
            else
                range << std::fixed << std::setprecision(4) << r.range;
        } else {
            range << r.status;
        }
        os << std::left << std::setw(26) << r.benchmark << std::setw(5) << r.algorithm << std::setw(4)
           << r.degree << std::setw(4) << r.m << std::setw(8) << r.status << std::setw(14) << range.str()
           << std::setw(12) << std::fixed << std::setprecision(2) << r.time_s << std::setw(10)
           << r.term_size << "\n";
    }
    return os.str();
}

} // namespace fpinv::report
