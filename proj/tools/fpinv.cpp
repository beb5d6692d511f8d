// Command-line driver: single runs, the benchmark harness, and debugging
// dumps (CFG, constraints, text-format LP solving).
//
// Exit codes: 0 all runs OK, 1 any failure, 2 any timeout, 3 usage error.

#include "fpinv/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace fpinv;

namespace {

struct Flags {
    std::string alg = "A";
    std::string relax = "r2";
    std::string strategy = "s2";
    int degree = 2;
    int m = 0;  // 0: match the template degree
    std::string bar = "0.1";
    std::string a = "0.0001";
    std::string format = "f32";
    std::string rounding = "nearest";
    double timeout = 300;
    uint64_t seed = 1;
    std::string json_path;
    std::string target;
    bool no_aug = false;
    bool abs_even = false;
    int depth = 3;
    int retries = 3;
    double pad = 0.10;
    int inputs = 100;
    long iters = 10000;
    long samples = 100000;
    long denom = 16384;
    int prodcap = 0;
    std::string lp_backend;

    void attach(CLI::App* cmd) {
        cmd->add_option("--alg", alg, "algorithm: A (coarse-invariant) or B (symbolic bounds)")
            ->check(CLI::IsMember({"A", "B"}));
        cmd->add_option("--relax", relax, "consecution relaxation: r1 or r2")
            ->check(CLI::IsMember({"r1", "r2"}));
        cmd->add_option("--strategy", strategy, "optimization strategy: s1 or s2")
            ->check(CLI::IsMember({"s1", "s2"}));
        cmd->add_option("--degree", degree, "template degree")->check(CLI::PositiveNumber);
        cmd->add_option("--m", m, "handelman multiplicand bound (default: degree)");
        cmd->add_option("--bar", bar, "barrier constant (default 0.1)");
        cmd->add_option("--a", a, "range relaxation constant (default 0.0001)");
        cmd->add_option("--format", format, "float format")->check(CLI::IsMember({"f32", "f64"}));
        cmd->add_option("--rounding", rounding, "rounding mode")
            ->check(CLI::IsMember({"nearest", "any"}));
        cmd->add_option("--timeout", timeout, "per-run timeout in seconds");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--json", json_path, "append newline-delimited JSON reports to this file");
        cmd->add_option("--target", target, "override the target variable");
        cmd->add_flag("--no-aug-squares", no_aug, "do not augment premise products with squares");
        cmd->add_flag("--abs-even", abs_even, "evenize symbolic bounds (Algorithm B)");
        cmd->add_option("--depth", depth, "interval bisection depth");
        cmd->add_option("--retries", retries, "coarse-invariant enlarge retries");
        cmd->add_option("--pad", pad, "data-driven hull padding fraction");
        cmd->add_option("--inputs", inputs, "data-driven random inputs");
        cmd->add_option("--iters", iters, "data-driven loop iterations per input");
        cmd->add_option("--samples", samples, "inductiveness sampling transitions");
        cmd->add_option("--denom", denom, "binary search tolerance = initial width / denom");
        cmd->add_option("--prodcap", prodcap, "degree cap for multi-factor premise products (0: auto)");
        cmd->add_option("--lp-backend", lp_backend, "external LP command reading/writing the text format");
    }

    pipeline::Options options() const {
        pipeline::Options o;
        o.cc.algo = alg == "B" ? cons::Algo::B : cons::Algo::A;
        o.cc.relax = relax == "r1" ? cons::Relax::R1 : cons::Relax::R2;
        o.cc.degree = degree;
        o.cc.m = m > 0 ? m : std::max(2, degree);
        o.cc.bar = rat_parse(bar);
        o.cc.a = rat_parse(a);
        o.cc.aug_squares = !no_aug;
        o.cc.abs_even = abs_even;
        o.cc.bisect_depth = depth;
        o.format = format;
        o.rounding = rounding;
        o.strategy = strategy;
        o.timeout_s = timeout;
        o.seed = seed;
        o.retries = retries;
        o.data_pad = pad;
        o.data_inputs = inputs;
        o.data_iters = iters;
        o.inductive_samples = samples;
        o.search_denom = denom;
        o.cc.product_degree_cap = prodcap;
        o.lp_backend_cmd = lp_backend;
        o.target_override = target;
        return o;
    }
};

int status_code(const std::vector<report::RunReport>& rows) {
    bool any_to = false, any_f = false;
    for (auto& r : rows) {
        if (r.status == "TO") any_to = true;
        if (r.status == "F") any_f = true;
    }
    if (any_to) return 2;
    if (any_f) return 1;
    return 0;
}

void write_json(const std::string& path, const std::vector<report::RunReport>& rows) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    for (auto& r : rows) f << report::to_json_line(r) << "\n";
}

void print_run(const report::RunReport& r) {
    std::cout << r.benchmark << ": " << r.status;
    if (r.status == "OK") {
        std::cout << "  range [" << r.low << ", " << r.up << "]  width " << r.range << "  time "
                  << r.time_s << " s\n";
        for (auto& [loc, poly] : r.invariants)
            std::cout << "  invariant at loc " << loc << ":  " << poly << " >= 0\n";
        std::cout << "  term size " << r.term_size << ", residual " << r.residual << ", coarse "
                  << r.coarse_provenance;
        if (!r.coarse_box.empty()) {
            std::cout << " {";
            for (size_t i = 0; i < r.coarse_box.size(); ++i)
                std::cout << (i ? ", " : "") << "[" << r.coarse_box[i].first << ", "
                          << r.coarse_box[i].second << "]";
            std::cout << "}";
        }
        std::cout << "\n";
    } else {
        std::cout << "  (" << r.message << ")  time " << r.time_s << " s\n";
    }
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polynomial invariant synthesis for floating-point loops"};
    app.require_subcommand(1);

    Flags run_flags, bench_flags, dump_flags;
    std::string run_file, bench_dir, dump_file, bench_config, sweep;

    auto* run_cmd = app.add_subcommand("run", "analyze one program file");
    run_cmd->add_option("file", run_file, "program file")->required();
    run_flags.attach(run_cmd);

    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite directory");
    bench_cmd->add_option("dir", bench_dir, "directory of .fp files")->required();
    bench_cmd->add_option("--config", bench_config, "JSON per-benchmark option overrides");
    bench_cmd->add_option("--sweep", sweep, "comma-separated degree sweep, e.g. 2,4");
    bench_flags.attach(bench_cmd);

    auto* cfg_cmd = app.add_subcommand("cfg", "dump the control flow graph");
    cfg_cmd->add_option("file", dump_file, "program file")->required();
    dump_flags.attach(cfg_cmd);

    auto* cons_cmd = app.add_subcommand("constraints", "dump the implication constraints");
    cons_cmd->add_option("file", dump_file, "program file")->required();
    dump_flags.attach(cons_cmd);

    auto* lp_cmd = app.add_subcommand("lp", "solve a text-format LP from stdin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (run_cmd->parsed()) {
            auto opt = run_flags.options();
            auto result = pipeline::run_file(run_file, opt);
            auto rep = report::make_report(fs::path(run_file).stem().string(), opt, result);
            print_run(rep);
            write_json(run_flags.json_path, {rep});
            return status_code({rep});
        }

        if (bench_cmd->parsed()) {
            std::vector<fs::path> files;
            for (auto& e : fs::directory_iterator(bench_dir))
                if (e.path().extension() == ".fp") files.push_back(e.path());
            std::sort(files.begin(), files.end());

            nlohmann::json config;
            if (!bench_config.empty()) config = nlohmann::json::parse(slurp(bench_config));

            std::vector<int> degrees;
            if (!sweep.empty()) {
                std::stringstream ss(sweep);
                std::string tok;
                while (std::getline(ss, tok, ',')) degrees.push_back(std::stoi(tok));
            } else {
                degrees.push_back(0);  // 0: per-benchmark default
            }

            struct Job {
                fs::path file;
                pipeline::Options opt;
                std::string label;
            };
            std::vector<Job> jobs;
            for (auto& f : files) {
                std::string name = f.stem().string();
                Flags fl = bench_flags;
                if (config.contains(name)) {
                    auto& c = config[name];
                    if (c.contains("degree")) fl.degree = c["degree"];
                    if (c.contains("m")) fl.m = c["m"];
                    if (c.contains("alg")) fl.alg = c["alg"];
                    if (c.contains("relax")) fl.relax = c["relax"];
                    if (c.contains("strategy")) fl.strategy = c["strategy"];
                    if (c.contains("timeout")) fl.timeout = c["timeout"];
                    if (c.contains("prodcap")) fl.prodcap = c["prodcap"];
                }
                for (int d : degrees) {
                    Flags fd = fl;
                    std::string label = name;
                    if (d > 0) {
                        fd.degree = d;
                        fd.m = d;
                        label += " (d=" + std::to_string(d) + ")";
                    }
                    jobs.push_back(Job{f, fd.options(), label});
                }
            }

            std::vector<report::RunReport> rows(jobs.size());
            std::atomic<size_t> next{0};
            unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                                  static_cast<unsigned>(jobs.size()));
            if (workers == 0) workers = 1;
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (;;) {
                        size_t i = next.fetch_add(1);
                        if (i >= jobs.size()) return;
                        pipeline::RunResult r;
                        try {
                            r = pipeline::run_file(jobs[i].file.string(), jobs[i].opt);
                        } catch (const std::exception& e) {
                            r.status = pipeline::RunStatus::F;
                            r.message = e.what();
                        }
                        rows[i] = report::make_report(jobs[i].label, jobs[i].opt, r);
                    }
                });
            }
            for (auto& t : pool) t.join();

            std::sort(rows.begin(), rows.end(),
                      [](const report::RunReport& x, const report::RunReport& y) {
                          return std::tie(x.benchmark, x.degree) < std::tie(y.benchmark, y.degree);
                      });
            std::cout << report::render_table(rows);
            write_json(bench_flags.json_path, rows);
            return status_code(rows);
        }

        if (cfg_cmd->parsed()) {
            std::cout << pipeline::dump_cfg(lang::parse_program(slurp(dump_file)), dump_flags.options());
            return 0;
        }
        if (cons_cmd->parsed()) {
            std::cout << pipeline::dump_constraints(lang::parse_program(slurp(dump_file)),
                                                    dump_flags.options());
            return 0;
        }
        if (lp_cmd->parsed()) {
            auto problem = lp::parse_problem(std::cin);
            lp::SimplexBackend backend;
            auto outcome = backend.solve(problem);
            std::cout << lp::dump_outcome(outcome, problem);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
