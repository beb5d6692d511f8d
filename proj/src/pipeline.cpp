#include "fpinv/pipeline.hpp"

#include <fstream>
#include <sstream>

namespace fpinv::pipeline {

using solve::Clock;
using solve::MatchedBlock;
using solve::ProbeOutcome;

namespace {

// Products above this degree rarely help and inflate the monomial row space,
// which the exact simplex pays for quadratically; premises of higher degree
// stay in the constraint but drop out of the certificate basis.
int auto_cap(const cons::ImplicationConstraint& c, int degree) {
    int cap = std::max(degree, 4);
    for (auto& [m, aff] : c.conclusion) cap = std::max(cap, m.degree());
    return cap;
}

struct ProbeCtx {
    cons::Registry reg;
    cons::Template tpl;
    std::vector<MatchedBlock> statics;
    VarTable xvars;
    int report_loc = 0;
    int target = 0;
    std::vector<Poly> extras;
    cons::SolveConfig cc;
    std::string backend_cmd;
    Clock::time_point deadline;
    int counter = 0;

    MatchedBlock match(const cons::ImplicationConstraint& c, const std::string& prefix) {
        MatchedBlock b;
        b.constraint = c;
        auto theta = pos::theta_for(c, cc.aug_squares);
        int cap = cc.product_degree_cap > 0 ? cc.product_degree_cap : auto_cap(c, cc.degree);
        b.basis = pos::enumerate_products(theta, cc.m, cap);
        b.sys = pos::match_coefficients(c, b.basis, reg, prefix);
        return b;
    }

    ProbeOutcome probe(const Rat& up, const Rat& low) {
        ++counter;
        std::vector<MatchedBlock> dyn;
        auto pair = cons::range_constraints(tpl, report_loc, xvars, target, cons::RangeBound{up},
                                            cons::RangeBound{low}, cc.a, extras);
        int k = 0;
        for (auto& c : pair)
            dyn.push_back(match(c, "lr" + std::to_string(counter) + "_" + std::to_string(k++)));

        std::vector<pos::LinearCertSystem> sys;
        for (auto& b : statics) sys.push_back(b.sys);
        for (auto& b : dyn) sys.push_back(b.sys);
        auto assembled = pos::assemble(sys, true);

        ProbeOutcome out;
        out.term_size = assembled.term_size();
        auto problem = lp::from_cert_system(assembled, reg);
        lp::LpOutcome o;
        if (backend_cmd.empty()) {
            lp::SimplexBackend backend(deadline);
            o = backend.solve(problem);
        } else {
            lp::PipeBackend backend(backend_cmd);
            o = backend.solve(problem);
        }
        if (o.status == lp::LpStatus::Timeout) {
            out.timeout = true;
            return out;
        }
        if (o.status == lp::LpStatus::Feasible || o.status == lp::LpStatus::Optimal) {
            out.feasible = true;
            out.assignment = std::move(o.assignment);
            out.dynamic_blocks = std::move(dyn);
        }
        return out;
    }
};

struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One full solve attempt against a fixed coarse invariant.
struct Attempt {
    RunStatus status = RunStatus::F;
    std::string message;
    bool retryable = false;  // initial probe infeasible: enlarge B and go again
    solve::SearchResult search;
    std::vector<MatchedBlock> all_blocks;
    std::vector<Rat> assignment;
    int term_size = 0;
};

} // namespace

RunResult run_program(const lang::SourceProgram& parsed, const Options& opt) {
    RunResult res;
    auto t0 = Clock::now();
    auto deadline = t0 + std::chrono::milliseconds(static_cast<long>(opt.timeout_s * 1000));
    auto finish = [&](RunStatus st, const std::string& msg) {
        res.status = st;
        res.message = msg;
        res.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
        return res;
    };

    try {
        opt.cc.validate();
        fp::FloatFormat fmt = opt.fmt();
        lang::SourceProgram prog = classify_kinds(parsed, fmt.literal_spec());
        if (!opt.target_override.empty()) {
            int t = prog.vars.find(opt.target_override);
            if (t < 0) throw BuildError("target override names unknown variable");
            prog.target = t;
        }
        if (prog.target < 0) throw BuildError("no #target pragma and no --target override");

        cfg::FpCfg g0 = cfg::build_cfg(prog);
        cfg::FpCfg g = cfg::summarize(g0, cfg::default_cutpoints(g0));
        if (g.target < 0) throw BuildError("target variable is dead at every cut point");
        res.xvars = g.vars;
        int n = g.vars.size();

        std::vector<int> template_locs;
        for (int l = 0; l < g.n_locations; ++l)
            if (l != g.terminal) template_locs.push_back(l);
        res.template_locs = template_locs;

        // ---- Step 1: coarse invariant (Algorithm A only)
        coarse::CoarseInvariant ci;
        if (opt.cc.algo == cons::Algo::A) {
            if (!g.coarse_hints.empty()) {
                ci = coarse::from_declared(g);
            } else {
                try {
                    ci = coarse::from_interval_iteration(g, fmt, -1, opt.cc.bisect_depth);
                } catch (const coarse::CoarseError&) {
                    ci = coarse::data_driven(prog, g, fmt, opt.data_inputs, opt.data_iters,
                                             opt.data_pad, opt.seed);
                }
            }
        }

        Rat enlarge = rat_of_double(opt.enlarge_factor);
        for (int attempt = 0; attempt <= opt.retries; ++attempt) {
            if (Clock::now() > deadline) return finish(RunStatus::TO, "timeout before solving");
            res.retries_used = attempt;

            std::optional<fp::Box> box;
            if (opt.cc.algo == cons::Algo::A) box = ci.box();

            // ---- Step 2: per-transition error bounds; Step 3: relaxed constraints
            ProbeCtx ctx;
            ctx.xvars = g.vars;
            ctx.report_loc = g.initial;
            ctx.target = g.target;
            ctx.cc = opt.cc;
            ctx.backend_cmd = opt.lp_backend_cmd;
            ctx.deadline = deadline;
            ctx.tpl = cons::make_template(n, opt.cc.degree, template_locs, ctx.reg);

            std::map<int, int> absmap;
            for (int v = 0; v < n; ++v) absmap[v] = 3 * n + v;

            auto bound_provider = [&](const lang::ExprPtr& e) -> Poly {
                auto absf = fp::abstract_expr(e);
                if (absf.n_err == 0) return Poly();
                if (opt.cc.algo == cons::Algo::A) {
                    auto cb = fp::const_error_bound(absf, *box, fmt, opt.cc.bisect_depth);
                    return Poly(cb.gamma[0]);
                }
                auto sb = fp::symbolic_error_bound(absf, fmt, absmap);
                Poly gp = sb.gamma[0];
                if (opt.cc.abs_even) {
                    gp = fp::evenize_abs_poly(gp);
                    std::map<int, Poly> sub;
                    for (auto& [v, av] : absmap) sub[av] = Poly::variable(v);
                    gp = gp.subst(sub);
                }
                return gp;
            };

            res.gamma_max.clear();
            std::vector<cons::TransitionData> tds;
            std::vector<std::pair<int, int>> td_locs;
            std::vector<Poly> exit_extras;
            int exit_count = 0;
            for (auto& t : g.transitions) {
                if (t.tgt == g.terminal) {
                    if (t.src == g.initial) {
                        ++exit_count;
                        auto relaxed = cfg::overapprox_guard(t.guard, bound_provider);
                        std::vector<Poly> atoms;
                        for (auto& ra : relaxed)
                            for (auto& h : cons::clear_division(ra.rf, box, opt.cc.bisect_depth))
                                atoms.push_back(h);
                        if (exit_count == 1) exit_extras = atoms;
                    }
                    continue;
                }
                cons::TransitionData td;
                td.tr = &t;
                for (auto& u : t.update) td.exact.push_back(cfg::expr_to_ratfunc(u));
                td.abstracted = fp::abstract_update(t.update);
                if (opt.cc.algo == cons::Algo::A) {
                    auto cb = fp::const_error_bound(td.abstracted, *box, fmt, opt.cc.bisect_depth);
                    Rat gmax(0);
                    for (auto& gam : cb.gamma) {
                        td.gamma.push_back(Poly(gam));
                        gmax = std::max(gmax, gam);
                    }
                    res.gamma_max.push_back(gmax);
                } else {
                    auto sb = fp::symbolic_error_bound(td.abstracted, fmt, absmap);
                    td.gamma_symbolic = true;
                    for (auto& gp0 : sb.gamma) {
                        Poly gp = gp0;
                        if (opt.cc.abs_even) {
                            gp = fp::evenize_abs_poly(gp);
                            std::map<int, Poly> sub;
                            for (auto& [v, av] : absmap) sub[av] = Poly::variable(v);
                            gp = gp.subst(sub);
                            td.gamma_symbolic = false;  // rewritten into program variables
                        }
                        td.gamma.push_back(gp);
                    }
                    res.gamma_max.push_back(Rat(0));
                }
                auto relaxed = cfg::overapprox_guard(t.guard, bound_provider);
                for (auto& ra : relaxed)
                    for (auto& h : cons::clear_division(ra.rf, box, opt.cc.bisect_depth))
                        td.guard_relaxed.push_back(h);
                td_locs.emplace_back(t.src, t.tgt);
                tds.push_back(std::move(td));
            }
            if (exit_count > 1) exit_extras.clear();  // disjunctive exit: no sound conjunction

            // extras for range rows: exit guard plus verified coarse ranges
            ctx.extras = exit_extras;
            if (opt.cc.algo == cons::Algo::A) {
                std::vector<int> verified;
                for (int v = 0; v < n; ++v)
                    if (ci.ranges[static_cast<size_t>(v)].verified) verified.push_back(v);
                for (auto& h : cons::box_atoms(*box, verified)) ctx.extras.push_back(h);
            }

            // static blocks: initiation, consecutions, entailment rows
            ctx.statics.push_back(
                ctx.match(cons::initiation(ctx.tpl, g.init, g.initial, g.vars), "li"));
            for (size_t i = 0; i < tds.size(); ++i) {
                auto& td = tds[i];
                bool division = false;
                for (auto& f : td.exact)
                    if (!f.is_poly()) division = true;
                cons::Relax relax = opt.cc.relax;
                if (relax == cons::Relax::R2 && division) relax = cons::Relax::R1;
                cons::ImplicationConstraint c =
                    relax == cons::Relax::R1
                        ? cons::consecution_r1(ctx.tpl, td, box, g.vars, opt.cc, td_locs[i].first,
                                               td_locs[i].second, opt.cc.bisect_depth)
                        : cons::consecution_r2(ctx.tpl, td, box, g.vars, opt.cc, td_locs[i].first,
                                               td_locs[i].second);
                ctx.statics.push_back(ctx.match(c, "lc" + std::to_string(i)));
            }
            if (opt.cc.algo == cons::Algo::A) {
                // coarse-range entailment for written, unverified, non-target vars
                std::vector<int> to_check;
                for (int v = 0; v < n; ++v)
                    if (v != g.target && g.written(v) && !ci.ranges[static_cast<size_t>(v)].verified)
                        to_check.push_back(v);
                if (!to_check.empty()) {
                    // in-loop premises: self-transition relaxed guard (if unique) + verified atoms
                    std::vector<Poly> loop_extras;
                    int self_count = 0;
                    for (size_t i = 0; i < tds.size(); ++i)
                        if (td_locs[i].first == g.initial && td_locs[i].second == g.initial) {
                            ++self_count;
                            if (self_count == 1) loop_extras = tds[i].guard_relaxed;
                        }
                    if (self_count > 1) loop_extras.clear();
                    std::vector<int> verified;
                    for (int v = 0; v < n; ++v)
                        if (ci.ranges[static_cast<size_t>(v)].verified) verified.push_back(v);
                    for (auto& h : cons::box_atoms(*box, verified)) loop_extras.push_back(h);
                    auto rows = cons::entailment_constraints(ctx.tpl, g.initial, g.vars, *box, to_check,
                                                             opt.cc.a, loop_extras);
                    int k = 0;
                    for (auto& c : rows) ctx.statics.push_back(ctx.match(c, "le" + std::to_string(k++)));
                }
            }

            // ---- Step 4: solve under the chosen strategy
            Rat lo0, hi0;
            if (opt.cc.algo == cons::Algo::A) {
                lo0 = box->iv[static_cast<size_t>(g.target)].first;
                hi0 = box->iv[static_cast<size_t>(g.target)].second;
            } else {
                fp::Box ib = coarse::init_box(g);
                Rat c = (ib.iv[static_cast<size_t>(g.target)].first +
                         ib.iv[static_cast<size_t>(g.target)].second) /
                        2;
                Rat h = (ib.iv[static_cast<size_t>(g.target)].second -
                         ib.iv[static_cast<size_t>(g.target)].first) /
                        2;
                if (h < 1) h = 1;
                Rat w = rat_of_double(opt.b_widen);
                lo0 = c - h * w;
                hi0 = c + h * w;
            }
            Rat tol = (hi0 - lo0) / opt.search_denom;
            if (!(tol > 0)) tol = Rat(1, 1000000);

            // independent searches run on cloned contexts
            auto ctx_up = std::make_shared<ProbeCtx>(ctx);
            auto ctx_low = std::make_shared<ProbeCtx>(ctx);
            auto ctx_joint = std::make_shared<ProbeCtx>(ctx);
            solve::ProbeFn up_fn = [ctx_up](const Rat& u, const Rat& l) { return ctx_up->probe(u, l); };
            solve::ProbeFn low_fn = [ctx_low](const Rat& u, const Rat& l) { return ctx_low->probe(u, l); };
            solve::ProbeFn joint_fn = [ctx_joint](const Rat& u, const Rat& l) {
                return ctx_joint->probe(u, l);
            };

            solve::SearchResult sr =
                opt.strategy == "s1"
                    ? solve::strategy_s1(up_fn, low_fn, joint_fn, lo0, hi0, tol, deadline)
                    : solve::strategy_s2(up_fn, low_fn, joint_fn, lo0, hi0, tol, deadline);
            res.probes += sr.probes;

            if (sr.timeout) return finish(RunStatus::TO, sr.message.empty() ? "timeout" : sr.message);
            if (!sr.ok) {
                // Step 5: enlarge B and rerun (guessed coarse invariant only)
                bool can_retry = opt.cc.algo == cons::Algo::A && attempt < opt.retries &&
                                 ci.provenance != coarse::Provenance::IntervalIterated;
                if (can_retry) {
                    ci.enlarge(enlarge);
                    continue;
                }
                return finish(RunStatus::F, sr.message);
            }

            // ---- verification gate
            std::vector<MatchedBlock> blocks = ctx_joint->statics;
            for (auto& b : sr.final_probe.dynamic_blocks) blocks.push_back(b);
            auto rep = solve::verify_solution(blocks, sr.final_probe.assignment);
            if (!rep.accepted())
                return finish(RunStatus::F, "certificate verification failed (residual " +
                                                rat_str(rep.residual) + ")");
            res.residual = rep.residual;
            res.min_lambda = rep.min_lambda;
            res.term_size = sr.final_probe.term_size;
            res.up = sr.up;
            res.low = sr.low;

            res.containment_ok = true;
            if (opt.cc.algo == cons::Algo::A) {
                res.containment_ok = sr.up <= box->iv[static_cast<size_t>(g.target)].second &&
                                     sr.low >= box->iv[static_cast<size_t>(g.target)].first;
                if (!res.containment_ok)
                    return finish(RunStatus::F, "solved range escapes the coarse range");
                res.coarse_box.clear();
                for (auto& r : ci.ranges) res.coarse_box.emplace_back(r.lo, r.hi);
                res.coarse_provenance = ci.provenance == coarse::Provenance::Declared ? "declared"
                                        : ci.provenance == coarse::Provenance::IntervalIterated
                                            ? "interval-iterated"
                                            : "data-driven";
            }

            res.eta.clear();
            for (int l : template_locs) res.eta.push_back(ctx.tpl.solved(l, sr.final_probe.assignment));

            // ---- dynamic inductiveness cross-check
            solve::InductivenessInput ii{&g, &fmt, template_locs, res.eta};
            res.violations = solve::sample_inductiveness(ii, opt.inductive_samples, opt.seed);
            if (res.violations != 0)
                return finish(RunStatus::F, "sampled inductiveness violations: " +
                                                std::to_string(res.violations));

            return finish(RunStatus::OK, "");
        }
        return finish(RunStatus::F, "retries exhausted while enlarging the coarse invariant");
    } catch (const coarse::CoarseError& e) {
        return finish(RunStatus::F, std::string("coarse invariant: ") + e.what());
    } catch (const std::exception& e) {
        return finish(RunStatus::F, e.what());
    }
}

RunResult run_text(const std::string& text, const Options& opt) {
    return run_program(lang::parse_program(text), opt);
}

RunResult run_file(const std::string& path, const Options& opt) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return run_text(ss.str(), opt);
}

std::string dump_cfg(const lang::SourceProgram& parsed, const Options& opt) {
    lang::SourceProgram prog = classify_kinds(parsed, opt.fmt().literal_spec());
    cfg::FpCfg g0 = cfg::build_cfg(prog);
    cfg::FpCfg g = cfg::summarize(g0, cfg::default_cutpoints(g0));
    return "// per-statement graph\n" + g0.dump() + "// summarized over cut points\n" + g.dump();
}

std::string dump_constraints(const lang::SourceProgram& parsed, const Options& opt) {
    fp::FloatFormat fmt = opt.fmt();
    lang::SourceProgram prog = classify_kinds(parsed, fmt.literal_spec());
    cfg::FpCfg g0 = cfg::build_cfg(prog);
    cfg::FpCfg g = cfg::summarize(g0, cfg::default_cutpoints(g0));
    int n = g.vars.size();

    coarse::CoarseInvariant ci;
    std::optional<fp::Box> box;
    if (opt.cc.algo == cons::Algo::A) {
        if (!g.coarse_hints.empty())
            ci = coarse::from_declared(g);
        else {
            try {
                ci = coarse::from_interval_iteration(g, fmt, -1, opt.cc.bisect_depth);
            } catch (const coarse::CoarseError&) {
                ci = coarse::data_driven(prog, g, fmt, opt.data_inputs, opt.data_iters, opt.data_pad,
                                         opt.seed);
            }
        }
        box = ci.box();
    }

    cons::Registry reg;
    std::vector<int> template_locs;
    for (int l = 0; l < g.n_locations; ++l)
        if (l != g.terminal) template_locs.push_back(l);
    cons::Template tpl = cons::make_template(n, opt.cc.degree, template_locs, reg);

    std::map<int, int> absmap;
    for (int v = 0; v < n; ++v) absmap[v] = 3 * n + v;
    auto bound_provider = [&](const lang::ExprPtr& e) -> Poly {
        auto absf = fp::abstract_expr(e);
        if (absf.n_err == 0) return Poly();
        if (opt.cc.algo == cons::Algo::A)
            return Poly(fp::const_error_bound(absf, *box, fmt, opt.cc.bisect_depth).gamma[0]);
        return fp::symbolic_error_bound(absf, fmt, absmap).gamma[0];
    };

    std::ostringstream os;
    os << cons::initiation(tpl, g.init, g.initial, g.vars).dump(reg) << "\n";
    for (auto& t : g.transitions) {
        if (t.tgt == g.terminal) continue;
        cons::TransitionData td;
        td.tr = &t;
        for (auto& u : t.update) td.exact.push_back(cfg::expr_to_ratfunc(u));
        td.abstracted = fp::abstract_update(t.update);
        if (opt.cc.algo == cons::Algo::A) {
            auto cb = fp::const_error_bound(td.abstracted, *box, fmt, opt.cc.bisect_depth);
            for (auto& gam : cb.gamma) td.gamma.push_back(Poly(gam));
        } else {
            auto sb = fp::symbolic_error_bound(td.abstracted, fmt, absmap);
            td.gamma_symbolic = true;
            td.gamma = sb.gamma;
        }
        for (auto& ra : cfg::overapprox_guard(t.guard, bound_provider))
            for (auto& h : cons::clear_division(ra.rf, box, opt.cc.bisect_depth))
                td.guard_relaxed.push_back(h);
        bool division = false;
        for (auto& f : td.exact)
            if (!f.is_poly()) division = true;
        cons::Relax relax = opt.cc.relax;
        if (relax == cons::Relax::R2 && division) relax = cons::Relax::R1;
        auto c = relax == cons::Relax::R1
                     ? cons::consecution_r1(tpl, td, box, g.vars, opt.cc, t.src, t.tgt,
                                            opt.cc.bisect_depth)
                     : cons::consecution_r2(tpl, td, box, g.vars, opt.cc, t.src, t.tgt);
        os << c.dump(reg) << "\n";
    }
    return os.str();
}

} // namespace fpinv::pipeline
