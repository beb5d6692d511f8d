#include "fpinv/solve.hpp"

#include <future>
#include <random>

namespace fpinv::solve {

VerifyReport verify_solution(const std::vector<MatchedBlock>& blocks,
                             const std::vector<Rat>& assignment) {
    VerifyReport rep;
    rep.residual = 0;
    rep.min_lambda = 0;
    for (auto& b : blocks) {
        // sum_j lambda_j g_j re-expanded exactly
        Poly sum;
        for (size_t j = 0; j < b.basis.products.size(); ++j) {
            const Rat& l = assignment.at(static_cast<size_t>(b.sys.lambdas[j]));
            if (l < rep.min_lambda) rep.min_lambda = l;
            if (l != 0) sum = sum + b.basis.products[j] * l;
        }
        Poly concl = cons::linpoly_instantiate(b.constraint.conclusion, assignment);
        Poly diff = sum - concl;
        for (auto& [m, c] : diff.terms()) {
            Rat a = rat_abs(c);
            if (a > rep.residual) rep.residual = a;
        }
    }
    rep.identity_ok = rep.residual <= Rat(1, 1000000);
    rep.lambda_ok = rep.min_lambda >= Rat(-1, 1000000000);
    return rep;
}

namespace {

struct Budget {
    Clock::time_point deadline;
    bool expired() const { return Clock::now() > deadline; }
};

// Minimal feasible upper bound in [floor_v, start], given that `start` is
// feasible; keeps the best feasible probe outcome.
struct SideResult {
    bool timeout = false;
    Rat best;
    int probes = 0;
};

// Minimizes the feasible value in [floor_v, start]; start is known feasible.
SideResult search_down(const std::function<ProbeOutcome(const Rat&)>& probe, const Rat& start,
                       const Rat& floor_v, const Rat& tol, Budget budget) {
    SideResult r;
    r.best = start;
    Rat hi = start, lo = floor_v;
    // quick exit: the boundary itself may be optimal
    {
        Rat cand = hi - tol;
        if (cand <= lo) return r;
        ProbeOutcome o = probe(cand);
        ++r.probes;
        if (o.timeout) {
            r.timeout = true;
            return r;
        }
        if (!o.feasible) return r;  // start is already tight to tolerance
        r.best = cand;
        hi = cand;
    }
    while (hi - lo > tol) {
        if (budget.expired()) {
            r.timeout = true;
            return r;
        }
        Rat mid = (hi + lo) / 2;
        ProbeOutcome o = probe(mid);
        ++r.probes;
        if (o.timeout) {
            r.timeout = true;
            return r;
        }
        if (o.feasible) {
            hi = mid;
            r.best = mid;
        } else {
            lo = mid;
        }
    }
    return r;
}

} // namespace

SearchResult strategy_s2(const ProbeFn& probe_up, const ProbeFn& probe_low, const ProbeFn& probe_joint,
                         const Rat& lo0, const Rat& hi0, const Rat& tol, Clock::time_point deadline) {
    SearchResult res;
    Budget budget{deadline};

    ProbeOutcome first = probe_joint(hi0, lo0);
    res.probes = 1;
    if (first.timeout) {
        res.timeout = true;
        res.message = "timeout on the initial probe";
        return res;
    }
    if (!first.feasible) {
        res.message = "initial probe infeasible: the coarse invariant does not support any certificate";
        return res;
    }

    // The two sides bind independent constraint copies, so they can run
    // concurrently. The low search runs on negated values so the same
    // search-down loop applies.
    auto up_task = std::async(std::launch::async, [&] {
        return search_down([&](const Rat& u) { return probe_up(u, lo0); }, hi0, lo0, tol, budget);
    });
    auto low_task = std::async(std::launch::async, [&] {
        return search_down([&](const Rat& nl) { return probe_low(hi0, Rat(-nl)); }, Rat(-lo0),
                           Rat(-hi0), tol, budget);
    });
    SideResult su = up_task.get();
    SideResult sl = low_task.get();
    if (su.timeout || sl.timeout) {
        res.timeout = true;
        res.message = "timeout during binary search";
        return res;
    }
    res.probes += su.probes + sl.probes;
    res.up = su.best;
    res.low = -sl.best;

    ProbeOutcome joint = probe_joint(res.up, res.low);
    ++res.probes;
    if (joint.timeout) {
        res.timeout = true;
        return res;
    }
    if (!joint.feasible) {
        // monotonicity makes this unreachable in exact arithmetic; widen one
        // tolerance step as a stopgap rather than fail
        res.up = res.up + tol;
        res.low = res.low - tol;
        joint = probe_joint(res.up, res.low);
        ++res.probes;
        if (!joint.feasible) {
            res.message = "joint probe infeasible after independent searches";
            return res;
        }
    }
    res.ok = true;
    res.final_probe = std::move(joint);
    return res;
}

SearchResult strategy_s1(const ProbeFn& probe_up, const ProbeFn& probe_low, const ProbeFn& probe_joint,
                         const Rat& lo0, const Rat& hi0, const Rat& tol, Clock::time_point deadline) {
    // Seed with a coarse S2 pass.
    Rat coarse_tol = (hi0 - lo0) / 64;
    if (coarse_tol < tol) coarse_tol = tol;
    SearchResult seed = strategy_s2(probe_up, probe_low, probe_joint, lo0, hi0, coarse_tol, deadline);
    if (!seed.ok) return seed;

    SearchResult res = seed;
    Budget budget{deadline};
    // Shrink both sides together while feasibility holds.
    Rat h = (res.up - res.low) / 8;
    while (h >= tol) {
        if (budget.expired()) {
            res.timeout = true;
            return res;
        }
        if (res.up - h <= res.low + h) {
            h = h / 2;
            continue;
        }
        ProbeOutcome o = probe_joint(res.up - h, res.low + h);
        ++res.probes;
        if (o.timeout) {
            res.timeout = true;
            return res;
        }
        if (o.feasible && res.up - h > res.low + h) {
            res.up = res.up - h;
            res.low = res.low + h;
            res.final_probe = std::move(o);
        } else {
            h = h / 2;
        }
    }
    // Per-side polish at full tolerance.
    SearchResult fine = strategy_s2(probe_up, probe_low, probe_joint, res.low, res.up, tol, deadline);
    return fine.ok ? fine : res;
}

long sample_inductiveness(const InductivenessInput& in, long n_transitions, uint64_t seed) {
    const cfg::FpCfg& g = *in.g;
    const fp::FloatFormat& fmt = *in.fmt;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    fp::Box ib = coarse::init_box(g);
    int n = g.vars.size();

    auto eta_of = [&](int loc) -> const Poly* {
        for (size_t i = 0; i < in.template_locs.size(); ++i)
            if (in.template_locs[i] == loc) return &in.eta[i];
        return nullptr;
    };

    struct TransSim {
        const cfg::Transition* tr;
        fp::AbstractedFunction absf;
    };
    std::vector<TransSim> sims;
    for (auto& t : g.transitions) sims.push_back(TransSim{&t, fp::abstract_update(t.update)});

    double eps = rat_to_double(fmt.eps), delta = rat_to_double(fmt.delta);
    long violations = 0, done = 0;
    const int path_cap = 512;

    while (done < n_transitions) {
        // sample an initial state
        std::vector<double> x(static_cast<size_t>(n));
        bool ok = false;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            for (int v = 0; v < n; ++v) {
                double lo = rat_to_double(ib.iv[static_cast<size_t>(v)].first);
                double hi = rat_to_double(ib.iv[static_cast<size_t>(v)].second);
                x[static_cast<size_t>(v)] = lo + (hi - lo) * uni(rng);
                if (g.kinds[static_cast<size_t>(v)] == lang::Kind::Int)
                    x[static_cast<size_t>(v)] = std::floor(x[static_cast<size_t>(v)] + 0.5);
            }
            ok = true;
            for (auto& a : g.init)
                if (a.poly.eval_d(x) < -1e-12) {
                    ok = false;
                    break;
                }
        }
        if (!ok) break;

        int loc = g.initial;
        if (const Poly* e = eta_of(loc))
            if (e->eval_d(x) < -1e-9) ++violations;

        for (int step = 0; step < path_cap && done < n_transitions; ++step) {
            // first transition whose guard holds on the current state
            const TransSim* chosen = nullptr;
            for (auto& s : sims) {
                if (s.tr->src != loc) continue;
                bool pass = true;
                for (auto& a : s.tr->guard) {
                    RatFunc l = cfg::expr_to_ratfunc(a.a1), r = cfg::expr_to_ratfunc(a.a2);
                    double dv = r.num.eval_d(x) / r.den.eval_d(x) - l.num.eval_d(x) / l.den.eval_d(x);
                    if (a.strict ? dv <= 0 : dv < 0) {
                        pass = false;
                        break;
                    }
                }
                if (pass) {
                    chosen = &s;
                    break;
                }
            }
            if (!chosen) break;
            std::vector<double> e(static_cast<size_t>(chosen->absf.n_err)),
                d(static_cast<size_t>(chosen->absf.n_err));
            for (int i = 0; i < chosen->absf.n_err; ++i) {
                e[static_cast<size_t>(i)] = (2 * uni(rng) - 1) * eps;
                d[static_cast<size_t>(i)] = (2 * uni(rng) - 1) * delta;
            }
            std::vector<double> nx(static_cast<size_t>(n));
            for (int v = 0; v < n; ++v)
                nx[static_cast<size_t>(v)] = fp::eval_sampled(chosen->absf.coords[static_cast<size_t>(v)], x, e, d);
            x = std::move(nx);
            loc = chosen->tr->tgt;
            ++done;
            if (const Poly* et = eta_of(loc))
                if (et->eval_d(x) < -1e-9) ++violations;
            if (loc == g.terminal) break;
        }
    }
    return violations;
}

} // namespace fpinv::solve
