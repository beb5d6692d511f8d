#include "fpinv/cfg.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace fpinv::cfg {

using lang::Cond;
using lang::CondPtr;
using lang::Expr;
using lang::ExprPtr;
using lang::Kind;
using lang::Stmt;
using lang::StmtPtr;

namespace {

// ---- guard normalization -------------------------------------------------

GuardAtom make_atom(const ExprPtr& a1, const ExprPtr& a2, bool strict) {
    GuardAtom g;
    g.a1 = a1;
    g.a2 = a2;
    g.strict = strict;
    g.int_kind = a1->kind == Kind::Int && a2->kind == Kind::Int;
    return g;
}

// Negation-normal form with atom-level negation, then DNF clauses.
void dnf(const CondPtr& c, bool neg, std::vector<GuardConj>& out) {
    switch (c->tag) {
        case Cond::Tag::Atom: {
            GuardAtom a = neg ? make_atom(c->a2, c->a1, !c->strict) : make_atom(c->a1, c->a2, c->strict);
            for (auto& clause : out) clause.push_back(a);
            return;
        }
        case Cond::Tag::Not: return dnf(c->c1, !neg, out);
        case Cond::Tag::And:
        case Cond::Tag::Or: {
            bool conj = (c->tag == Cond::Tag::And) != neg;
            if (conj) {
                dnf(c->c1, neg, out);
                dnf(c->c2, neg, out);
            } else {
                std::vector<GuardConj> left = out, right = out;
                dnf(c->c1, neg, left);
                dnf(c->c2, neg, right);
                out = std::move(left);
                out.insert(out.end(), right.begin(), right.end());
            }
            return;
        }
    }
}

// Constant atoms decide now; a false constant atom kills its clause.
bool prune_clause(GuardConj& clause) {
    GuardConj kept;
    for (auto& a : clause) {
        auto c1 = a.a1->op == Expr::Op::Const ? std::optional<Rat>(a.a1->value) : std::nullopt;
        auto c2 = a.a2->op == Expr::Op::Const ? std::optional<Rat>(a.a2->value) : std::nullopt;
        if (c1 && c2) {
            bool holds = a.strict ? (*c1 < *c2) : (*c1 <= *c2);
            if (!holds) return false;
            continue;  // trivially true
        }
        kept.push_back(a);
    }
    clause = std::move(kept);
    return true;
}

std::vector<GuardConj> guard_clauses(const CondPtr& c, bool neg) {
    std::vector<GuardConj> out(1);
    dnf(c, neg, out);
    std::vector<GuardConj> pruned;
    for (auto& clause : out)
        if (prune_clause(clause)) pruned.push_back(std::move(clause));
    return pruned;
}

// ---- per-statement construction -------------------------------------------

struct Builder {
    const lang::SourceProgram& p;
    FpCfg g;

    explicit Builder(const lang::SourceProgram& prog) : p(prog) {
        g.vars = p.vars;
        g.kinds = p.var_kinds;
        g.init = lang::init_atoms(p);
        g.target = p.target;
        g.iterations = p.iterations;
        g.coarse_hints = p.coarse;
    }

    int fresh() { return g.n_locations++; }

    std::vector<ExprPtr> identity_update() const {
        std::vector<ExprPtr> u;
        u.reserve(static_cast<size_t>(p.vars.size()));
        for (int v = 0; v < p.vars.size(); ++v) {
            auto e = std::make_shared<Expr>();
            e->op = Expr::Op::Var;
            e->var = v;
            e->kind = p.var_kinds[static_cast<size_t>(v)];
            u.push_back(e);
        }
        return u;
    }

    void add_transition(int src, int tgt, GuardConj guard, std::vector<ExprPtr> update) {
        Transition t;
        t.src = src;
        t.tgt = tgt;
        t.guard = std::move(guard);
        t.update = std::move(update);
        g.transitions.push_back(std::move(t));
    }

    // Wires body between entry and exit; returns nothing. entry/exit exist.
    void build_block(const std::vector<StmtPtr>& body, int entry, int exit) {
        int cur = entry;
        for (size_t k = 0; k < body.size(); ++k) {
            int next = (k + 1 == body.size()) ? exit : fresh();
            build_stmt(body[k], cur, next);
            cur = next;
        }
        if (body.empty() && entry != exit) add_transition(entry, exit, {}, identity_update());
    }

    void build_stmt(const StmtPtr& s, int at, int next) {
        switch (s->tag) {
            case Stmt::Tag::Assign: {
                auto u = identity_update();
                u[static_cast<size_t>(s->var)] = s->rhs;
                add_transition(at, next, {}, std::move(u));
                return;
            }
            case Stmt::Tag::If: {
                int lt = fresh(), le = fresh();
                for (auto& clause : guard_clauses(s->cond, false))
                    add_transition(at, lt, clause, identity_update());
                for (auto& clause : guard_clauses(s->cond, true))
                    add_transition(at, le, clause, identity_update());
                build_block(s->then_body, lt, next);
                build_block(s->else_body, le, next);
                return;
            }
            case Stmt::Tag::While: {
                int lb = fresh();
                for (auto& clause : guard_clauses(s->cond, false))
                    add_transition(at, lb, clause, identity_update());
                for (auto& clause : guard_clauses(s->cond, true))
                    add_transition(at, next, clause, identity_update());
                build_block(s->body, lb, at);
                return;
            }
        }
    }
};

int count_rounding_sites(const ExprPtr& e) {
    if (e->op == Expr::Op::Var || e->op == Expr::Op::Const) return 0;
    return (e->rounds ? 1 : 0) + count_rounding_sites(e->a) + count_rounding_sites(e->b);
}

void assign_error_vars(FpCfg& g) {
    int next = 0;
    for (auto& t : g.transitions) {
        t.error_vars.clear();
        int n = 0;
        for (auto& e : t.update) n += count_rounding_sites(e);
        for (int k = 0; k < n; ++k) t.error_vars.push_back(next++);
    }
}

ExprPtr subst_expr(const ExprPtr& e, const std::vector<ExprPtr>& env) {
    switch (e->op) {
        case Expr::Op::Var: return env[static_cast<size_t>(e->var)];
        case Expr::Op::Const: return e;
        default: {
            auto out = std::make_shared<Expr>(*e);
            out->a = subst_expr(e->a, env);
            out->b = subst_expr(e->b, env);
            return out;
        }
    }
}

void collect_reads(const ExprPtr& e, const std::vector<ExprPtr>& env, std::set<int>& reads) {
    if (e->op == Expr::Op::Var) {
        // a read of the segment-entry value iff the env still holds the identity
        const ExprPtr& cur = env[static_cast<size_t>(e->var)];
        if (cur->op == Expr::Op::Var && cur->var == e->var) reads.insert(e->var);
        return;
    }
    if (e->op == Expr::Op::Const) return;
    collect_reads(e->a, env, reads);
    collect_reads(e->b, env, reads);
}

} // namespace

bool FpCfg::written(int var_index) const {
    for (auto& t : transitions) {
        const ExprPtr& u = t.update[static_cast<size_t>(var_index)];
        if (!(u->op == Expr::Op::Var && u->var == var_index)) return true;
    }
    return false;
}

FpCfg build_cfg(const lang::SourceProgram& p) {
    if (!p.classified) throw std::invalid_argument("build_cfg needs a classified program");
    Builder b(p);
    int entry = b.fresh();
    b.g.initial = entry;
    int term = b.fresh();
    b.g.terminal = term;
    b.build_block(p.body, entry, term);
    assign_error_vars(b.g);
    return std::move(b.g);
}

std::set<int> default_cutpoints(const FpCfg& g) {
    std::set<int> cuts{g.initial, g.terminal};
    // loop heads: targets of back edges; per-statement construction yields
    // while-entry locations as the only locations with a cycle through them.
    // A simple DFS marks them.
    std::map<int, std::vector<const Transition*>> out;
    for (auto& t : g.transitions) out[t.src].push_back(&t);
    std::vector<int> state(static_cast<size_t>(g.n_locations), 0);  // 0 new, 1 on stack, 2 done
    std::function<void(int)> dfs = [&](int loc) {
        state[static_cast<size_t>(loc)] = 1;
        for (auto* t : out[loc]) {
            if (state[static_cast<size_t>(t->tgt)] == 1)
                cuts.insert(t->tgt);
            else if (state[static_cast<size_t>(t->tgt)] == 0)
                dfs(t->tgt);
        }
        state[static_cast<size_t>(loc)] = 2;
    };
    dfs(g.initial);
    return cuts;
}

FpCfg summarize(const FpCfg& g, const std::set<int>& cutpoints) {
    if (!cutpoints.count(g.initial) || !cutpoints.count(g.terminal))
        throw std::invalid_argument("cut points must include the initial and termination locations");

    std::map<int, std::vector<const Transition*>> out;
    for (auto& t : g.transitions) out[t.src].push_back(&t);

    struct Segment {
        int src, tgt;
        GuardConj guard;
        std::vector<ExprPtr> update;
        std::set<int> reads;  // segment-entry variables read
    };
    std::vector<Segment> segments;

    // DFS over loop-free segments from each cut point.
    std::function<void(int, int, std::vector<ExprPtr>, GuardConj, std::set<int>, std::set<int>&)> walk =
        [&](int loc, int origin, std::vector<ExprPtr> env, GuardConj guard, std::set<int> reads,
            std::set<int>& on_path) {
            for (auto* t : out[loc]) {
                GuardConj guard2 = guard;
                std::set<int> reads2 = reads;
                for (auto& a : t->guard) {
                    GuardAtom ga = a;
                    collect_reads(a.a1, env, reads2);
                    collect_reads(a.a2, env, reads2);
                    ga.a1 = subst_expr(a.a1, env);
                    ga.a2 = subst_expr(a.a2, env);
                    guard2.push_back(ga);
                }
                std::vector<ExprPtr> env2(env.size());
                for (size_t j = 0; j < env.size(); ++j) {
                    const ExprPtr& u = t->update[j];
                    if (!(u->op == Expr::Op::Var && static_cast<size_t>(u->var) == j))
                        collect_reads(u, env, reads2);
                    env2[j] = subst_expr(u, env);
                }
                if (cutpoints.count(t->tgt)) {
                    segments.push_back(Segment{origin, t->tgt, guard2, env2, reads2});
                } else {
                    if (on_path.count(t->tgt))
                        throw std::runtime_error("cycle avoiding all cut points");
                    on_path.insert(t->tgt);
                    walk(t->tgt, origin, std::move(env2), std::move(guard2), std::move(reads2), on_path);
                    on_path.erase(t->tgt);
                }
            }
        };

    std::vector<ExprPtr> id;
    for (int v = 0; v < g.vars.size(); ++v) {
        auto e = std::make_shared<Expr>();
        e->op = Expr::Op::Var;
        e->var = v;
        e->kind = g.kinds[static_cast<size_t>(v)];
        id.push_back(e);
    }
    for (int cp : cutpoints) {
        if (cp == g.terminal) continue;
        std::set<int> on_path{cp};
        walk(cp, cp, id, {}, {}, on_path);
    }

    // Live variables: read at some segment entry, in the target, or mentioned
    // by the precondition of the initial location.
    std::set<int> live;
    for (auto& s : segments) live.insert(s.reads.begin(), s.reads.end());
    if (g.target >= 0) live.insert(g.target);
    for (auto& a : g.init)
        for (int v : a.poly.vars_used()) live.insert(v);

    FpCfg r;
    std::vector<int> order(live.begin(), live.end());
    std::sort(order.begin(), order.end());
    std::vector<int> remap(static_cast<size_t>(g.vars.size()), -1);
    for (int v : order) {
        remap[static_cast<size_t>(v)] = r.vars.intern(g.vars.name(v));
        r.kinds.push_back(g.kinds[static_cast<size_t>(v)]);
    }

    auto remap_expr = [&](const ExprPtr& e) {
        std::function<ExprPtr(const ExprPtr&)> go = [&](const ExprPtr& x) -> ExprPtr {
            if (x->op == Expr::Op::Var) {
                auto out = std::make_shared<Expr>(*x);
                out->var = remap[static_cast<size_t>(x->var)];
                if (out->var < 0) throw std::logic_error("dead variable read survived liveness");
                return out;
            }
            if (x->op == Expr::Op::Const) return x;
            auto out = std::make_shared<Expr>(*x);
            out->a = go(x->a);
            out->b = go(x->b);
            return out;
        };
        return go(e);
    };

    // Renumber locations densely over the cut points.
    std::map<int, int> locmap;
    for (int cp : cutpoints) {
        int id2 = static_cast<int>(locmap.size());
        locmap[cp] = id2;
    }
    r.initial = locmap[g.initial];
    r.terminal = locmap[g.terminal];
    r.n_locations = static_cast<int>(locmap.size());
    r.init = g.init;
    for (auto& a : r.init) {
        std::map<int, Poly> sub;
        for (int v : a.poly.vars_used()) sub[v] = Poly::variable(remap[static_cast<size_t>(v)]);
        a.poly = a.poly.subst(sub);
    }
    r.target = g.target >= 0 ? remap[static_cast<size_t>(g.target)] : -1;
    r.iterations = g.iterations;
    for (auto& ch : g.coarse_hints) {
        int nv = remap[static_cast<size_t>(ch.var)];
        if (nv >= 0) r.coarse_hints.push_back(lang::CoarseHint{nv, ch.lo, ch.hi});
    }

    for (auto& s : segments) {
        Transition t;
        t.src = locmap[s.src];
        t.tgt = locmap[s.tgt];
        for (auto& a : s.guard) {
            GuardAtom ga = a;
            ga.a1 = remap_expr(a.a1);
            ga.a2 = remap_expr(a.a2);
            t.guard.push_back(ga);
        }
        for (int v : order) t.update.push_back(remap_expr(s.update[static_cast<size_t>(v)]));
        r.transitions.push_back(std::move(t));
    }
    assign_error_vars(r);
    return r;
}

RatFunc expr_to_ratfunc(const lang::ExprPtr& e) {
    switch (e->op) {
        case Expr::Op::Var: return RatFunc::variable(e->var);
        case Expr::Op::Const: return RatFunc::constant(e->value);
        case Expr::Op::Add: return expr_to_ratfunc(e->a) + expr_to_ratfunc(e->b);
        case Expr::Op::Sub: return expr_to_ratfunc(e->a) - expr_to_ratfunc(e->b);
        case Expr::Op::Mul: return expr_to_ratfunc(e->a) * expr_to_ratfunc(e->b);
        case Expr::Op::Div: return expr_to_ratfunc(e->a) / expr_to_ratfunc(e->b);
    }
    throw std::logic_error("unreachable");
}

std::vector<RelaxedAtom> overapprox_guard(const GuardConj& guard, const BoundProvider& bound) {
    std::vector<RelaxedAtom> out;
    for (auto& a : guard) {
        RatFunc l = expr_to_ratfunc(a.a1), r = expr_to_ratfunc(a.a2);
        if (a.int_kind) {
            RatFunc h = r - l;
            if (a.strict) h = h - RatFunc::constant(Rat(1));  // a < b  =>  a <= b-1
            out.push_back(RelaxedAtom{h});
        } else {
            // strict first weakens to non-strict, then both sides slacken
            Poly g1 = bound(a.a1), g2 = bound(a.a2);
            RatFunc h = r - l + RatFunc(g1) + RatFunc(g2);
            out.push_back(RelaxedAtom{h});
        }
    }
    return out;
}

std::string FpCfg::dump() const {
    std::ostringstream os;
    for (int l = 0; l < n_locations; ++l) {
        os << "loc " << l;
        if (l == initial) os << " (initial)";
        if (l == terminal) os << " (termination)";
        os << "\n";
    }
    for (auto& t : transitions) {
        os << "trans " << t.src << " -> " << t.tgt << " [";
        bool first = true;
        for (auto& a : t.guard) {
            if (!first) os << " && ";
            first = false;
            os << lang::expr_str(a.a1, vars) << (a.strict ? " < " : " <= ") << lang::expr_str(a.a2, vars);
        }
        os << "] {";
        first = true;
        for (int v = 0; v < vars.size(); ++v) {
            const auto& u = t.update[static_cast<size_t>(v)];
            if (u->op == Expr::Op::Var && u->var == v) continue;  // identity
            if (!first) os << ", ";
            first = false;
            os << vars.name(v) << " := " << lang::expr_str(u, vars);
        }
        os << "} errvars={";
        for (size_t k = 0; k < t.error_vars.size(); ++k) os << (k ? "," : "") << t.error_vars[k];
        os << "}\n";
    }
    return os.str();
}

} // namespace fpinv::cfg
