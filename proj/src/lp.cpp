#include "fpinv/lp.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fpinv::lp {

LpProblem from_cert_system(const pos::LinearCertSystem& sys, const cons::Registry& reg) {
    LpProblem p;
    for (int i = 0; i < reg.size(); ++i) {
        p.names.push_back(reg.name(i));
        p.nonneg.push_back(reg.nonneg(i));
    }
    for (auto& row : sys.rows) {
        LpProblem::Row r;
        std::map<int, Rat> acc;
        for (auto& t : row.lambda_terms) {
            if (!t.params.is_one())
                throw std::domain_error("bilinear certificate row cannot be turned into an LP row");
            acc[t.lambda] += t.coef;
        }
        for (auto& [id, c] : row.aff.lin) acc[id] += c;
        r.rhs = -row.aff.k;
        for (auto& [id, c] : acc)
            if (c != 0) r.terms.emplace_back(id, c);
        if (r.terms.empty() && r.rhs == 0) continue;
        p.rows.push_back(std::move(r));
    }
    return p;
}

// ---- reference simplex -------------------------------------------------------

namespace {

struct Presolved {
    // var -> fixed value (nullopt: still free)
    std::vector<std::optional<Rat>> fixed;
    std::vector<LpProblem::Row> rows;
    bool infeasible = false;
};

Presolved presolve(const LpProblem& p) {
    Presolved out;
    out.fixed.resize(static_cast<size_t>(p.nvars()));
    std::vector<LpProblem::Row> rows = p.rows;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<LpProblem::Row> next;
        for (auto& row : rows) {
            LpProblem::Row r;
            r.rhs = row.rhs;
            for (auto& [v, c] : row.terms) {
                if (out.fixed[static_cast<size_t>(v)])
                    r.rhs -= c * *out.fixed[static_cast<size_t>(v)];
                else
                    r.terms.emplace_back(v, c);
            }
            if (r.terms.empty()) {
                if (r.rhs != 0) {
                    out.infeasible = true;
                    return out;
                }
                changed = true;
                continue;
            }
            if (r.terms.size() == 1) {
                auto [v, c] = r.terms[0];
                Rat val = r.rhs / c;
                if (p.nonneg[static_cast<size_t>(v)] && val < 0) {
                    out.infeasible = true;
                    return out;
                }
                out.fixed[static_cast<size_t>(v)] = val;
                changed = true;
                continue;
            }
            // all-positive (or all-negative) coefficients on nonnegative vars
            // with zero rhs force every variable in the row to zero
            if (r.rhs == 0) {
                bool all_pos = true, all_neg = true, all_nonneg_vars = true;
                for (auto& [v, c] : r.terms) {
                    if (!p.nonneg[static_cast<size_t>(v)]) all_nonneg_vars = false;
                    if (c < 0) all_pos = false;
                    if (c > 0) all_neg = false;
                }
                if (all_nonneg_vars && (all_pos || all_neg)) {
                    for (auto& [v, c] : r.terms) out.fixed[static_cast<size_t>(v)] = Rat(0);
                    changed = true;
                    continue;
                }
            }
            next.push_back(std::move(r));
        }
        rows = std::move(next);
    }
    out.rows = std::move(rows);
    return out;
}

struct Tableau {
    // max c x s.t. A x = b, x >= 0 (standard form after var splitting)
    int m = 0, n = 0;
    std::vector<std::vector<Rat>> a;  // m x n
    std::vector<Rat> b;               // m
    std::vector<Rat> cost;            // n (phase objective, to MINIMIZE)
    std::vector<int> basis;           // m, column index

    bool pivot(int row, int col) {
        Rat piv = a[static_cast<size_t>(row)][static_cast<size_t>(col)];
        if (piv == 0) return false;
        auto& ar = a[static_cast<size_t>(row)];
        Rat inv = 1 / piv;
        for (auto& x : ar) x *= inv;
        b[static_cast<size_t>(row)] *= inv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            Rat f = a[static_cast<size_t>(i)][static_cast<size_t>(col)];
            if (f == 0) continue;
            auto& ai = a[static_cast<size_t>(i)];
            for (int j = 0; j < n; ++j)
                if (ar[static_cast<size_t>(j)] != 0) ai[static_cast<size_t>(j)] -= f * ar[static_cast<size_t>(j)];
            b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(row)];
        }
        basis[static_cast<size_t>(row)] = col;
        return true;
    }
};

enum class SimplexResult { Optimal, Unbounded, Timeout };

// Minimizes cost over the tableau. Deterministic: Dantzig pricing first,
// permanent Bland switch after an iteration budget (anti-cycling). The
// reduced-cost row is maintained incrementally across pivots.
SimplexResult run_simplex(Tableau& t, const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    std::vector<Rat> z(static_cast<size_t>(t.n));
    for (int j = 0; j < t.n; ++j) {
        Rat r = t.cost[static_cast<size_t>(j)];
        for (int i = 0; i < t.m; ++i) {
            const Rat& aij = t.a[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (aij != 0) r -= t.cost[static_cast<size_t>(t.basis[static_cast<size_t>(i)])] * aij;
        }
        z[static_cast<size_t>(j)] = r;
    }
    long iter = 0;
    long bland_after = 200 + 20L * (t.m + t.n);
    for (;;) {
        if (deadline && std::chrono::steady_clock::now() > *deadline) return SimplexResult::Timeout;
        int enter = -1;
        if (iter > bland_after) {  // Bland: first improving column
            for (int j = 0; j < t.n; ++j)
                if (z[static_cast<size_t>(j)] < 0) {
                    enter = j;
                    break;
                }
        } else {
            const Rat* best = nullptr;
            for (int j = 0; j < t.n; ++j) {
                const Rat& rj = z[static_cast<size_t>(j)];
                if (rj < 0 && (!best || rj < *best)) {
                    enter = j;
                    best = &z[static_cast<size_t>(j)];
                }
            }
        }
        if (enter < 0) return SimplexResult::Optimal;
        int leave = -1;
        Rat best_ratio(0);
        for (int i = 0; i < t.m; ++i) {
            const Rat& aie = t.a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
            if (aie > 0) {
                Rat ratio = t.b[static_cast<size_t>(i)] / aie;
                if (leave < 0 || ratio < best_ratio ||
                    (ratio == best_ratio &&
                     t.basis[static_cast<size_t>(i)] < t.basis[static_cast<size_t>(leave)])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) return SimplexResult::Unbounded;
        Rat z_enter = z[static_cast<size_t>(enter)];
        t.pivot(leave, enter);
        // z' = z - z_enter * (pivot row after normalization)
        const auto& prow = t.a[static_cast<size_t>(leave)];
        for (int j = 0; j < t.n; ++j)
            if (prow[static_cast<size_t>(j)] != 0)
                z[static_cast<size_t>(j)] -= z_enter * prow[static_cast<size_t>(j)];
        ++iter;
    }
}

} // namespace

LpOutcome SimplexBackend::solve(const LpProblem& p) {
    LpOutcome out;
    Presolved ps = presolve(p);
    if (ps.infeasible) {
        out.status = LpStatus::Infeasible;
        return out;
    }

    // Standard-form columns: nonneg var -> one column; free var -> pos/neg pair.
    std::vector<int> col_of(static_cast<size_t>(p.nvars()), -1);
    std::vector<int> negcol_of(static_cast<size_t>(p.nvars()), -1);
    int n = 0;
    std::vector<bool> used(static_cast<size_t>(p.nvars()), false);
    for (auto& row : ps.rows)
        for (auto& [v, c] : row.terms) used[static_cast<size_t>(v)] = true;
    if (!p.objective.empty())
        for (auto& [v, c] : p.objective)
            if (!ps.fixed[static_cast<size_t>(v)]) used[static_cast<size_t>(v)] = true;
    for (int v = 0; v < p.nvars(); ++v) {
        if (!used[static_cast<size_t>(v)] || ps.fixed[static_cast<size_t>(v)]) continue;
        col_of[static_cast<size_t>(v)] = n++;
        if (!p.nonneg[static_cast<size_t>(v)]) negcol_of[static_cast<size_t>(v)] = n++;
    }

    int m = static_cast<int>(ps.rows.size());
    Tableau t;
    t.m = m;
    t.n = n + m;  // artificials appended
    t.a.assign(static_cast<size_t>(m), std::vector<Rat>(static_cast<size_t>(t.n), Rat(0)));
    t.b.assign(static_cast<size_t>(m), Rat(0));
    t.basis.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        auto& row = ps.rows[static_cast<size_t>(i)];
        bool flip = row.rhs < 0;
        for (auto& [v, c] : row.terms) {
            Rat cc = flip ? Rat(-c) : c;
            t.a[static_cast<size_t>(i)][static_cast<size_t>(col_of[static_cast<size_t>(v)])] += cc;
            if (negcol_of[static_cast<size_t>(v)] >= 0)
                t.a[static_cast<size_t>(i)][static_cast<size_t>(negcol_of[static_cast<size_t>(v)])] -= cc;
        }
        t.b[static_cast<size_t>(i)] = flip ? Rat(-row.rhs) : row.rhs;
        t.a[static_cast<size_t>(i)][static_cast<size_t>(n + i)] = 1;
        t.basis[static_cast<size_t>(i)] = n + i;
    }

    // Phase 1: minimize the sum of artificials.
    t.cost.assign(static_cast<size_t>(t.n), Rat(0));
    for (int i = 0; i < m; ++i) t.cost[static_cast<size_t>(n + i)] = 1;
    SimplexResult r1 = run_simplex(t, deadline_);
    if (r1 == SimplexResult::Timeout) {
        out.status = LpStatus::Timeout;
        return out;
    }
    Rat art_sum(0);
    for (int i = 0; i < m; ++i)
        if (t.basis[static_cast<size_t>(i)] >= n) art_sum += t.b[static_cast<size_t>(i)];
    if (art_sum != 0) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    // Drive remaining degenerate artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
        if (t.basis[static_cast<size_t>(i)] < n) continue;
        for (int j = 0; j < n; ++j) {
            if (t.a[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0) {
                t.pivot(i, j);
                break;
            }
        }
    }

    // Rows whose basic variable is still artificial are redundant (their real
    // coefficients were eliminated); drop them and the artificial columns.
    Tableau t2;
    t2.n = n;
    for (int i = 0; i < m; ++i) {
        if (t.basis[static_cast<size_t>(i)] >= n) continue;
        std::vector<Rat> row(t.a[static_cast<size_t>(i)].begin(),
                             t.a[static_cast<size_t>(i)].begin() + n);
        t2.a.push_back(std::move(row));
        t2.b.push_back(t.b[static_cast<size_t>(i)]);
        t2.basis.push_back(t.basis[static_cast<size_t>(i)]);
    }
    t2.m = static_cast<int>(t2.a.size());

    auto extract = [&]() {
        std::vector<Rat> x(static_cast<size_t>(p.nvars()), Rat(0));
        std::vector<Rat> cols(static_cast<size_t>(n), Rat(0));
        for (int i = 0; i < t2.m; ++i)
            cols[static_cast<size_t>(t2.basis[static_cast<size_t>(i)])] = t2.b[static_cast<size_t>(i)];
        for (int v = 0; v < p.nvars(); ++v) {
            if (ps.fixed[static_cast<size_t>(v)]) {
                x[static_cast<size_t>(v)] = *ps.fixed[static_cast<size_t>(v)];
            } else if (col_of[static_cast<size_t>(v)] >= 0) {
                x[static_cast<size_t>(v)] = cols[static_cast<size_t>(col_of[static_cast<size_t>(v)])];
                if (negcol_of[static_cast<size_t>(v)] >= 0)
                    x[static_cast<size_t>(v)] -= cols[static_cast<size_t>(negcol_of[static_cast<size_t>(v)])];
            }
        }
        return x;
    };

    if (p.objective.empty()) {
        out.status = LpStatus::Feasible;
        out.assignment = extract();
        return out;
    }

    // Phase 2: maximize the objective = minimize its negation.
    t2.cost.assign(static_cast<size_t>(n), Rat(0));
    for (auto& [v, c] : p.objective) {
        if (ps.fixed[static_cast<size_t>(v)]) continue;
        t2.cost[static_cast<size_t>(col_of[static_cast<size_t>(v)])] -= c;
        if (negcol_of[static_cast<size_t>(v)] >= 0)
            t2.cost[static_cast<size_t>(negcol_of[static_cast<size_t>(v)])] += c;
    }
    SimplexResult r2 = run_simplex(t2, deadline_);
    if (r2 == SimplexResult::Timeout) {
        out.status = LpStatus::Timeout;
        return out;
    }
    if (r2 == SimplexResult::Unbounded) {
        out.status = LpStatus::Unbounded;
        return out;
    }
    out.status = LpStatus::Optimal;
    out.assignment = extract();
    out.objective_value = Rat(0);
    for (auto& [v, c] : p.objective) out.objective_value += c * out.assignment[static_cast<size_t>(v)];
    return out;
}

// ---- text seam ---------------------------------------------------------------

std::string dump_problem(const LpProblem& p) {
    std::ostringstream os;
    for (int v = 0; v < p.nvars(); ++v)
        os << "var " << p.names[static_cast<size_t>(v)] << (p.nonneg[static_cast<size_t>(v)] ? " nonneg" : " free")
           << "\n";
    for (int v = 0; v < p.nvars(); ++v)
        if (p.nonneg[static_cast<size_t>(v)]) os << p.names[static_cast<size_t>(v)] << " >= 0\n";
    for (auto& row : p.rows) {
        os << "eq";
        bool first = true;
        for (auto& [v, c] : row.terms) {
            os << (first ? " " : " + ") << rat_str(c) << "*" << p.names[static_cast<size_t>(v)];
            first = false;
        }
        if (first) os << " 0";
        os << " = " << rat_str(row.rhs) << "\n";
    }
    if (!p.objective.empty()) {
        os << "maximize";
        bool first = true;
        for (auto& [v, c] : p.objective) {
            os << (first ? " " : " + ") << rat_str(c) << "*" << p.names[static_cast<size_t>(v)];
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

namespace {

std::vector<std::pair<std::string, Rat>> parse_linear(const std::string& s) {
    // "<rat>*<name> + <rat>*<name> + ..."
    std::vector<std::pair<std::string, Rat>> terms;
    std::istringstream is(s);
    std::string tok;
    Rat sign(1);
    while (is >> tok) {
        if (tok == "+") {
            sign = 1;
            continue;
        }
        if (tok == "-") {
            sign = -1;
            continue;
        }
        auto star = tok.find('*');
        if (star == std::string::npos) {
            if (tok == "0") continue;
            throw std::invalid_argument("bad linear term: " + tok);
        }
        Rat c = rat_parse(tok.substr(0, star));
        terms.emplace_back(tok.substr(star + 1), sign * c);
        sign = 1;
    }
    return terms;
}

} // namespace

LpProblem parse_problem(std::istream& in) {
    LpProblem p;
    std::map<std::string, int> index;
    std::string line;
    auto var_id = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw std::invalid_argument("undeclared LP variable: " + name);
        return it->second;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string kw;
        is >> kw;
        if (kw == "var") {
            std::string name, mode;
            is >> name >> mode;
            index[name] = p.nvars();
            p.names.push_back(name);
            p.nonneg.push_back(mode == "nonneg");
        } else if (kw == "eq") {
            std::string rest;
            std::getline(is, rest);
            auto epos = rest.rfind('=');
            if (epos == std::string::npos) throw std::invalid_argument("eq row without '='");
            LpProblem::Row row;
            row.rhs = rat_parse(rest.substr(epos + 1));
            for (auto& [name, c] : parse_linear(rest.substr(0, epos)))
                row.terms.emplace_back(var_id(name), c);
            p.rows.push_back(std::move(row));
        } else if (kw == "maximize") {
            std::string rest;
            std::getline(is, rest);
            for (auto& [name, c] : parse_linear(rest)) p.objective.emplace_back(var_id(name), c);
        } else {
            // "<name> >= 0" sign lines
            std::string ge, zero;
            if ((is >> ge >> zero) && ge == ">=" && zero == "0") {
                auto it = index.find(kw);
                if (it != index.end()) p.nonneg[static_cast<size_t>(it->second)] = true;
            } else {
                throw std::invalid_argument("unrecognized LP line: " + line);
            }
        }
    }
    return p;
}

std::string dump_outcome(const LpOutcome& o, const LpProblem& p) {
    std::ostringstream os;
    switch (o.status) {
        case LpStatus::Optimal: os << "status optimal\n"; break;
        case LpStatus::Feasible: os << "status feasible\n"; break;
        case LpStatus::Infeasible: os << "status infeasible\n"; break;
        case LpStatus::Unbounded: os << "status unbounded\n"; break;
        case LpStatus::Timeout: os << "status timeout\n"; break;
    }
    if (!o.assignment.empty())
        for (int v = 0; v < p.nvars(); ++v)
            os << "var " << p.names[static_cast<size_t>(v)] << " " << rat_str(o.assignment[static_cast<size_t>(v)])
               << "\n";
    return os.str();
}

LpOutcome parse_outcome(std::istream& in, const LpProblem& p) {
    LpOutcome o;
    std::map<std::string, int> index;
    for (int v = 0; v < p.nvars(); ++v) index[p.names[static_cast<size_t>(v)]] = v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string kw;
        is >> kw;
        if (kw == "status") {
            std::string st;
            is >> st;
            if (st == "optimal") o.status = LpStatus::Optimal;
            else if (st == "feasible") o.status = LpStatus::Feasible;
            else if (st == "infeasible") o.status = LpStatus::Infeasible;
            else if (st == "unbounded") o.status = LpStatus::Unbounded;
            else o.status = LpStatus::Timeout;
            if (o.status == LpStatus::Optimal || o.status == LpStatus::Feasible)
                o.assignment.assign(static_cast<size_t>(p.nvars()), Rat(0));
        } else if (kw == "var") {
            std::string name, val;
            is >> name >> val;
            auto it = index.find(name);
            if (it != index.end() && !o.assignment.empty())
                o.assignment[static_cast<size_t>(it->second)] = rat_parse(val);
        }
    }
    return o;
}

LpOutcome PipeBackend::solve(const LpProblem& p) {
    std::string in_path = "/tmp/fpinv_lp_in.txt", out_path = "/tmp/fpinv_lp_out.txt";
    {
        std::ofstream f(in_path);
        f << dump_problem(p);
    }
    std::string cmd = command_ + " < " + in_path + " > " + out_path;
    int rc = std::system(cmd.c_str());
    if (rc != 0) throw std::runtime_error("external LP backend failed: " + command_);
    std::ifstream f(out_path);
    return parse_outcome(f, p);
}

} // namespace fpinv::lp
