// Kind classification, literal rounding to the analyzed float format, and
// the canonical pretty printer.

#include "fpinv/ast.hpp"

#include <sstream>

namespace fpinv::lang {

namespace {

// Round-to-nearest-even at p significand bits (emin for the subnormal range).
// Literal values in the analyzed program are exactly the rounded constants.
Rat round_to_format(const Rat& r, int p, int emin) {
    if (r == 0) return r;
    Rat a = rat_abs(r);
    // e with 2^e <= a < 2^(e+1)
    long e = static_cast<long>(mpz_sizeinbase(a.get_num().get_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(a.get_den().get_mpz_t(), 2));
    while (rat_pow2(static_cast<int>(e)) > a) --e;
    while (rat_pow2(static_cast<int>(e + 1)) <= a) ++e;
    long lsb = e - p + 1;  // exponent of the last kept bit
    if (lsb < emin - p + 1) lsb = emin - p + 1;
    Rat scaled = a / rat_pow2(static_cast<int>(lsb));
    mpz_class n = scaled.get_num() / scaled.get_den();  // floor
    Rat frac = scaled - Rat(n);
    if (frac > Rat(1, 2) || (frac == Rat(1, 2) && mpz_odd_p(n.get_mpz_t())))
        n += 1;
    Rat out = Rat(n) * rat_pow2(static_cast<int>(lsb));
    return r < 0 ? Rat(-out) : out;
}

struct Classifier {
    const SourceProgram& p;
    const FloatFormatSpec& fmt;

    Kind var_kind(int v) const { return p.var_kinds.at(static_cast<size_t>(v)); }

    ExprPtr expr(const ExprPtr& e) const {
        auto out = std::make_shared<Expr>(*e);
        switch (e->op) {
            case Expr::Op::Var:
                out->kind = var_kind(e->var);
                out->rounds = false;
                break;
            case Expr::Op::Const:
                if (e->decimal_literal) {
                    out->kind = Kind::Float;
                    out->value = round_to_format(e->value, fmt.precision_bits, min_exponent());
                } else {
                    out->kind = Kind::Int;
                }
                out->rounds = false;
                break;
            default: {
                out->a = expr(e->a);
                out->b = expr(e->b);
                bool int_op = out->a->kind == Kind::Int && out->b->kind == Kind::Int && e->op != Expr::Op::Div;
                out->kind = int_op ? Kind::Int : Kind::Float;
                out->rounds = !int_op;
            }
        }
        return out;
    }

    int min_exponent() const { return fmt.precision_bits == 24 ? -126 : -1022; }

    CondPtr cond(const CondPtr& c) const {
        if (!c) return c;
        auto out = std::make_shared<Cond>(*c);
        if (c->tag == Cond::Tag::Atom) {
            out->a1 = expr(c->a1);
            out->a2 = expr(c->a2);
        } else {
            out->c1 = cond(c->c1);
            out->c2 = cond(c->c2);
        }
        return out;
    }

    StmtPtr stmt(const StmtPtr& s) const {
        auto out = std::make_shared<Stmt>(*s);
        switch (s->tag) {
            case Stmt::Tag::Assign:
                out->rhs = expr(s->rhs);
                if (var_kind(s->var) == Kind::Int && out->rhs->kind == Kind::Float)
                    throw ParseError(0, 0, "int variable '" + p.vars.name(s->var) + "' assigned a float expression");
                break;
            case Stmt::Tag::If:
                out->cond = cond(s->cond);
                out->then_body = block(s->then_body);
                out->else_body = block(s->else_body);
                break;
            case Stmt::Tag::While:
                out->cond = cond(s->cond);
                out->body = block(s->body);
                break;
        }
        return out;
    }

    std::vector<StmtPtr> block(const std::vector<StmtPtr>& b) const {
        std::vector<StmtPtr> out;
        out.reserve(b.size());
        for (auto& s : b) out.push_back(stmt(s));
        return out;
    }
};

int prec_of(Expr::Op op) {
    switch (op) {
        case Expr::Op::Add:
        case Expr::Op::Sub: return 1;
        case Expr::Op::Mul:
        case Expr::Op::Div: return 2;
        default: return 3;
    }
}

// Exact decimal form; falls back to num/den when the denominator is not
// of the form 2^a 5^b (cannot happen for parsed literals).
std::string rat_decimal(const Rat& r) {
    mpz_class num = r.get_num(), den = r.get_den();
    if (den == 1) return num.get_str();
    mpz_class d = den;
    unsigned long twos = 0, fives = 0;
    while (mpz_even_p(d.get_mpz_t())) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d != 1) return num.get_str() + "/" + den.get_str();
    unsigned long k = std::max(twos, fives);
    mpz_class ten_k;
    mpz_ui_pow_ui(ten_k.get_mpz_t(), 10, k);
    mpz_class scaled = num * (ten_k / den);
    bool neg = scaled < 0;
    std::string digits = mpz_class(abs(scaled)).get_str();
    if (digits.size() <= k) digits.insert(0, k - digits.size() + 1, '0');
    digits.insert(digits.size() - k, ".");
    return (neg ? "-" : "") + digits;
}

void print_expr(std::ostringstream& os, const ExprPtr& e, const VarTable& vars, int parent_prec, bool right) {
    switch (e->op) {
        case Expr::Op::Var: os << vars.name(e->var); return;
        case Expr::Op::Const:
            if (e->value < 0)
                os << "(" << rat_decimal(e->value) << ")";
            else
                os << rat_decimal(e->value);
            return;
        default: break;
    }
    int prec = prec_of(e->op);
    bool need_paren = prec < parent_prec || (prec == parent_prec && right);
    if (need_paren) os << "(";
    const char* sym = e->op == Expr::Op::Add ? " + " : e->op == Expr::Op::Sub ? " - "
                      : e->op == Expr::Op::Mul ? "*" : "/";
    print_expr(os, e->a, vars, prec, false);
    os << sym;
    print_expr(os, e->b, vars, prec, true);
    if (need_paren) os << ")";
}

void print_cond(std::ostringstream& os, const CondPtr& c, const VarTable& vars) {
    switch (c->tag) {
        case Cond::Tag::Atom:
            print_expr(os, c->a1, vars, 0, false);
            os << (c->strict ? " < " : " <= ");
            print_expr(os, c->a2, vars, 0, false);
            break;
        case Cond::Tag::And:
            os << "(";
            print_cond(os, c->c1, vars);
            os << ") && (";
            print_cond(os, c->c2, vars);
            os << ")";
            break;
        case Cond::Tag::Or:
            os << "(";
            print_cond(os, c->c1, vars);
            os << ") || (";
            print_cond(os, c->c2, vars);
            os << ")";
            break;
        case Cond::Tag::Not:
            os << "!(";
            print_cond(os, c->c1, vars);
            os << ")";
            break;
    }
}

void print_block(std::ostringstream& os, const std::vector<StmtPtr>& body, const VarTable& vars, int indent) {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    for (auto& s : body) {
        switch (s->tag) {
            case Stmt::Tag::Assign: {
                os << pad << vars.name(s->var) << " = ";
                print_expr(os, s->rhs, vars, 0, false);
                os << ";\n";
                break;
            }
            case Stmt::Tag::If:
                os << pad << "if (";
                print_cond(os, s->cond, vars);
                os << ") {\n";
                print_block(os, s->then_body, vars, indent + 1);
                os << pad << "}";
                if (!s->else_body.empty()) {
                    os << " else {\n";
                    print_block(os, s->else_body, vars, indent + 1);
                    os << pad << "}";
                }
                os << "\n";
                break;
            case Stmt::Tag::While:
                os << pad << "while (";
                print_cond(os, s->cond, vars);
                os << ") {\n";
                print_block(os, s->body, vars, indent + 1);
                os << pad << "}\n";
                break;
        }
    }
}

} // namespace

SourceProgram classify_kinds(const SourceProgram& p, const FloatFormatSpec& fmt) {
    Classifier cl{p, fmt};
    SourceProgram out = p;
    out.body = cl.block(p.body);
    for (auto& a : out.precondition) {
        a.a1 = cl.expr(a.a1);
        a.a2 = cl.expr(a.a2);
    }
    out.classified = true;
    return out;
}

std::string pretty_print(const SourceProgram& p) {
    std::ostringstream os;
    if (!p.precondition.empty()) {
        os << "#precondition: ";
        bool first = true;
        for (auto& a : p.precondition) {
            if (!first) os << " && ";
            first = false;
            print_expr(os, a.a1, p.vars, 0, false);
            os << (a.rel == SurfaceAtom::Rel::Le ? " <= " : a.rel == SurfaceAtom::Rel::Lt ? " < " : " == ");
            print_expr(os, a.a2, p.vars, 0, false);
        }
        os << "\n";
    }
    if (!p.coarse.empty()) {
        os << "#coarse: ";
        bool first = true;
        for (auto& ch : p.coarse) {
            if (!first) os << ", ";
            first = false;
            os << p.vars.name(ch.var) << " in [" << rat_decimal(ch.lo) << ", " << rat_decimal(ch.hi) << "]";
        }
        os << "\n";
    }
    if (p.target >= 0) os << "#target: " << p.vars.name(p.target) << "\n";
    if (p.iterations >= 0) os << "#iterations: " << p.iterations << "\n";
    for (int v = 0; v < p.vars.size(); ++v)
        os << (p.var_kinds[static_cast<size_t>(v)] == Kind::Int ? "int " : "float ") << p.vars.name(v) << ";\n";
    print_block(os, p.body, p.vars, 0);
    return os.str();
}

std::string expr_str(const ExprPtr& e, const VarTable& vars) {
    std::ostringstream os;
    print_expr(os, e, vars, 0, false);
    return os.str();
}

} // namespace fpinv::lang
