#include "fpinv/ast.hpp"

#include <cctype>
#include <cstring>
#include <sstream>

namespace fpinv::lang {

ExprPtr Expr::mkvar(int v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Var;
    e->var = v;
    return e;
}

ExprPtr Expr::mkconst(const Rat& c, bool decimal) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const;
    e->value = c;
    e->decimal_literal = decimal;
    return e;
}

ExprPtr Expr::mk(Op op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

CondPtr Cond::atom(ExprPtr a1, ExprPtr a2, bool strict) {
    auto c = std::make_shared<Cond>();
    c->tag = Tag::Atom;
    c->a1 = std::move(a1);
    c->a2 = std::move(a2);
    c->strict = strict;
    return c;
}

CondPtr Cond::mk(Tag t, CondPtr c1, CondPtr c2) {
    auto c = std::make_shared<Cond>();
    c->tag = t;
    c->c1 = std::move(c1);
    c->c2 = std::move(c2);
    return c;
}

CondPtr Cond::truth() {
    return atom(Expr::mkconst(Rat(0), false), Expr::mkconst(Rat(0), false), false);
}

namespace {

struct Token {
    enum class T { Ident, Number, Punct, Pragma, End };
    T t;
    std::string text;
    Rat value;
    bool decimal = false;
    int line = 1, col = 1;
};

struct Lexer {
    std::string src;
    size_t pos = 0;
    int line = 1, col = 1;
    std::vector<Token> tokens;

    explicit Lexer(std::string s) : src(std::move(s)) { run(); }

    [[noreturn]] void fail(const std::string& m) const { throw ParseError(line, col, m); }

    char peek() const { return pos < src.size() ? src[pos] : '\0'; }
    char get() {
        char c = src[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    void run() {
        while (pos < src.size()) {
            char c = peek();
            if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
                get();
                continue;
            }
            if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
                while (pos < src.size() && peek() != '\n') get();
                continue;
            }
            Token tk;
            tk.line = line;
            tk.col = col;
            if (c == '#') {
                get();
                std::string name;
                while (std::isalpha(static_cast<unsigned char>(peek()))) name += get();
                tk.t = Token::T::Pragma;
                tk.text = name;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string name;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') name += get();
                tk.t = Token::T::Ident;
                tk.text = name;
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
                std::string num;
                bool dec = false;
                while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
                if (peek() == '.') {
                    dec = true;
                    num += get();
                    while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
                }
                if (peek() == 'e' || peek() == 'E') {
                    dec = true;
                    num += get();
                    if (peek() == '+' || peek() == '-') num += get();
                    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed exponent");
                    while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
                }
                tk.t = Token::T::Number;
                tk.text = num;
                tk.value = rat_parse(num);
                tk.decimal = dec;
            } else {
                static const char* puncts[] = {"<=", ">=", "==", "&&", "||", nullptr};
                tk.t = Token::T::Punct;
                bool two = false;
                for (int i = 0; puncts[i]; ++i) {
                    if (src.compare(pos, 2, puncts[i]) == 0) {
                        tk.text = puncts[i];
                        get();
                        get();
                        two = true;
                        break;
                    }
                }
                if (!two) {
                    if (std::strchr("+-*/^(){}[];,=<>!:", c) == nullptr) fail(std::string("unexpected character '") + c + "'");
                    tk.text = std::string(1, get());
                }
            }
            tokens.push_back(std::move(tk));
        }
        Token end;
        end.t = Token::T::End;
        end.line = line;
        end.col = col;
        tokens.push_back(std::move(end));
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t i = 0;
    SourceProgram prog;
    std::vector<std::string> pending_vars;  // referenced before declaration check

    explicit Parser(const std::string& text) : toks(Lexer(text).tokens) {}

    const Token& cur() const { return toks[i]; }
    [[noreturn]] void fail(const std::string& m) const { throw ParseError(cur().line, cur().col, m); }

    bool is_punct(const char* p) const { return cur().t == Token::T::Punct && cur().text == p; }
    bool is_ident(const char* p) const { return cur().t == Token::T::Ident && cur().text == p; }
    void expect(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'");
        ++i;
    }
    std::string expect_ident() {
        if (cur().t != Token::T::Ident) fail("expected identifier");
        return toks[i++].text;
    }

    int lookup_var(const std::string& name) {
        int v = prog.vars.find(name);
        if (v < 0) fail("undeclared variable '" + name + "'");
        return v;
    }

    // expr := term (('+'|'-') term)*
    // term := factor (('*'|'/') factor)*
    // factor := ('-')* atom ('^' int)?
    // atom := number | ident | '(' expr ')'
    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (is_punct("+") || is_punct("-")) {
            bool add = cur().text == "+";
            ++i;
            e = Expr::mk(add ? Expr::Op::Add : Expr::Op::Sub, e, parse_term());
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (is_punct("*") || is_punct("/")) {
            bool mul = cur().text == "*";
            ++i;
            e = Expr::mk(mul ? Expr::Op::Mul : Expr::Op::Div, e, parse_factor());
        }
        return e;
    }

    ExprPtr parse_factor() {
        if (is_punct("-")) {
            ++i;
            ExprPtr inner = parse_factor();
            if (inner->op == Expr::Op::Const)
                return Expr::mkconst(Rat(-inner->value), inner->decimal_literal);
            return Expr::mk(Expr::Op::Sub, Expr::mkconst(Rat(0), false), inner);
        }
        ExprPtr e = parse_atom();
        while (is_punct("^")) {
            ++i;
            if (cur().t != Token::T::Number || cur().decimal) fail("'^' needs a nonnegative integer exponent");
            Rat k = cur().value;
            if (k < 0 || k.get_den() != 1) fail("'^' needs a nonnegative integer exponent");
            unsigned long n = k.get_num().get_ui();
            ++i;
            // expand to repeated multiplication; each '*' is one rounding site
            if (n == 0) {
                e = Expr::mkconst(Rat(1), false);
            } else {
                ExprPtr base = e;
                for (unsigned long j = 1; j < n; ++j) e = Expr::mk(Expr::Op::Mul, e, base);
            }
        }
        return e;
    }

    ExprPtr parse_atom() {
        if (cur().t == Token::T::Number) {
            Token t = toks[i++];
            return Expr::mkconst(t.value, t.decimal);
        }
        if (cur().t == Token::T::Ident) {
            std::string name = expect_ident();
            return Expr::mkvar(lookup_var(name));
        }
        if (is_punct("(")) {
            ++i;
            ExprPtr e = parse_expr();
            expect(")");
            return e;
        }
        fail("expected expression");
    }

    // rel := '<=' | '<' | '>=' | '>' | '=='
    CondPtr parse_atom_cond() {
        ExprPtr a = parse_expr();
        if (is_punct("<=")) {
            ++i;
            return Cond::atom(a, parse_expr(), false);
        }
        if (is_punct("<")) {
            ++i;
            return Cond::atom(a, parse_expr(), true);
        }
        if (is_punct(">=")) {
            ++i;
            return Cond::atom(parse_expr(), a, false);
        }
        if (is_punct(">")) {
            ++i;
            return Cond::atom(parse_expr(), a, true);
        }
        if (is_punct("==")) {
            ++i;
            ExprPtr b = parse_expr();
            return Cond::mk(Cond::Tag::And, Cond::atom(a, b, false), Cond::atom(b, a, false));
        }
        fail("expected relation");
    }

    CondPtr parse_cond() { return parse_disj(); }

    CondPtr parse_disj() {
        CondPtr c = parse_conj();
        while (is_punct("||")) {
            ++i;
            c = Cond::mk(Cond::Tag::Or, c, parse_conj());
        }
        return c;
    }

    CondPtr parse_conj() {
        CondPtr c = parse_neg();
        while (is_punct("&&")) {
            ++i;
            c = Cond::mk(Cond::Tag::And, c, parse_neg());
        }
        return c;
    }

    CondPtr parse_neg() {
        if (is_punct("!")) {
            ++i;
            return Cond::mk(Cond::Tag::Not, parse_neg(), nullptr);
        }
        if (is_ident("true") || is_ident("True")) {
            ++i;
            return Cond::truth();
        }
        // Backtracking: '(' may open a parenthesized condition or an
        // arithmetic subexpression of an atom.
        if (is_punct("(")) {
            size_t save = i;
            ++i;
            try {
                CondPtr c = parse_disj();
                expect(")");
                return c;
            } catch (const ParseError&) {
                i = save;
            }
        }
        return parse_atom_cond();
    }

    StmtPtr parse_stmt() {
        if (is_ident("if")) {
            ++i;
            expect("(");
            auto s = std::make_shared<Stmt>();
            s->tag = Stmt::Tag::If;
            s->cond = parse_cond();
            expect(")");
            s->then_body = parse_block();
            if (is_ident("else")) {
                ++i;
                s->else_body = parse_block();
            }
            return s;
        }
        if (is_ident("while")) {
            ++i;
            expect("(");
            auto s = std::make_shared<Stmt>();
            s->tag = Stmt::Tag::While;
            s->cond = parse_cond();
            expect(")");
            s->body = parse_block();
            return s;
        }
        if (cur().t == Token::T::Ident) {
            std::string name = expect_ident();
            if (is_punct("(")) fail("function calls are not supported");
            auto s = std::make_shared<Stmt>();
            s->tag = Stmt::Tag::Assign;
            s->var = lookup_var(name);
            expect("=");
            s->rhs = parse_expr();
            if (is_punct("(")) fail("function calls are not supported");
            expect(";");
            return s;
        }
        fail("expected statement");
    }

    std::vector<StmtPtr> parse_block() {
        expect("{");
        std::vector<StmtPtr> body;
        while (!is_punct("}")) body.push_back(parse_stmt());
        expect("}");
        return body;
    }

    void parse_pragma() {
        std::string name = toks[i++].text;
        if (name == "precondition") {
            expect(":");
            for (;;) {
                CondPtr c = parse_atom_cond();
                flatten_pre(c);
                if (is_punct("&&"))
                    ++i;
                else
                    break;
            }
        } else if (name == "coarse") {
            expect(":");
            for (;;) {
                std::string v = expect_ident();
                if (!is_ident("in")) fail("expected 'in'");
                ++i;
                expect("[");
                Rat lo = parse_signed_number();
                expect(",");
                Rat hi = parse_signed_number();
                expect("]");
                prog.coarse.push_back(CoarseHint{lookup_var(v), lo, hi});
                if (is_punct(","))
                    ++i;
                else
                    break;
            }
        } else if (name == "target") {
            expect(":");
            pending_target = expect_ident();
        } else if (name == "iterations") {
            expect(":");
            if (cur().t != Token::T::Number || cur().decimal) fail("expected integer iteration bound");
            prog.iterations = static_cast<long>(toks[i++].value.get_num().get_si());
        } else {
            fail("unknown pragma '#" + name + "'");
        }
    }

    Rat parse_signed_number() {
        bool neg = false;
        if (is_punct("-")) {
            neg = true;
            ++i;
        }
        if (cur().t != Token::T::Number) fail("expected number");
        Rat v = toks[i++].value;
        return neg ? Rat(-v) : v;
    }

    // Pragmas precede declarations, so variable references in them are
    // resolved after the declaration section.
    struct PendingAtom {
        ExprPtr a1, a2;
        SurfaceAtom::Rel rel;
    };
    std::vector<PendingAtom> pending_atoms;
    std::string pending_target;

    void flatten_pre(const CondPtr& c) {
        if (c->tag == Cond::Tag::Atom) {
            pending_atoms.push_back(PendingAtom{c->a1, c->a2, c->strict ? SurfaceAtom::Rel::Lt : SurfaceAtom::Rel::Le});
        } else if (c->tag == Cond::Tag::And) {
            // '==' arrives as And of two Le atoms; collapse back to Eq when
            // the two sides mirror each other.
            if (c->c1->tag == Cond::Tag::Atom && c->c2->tag == Cond::Tag::Atom && !c->c1->strict && !c->c2->strict &&
                expr_equal(c->c1->a1, c->c2->a2) && expr_equal(c->c1->a2, c->c2->a1)) {
                pending_atoms.push_back(PendingAtom{c->c1->a1, c->c1->a2, SurfaceAtom::Rel::Eq});
            } else {
                flatten_pre(c->c1);
                flatten_pre(c->c2);
            }
        } else {
            fail("precondition atoms must be conjunctive");
        }
    }

    // Pragma expressions are parsed before declarations exist; variables in
    // them are interned provisionally and validated afterwards.
    SourceProgram run() {
        // Pass 1: scan pragmas with a provisional variable table.
        bool saw_pre = false;
        while (cur().t == Token::T::Pragma) {
            if (cur().text == "precondition") saw_pre = true;
            parse_pragma_provisional();
        }
        if (!saw_pre) throw ParseError(cur().line, cur().col, "missing '#precondition' pragma");

        // Declarations.
        while (is_ident("int") || is_ident("float")) {
            Kind k = is_ident("int") ? Kind::Int : Kind::Float;
            ++i;
            std::string name = expect_ident();
            if (prog.vars.find(name) >= 0) fail("variable '" + name + "' declared twice");
            int v = prog.vars.intern(name);
            prog.var_kinds.push_back(k);
            (void)v;
            ExprPtr init;
            if (is_punct("=")) {
                ++i;
                init = parse_expr_names_only();
                decl_inits.emplace_back(name, init);
            }
            expect(";");
        }

        // Statements.
        while (cur().t != Token::T::End) prog.body.push_back(parse_stmt());

        resolve_pragmas();
        fold_initializers();
        validate();
        return std::move(prog);
    }

    // During pass 1 variable names cannot be resolved yet; pragma atom
    // expressions are therefore re-parsed from saved token ranges.
    struct SavedRange {
        std::string pragma;
        size_t begin, end;
    };
    std::vector<SavedRange> saved_pragmas;
    std::vector<std::pair<std::string, ExprPtr>> decl_inits;

    void parse_pragma_provisional() {
        size_t begin = i;
        std::string name = cur().text;
        ++i;
        // Skip to next pragma / first declaration keyword at top level.
        while (cur().t != Token::T::End && cur().t != Token::T::Pragma &&
               !(cur().t == Token::T::Ident && (cur().text == "int" || cur().text == "float")))
            ++i;
        saved_pragmas.push_back(SavedRange{name, begin, i});
    }

    ExprPtr parse_expr_names_only() { return parse_expr(); }

    void resolve_pragmas() {
        size_t keep = i;
        for (auto& sp : saved_pragmas) {
            i = sp.begin;
            parse_pragma();
            if (i != sp.end) fail("trailing tokens in pragma");
        }
        i = keep;
        for (auto& pa : pending_atoms) prog.precondition.push_back(SurfaceAtom{pa.a1, pa.a2, pa.rel});
        if (!pending_target.empty()) prog.target = lookup_var(pending_target);
    }

    // Declaration initializers and leading constant assignments become
    // precondition equalities: the loop head is the initial location.
    void fold_initializers() {
        auto add_equality = [this](int var, const Rat& c, bool decimal) {
            // drop earlier atoms that mention the overwritten variable
            ExprPtr ve = Expr::mkvar(var);
            std::erase_if(prog.precondition, [&](const SurfaceAtom& a) {
                return expr_mentions(a.a1, var) || expr_mentions(a.a2, var);
            });
            prog.precondition.push_back(SurfaceAtom{ve, Expr::mkconst(c, decimal), SurfaceAtom::Rel::Eq});
        };
        for (auto& [name, e] : decl_inits) {
            auto [c, dec] = const_value(e);
            add_equality(prog.vars.find(name), c, dec);
        }
        while (!prog.body.empty() && prog.body.front()->tag == Stmt::Tag::Assign) {
            auto& s = prog.body.front();
            auto cv = try_const_value(s->rhs);
            if (!cv) break;
            add_equality(s->var, cv->first, cv->second);
            prog.body.erase(prog.body.begin());
        }
    }

    static bool expr_mentions(const ExprPtr& e, int var) {
        if (!e) return false;
        if (e->op == Expr::Op::Var) return e->var == var;
        return expr_mentions(e->a, var) || expr_mentions(e->b, var);
    }

    std::pair<Rat, bool> const_value(const ExprPtr& e) {
        auto v = try_const_value(e);
        if (!v) fail("initializer must be a constant expression");
        return *v;
    }

    std::optional<std::pair<Rat, bool>> try_const_value(const ExprPtr& e) {
        if (e->op == Expr::Op::Const) return std::make_pair(e->value, e->decimal_literal);
        if (e->op == Expr::Op::Var) return std::nullopt;
        auto a = try_const_value(e->a), b = try_const_value(e->b);
        if (!a || !b) return std::nullopt;
        bool dec = a->second || b->second;
        switch (e->op) {
            case Expr::Op::Add: return std::make_pair(a->first + b->first, dec);
            case Expr::Op::Sub: return std::make_pair(a->first - b->first, dec);
            case Expr::Op::Mul: return std::make_pair(a->first * b->first, dec);
            case Expr::Op::Div:
                if (b->first == 0) fail("constant division by zero");
                return std::make_pair(a->first / b->first, true);
            default: return std::nullopt;
        }
    }

    void validate() {
        if (prog.target >= 0 && prog.target >= prog.vars.size()) fail("bad target variable");
        for (auto& ch : prog.coarse)
            if (ch.lo > ch.hi) fail("empty coarse interval");
    }
};

} // namespace

SourceProgram parse_program(const std::string& text) { return Parser(text).run(); }

bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->op != y->op) return false;
    switch (x->op) {
        case Expr::Op::Var: return x->var == y->var;
        case Expr::Op::Const: return x->value == y->value;
        default: return expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
    }
}

Poly expr_to_poly(const ExprPtr& e) {
    switch (e->op) {
        case Expr::Op::Var: return Poly::variable(e->var);
        case Expr::Op::Const: return Poly(e->value);
        case Expr::Op::Add: return expr_to_poly(e->a) + expr_to_poly(e->b);
        case Expr::Op::Sub: return expr_to_poly(e->a) - expr_to_poly(e->b);
        case Expr::Op::Mul: return expr_to_poly(e->a) * expr_to_poly(e->b);
        case Expr::Op::Div: {
            Poly d = expr_to_poly(e->b);
            if (!d.is_constant() || d.is_zero()) throw std::domain_error("expression is not polynomial");
            return expr_to_poly(e->a) * Rat(1 / d.constant_term());
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<InitAtom> init_atoms(const SourceProgram& p) {
    std::vector<InitAtom> atoms;
    for (auto& a : p.precondition) {
        Poly l = expr_to_poly(a.a1), r = expr_to_poly(a.a2);
        switch (a.rel) {
            case SurfaceAtom::Rel::Le: atoms.push_back(InitAtom{r - l, false}); break;
            case SurfaceAtom::Rel::Lt: atoms.push_back(InitAtom{r - l, true}); break;
            case SurfaceAtom::Rel::Eq:
                atoms.push_back(InitAtom{r - l, false});
                atoms.push_back(InitAtom{l - r, false});
                break;
        }
    }
    return atoms;
}

} // namespace fpinv::lang
