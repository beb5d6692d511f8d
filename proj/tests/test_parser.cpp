#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpinv/ast.hpp"

#include <functional>
#include <random>

using namespace fpinv;
using namespace fpinv::lang;

namespace {

const char* EX1 = R"(#precondition: -1 <= i && i <= 1
#target: x
float x = 0;
float i;
while (true) {
  x = 1.5*x - 0.7*x + 1.6*i;
}
)";

const char* SINE = R"(#precondition: -1 <= x && x <= 1
#target: x
float x;
float px;
float qx;
int i = 0;
while (i < 10) {
  px = x - (x^3)/6 + (x^5)/120 + (x^7)/5040;
  qx = 1 - (x^2)/2 + (x^4)/24 + (x^6)/720;
  x = x - px/qx;
  i = i + 1;
}
)";

FloatFormatSpec f32{24};

int count_rounding(const ExprPtr& e) {
    if (e->op == Expr::Op::Var || e->op == Expr::Op::Const) return 0;
    return (e->rounds ? 1 : 0) + count_rounding(e->a) + count_rounding(e->b);
}

} // namespace

TEST_CASE("ex1 parses to one while with one assignment and folded precondition") {
    SourceProgram p = parse_program(EX1);
    REQUIRE(p.body.size() == 1);
    CHECK(p.body[0]->tag == Stmt::Tag::While);
    CHECK(p.body[0]->body.size() == 1);
    CHECK(p.target == p.vars.find("x"));

    REQUIRE(p.precondition.size() == 3);
    CHECK(p.precondition[2].rel == SurfaceAtom::Rel::Eq);

    auto atoms = init_atoms(p);
    CHECK(atoms.size() == 4);  // equality splits in two
}

TEST_CASE("statement prefix with constant rhs folds into the precondition") {
    SourceProgram p = parse_program(R"(#precondition: -1 <= i && i <= 1
#target: x
float x;
float i;
x = 0;
while (true) { x = 0.5*x + 0.5*i; }
)");
    CHECK(p.body.size() == 1);  // the x = 0 statement moved to Init
    CHECK(p.body[0]->tag == Stmt::Tag::While);
    bool has_eq = false;
    for (auto& a : p.precondition)
        if (a.rel == SurfaceAtom::Rel::Eq) has_eq = true;
    CHECK(has_eq);
}

TEST_CASE("empty body programs parse") {
    SourceProgram p = parse_program("#precondition: 0 <= x && x <= 1\n#target: x\nfloat x;\n");
    CHECK(p.body.empty());
}

TEST_CASE("sine listing has while guard i < 10 and four assignments") {
    SourceProgram p = parse_program(SINE);
    REQUIRE(p.body.size() == 1);
    auto& w = p.body[0];
    CHECK(w->tag == Stmt::Tag::While);
    CHECK(w->cond->tag == Cond::Tag::Atom);
    CHECK(w->cond->strict);
    CHECK(w->body.size() == 4);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_program("#precondition: 0 <= x\nfloat x;\ny = 1;\n"), ParseError);
    CHECK_THROWS_AS(parse_program("float x;\n"), ParseError);  // missing precondition
    CHECK_THROWS_AS(parse_program("#precondition: 0 <= x\nfloat x;\nx = f(1);\n"), ParseError);
    CHECK_THROWS_AS(parse_program("#precondition: 0 <= x\nfloat x;\nx = ;\n"), ParseError);
    try {
        parse_program("#precondition: 0 <= x\nfloat x;\nx = (1;\n");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("kind classification marks integer ops exact") {
    SourceProgram p = classify_kinds(parse_program(SINE), f32);
    auto& w = p.body[0];
    auto& inc = w->body[3];  // i = i + 1 with int i: rounding-free
    CHECK(inc->rhs->kind == Kind::Int);
    CHECK(count_rounding(inc->rhs) == 0);
    CHECK(count_rounding(w->body[2]->rhs) > 0);
}

TEST_CASE("ex1 loop body has five rounding operations") {
    SourceProgram p = classify_kinds(parse_program(EX1), f32);
    CHECK(count_rounding(p.body[0]->body[0]->rhs) == 5);
}

TEST_CASE("constant-only integer expressions fold exactly") {
    SourceProgram p = classify_kinds(parse_program(R"(#precondition: 0 <= i && i <= 1
#target: i
int i = 2*3;
while (true) { i = i + 1; }
)"),
                                     f32);
    bool found = false;
    for (auto& a : p.precondition)
        if (a.rel == SurfaceAtom::Rel::Eq) {
            CHECK(a.a2->value == Rat(6));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("int variable assigned a float expression is rejected") {
    auto p = parse_program(R"(#precondition: 0 <= i && i <= 1
#target: i
int i;
float y;
while (true) { i = y + 1; }
)");
    CHECK_THROWS_AS(classify_kinds(p, f32), ParseError);
}

TEST_CASE("decimal literals are rounded once to the target format") {
    SourceProgram p = classify_kinds(parse_program(EX1), f32);
    auto& rhs = p.body[0]->body[0]->rhs;
    const Expr* sub = rhs->a.get();       // 1.5*x - 0.7*x
    const Expr* mul07 = sub->b.get();     // 0.7*x
    Rat c = mul07->a->value;
    CHECK(c == Rat(static_cast<double>(0.7f)));
    CHECK(c != Rat(7, 10));
}

TEST_CASE("pretty-print round-trips to a structurally identical AST") {
    for (const char* src : {EX1, SINE}) {
        SourceProgram p1 = parse_program(src);
        std::string printed = pretty_print(p1);
        SourceProgram p2 = parse_program(printed);
        CHECK(pretty_print(p2) == printed);
    }
}

namespace {

// Random program generator over the grammar, for the totality check.
struct Gen {
    std::mt19937_64 rng;
    std::vector<std::string> names{"a", "b", "c"};

    std::string expr(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
        switch (pick(rng)) {
            case 0: return names[rng() % names.size()];
            case 1: {
                std::uniform_int_distribution<int> num(0, 99);
                return std::to_string(num(rng)) + (rng() % 2 ? ".5" : "");
            }
            case 2: return "(" + expr(depth - 1) + " + " + expr(depth - 1) + ")";
            case 3: return "(" + expr(depth - 1) + " - " + expr(depth - 1) + ")";
            case 4: return "(" + expr(depth - 1) + "*" + expr(depth - 1) + ")";
            default: return "(" + expr(depth - 1) + "^2)";
        }
    }

    std::string cond(int depth) {
        if (depth <= 0 || rng() % 2) return expr(1) + (rng() % 2 ? " <= " : " < ") + expr(1);
        switch (rng() % 3) {
            case 0: return "(" + cond(depth - 1) + ") && (" + cond(depth - 1) + ")";
            case 1: return "(" + cond(depth - 1) + ") || (" + cond(depth - 1) + ")";
            default: return "!(" + cond(depth - 1) + ")";
        }
    }

    std::string stmt(int depth) {
        if (depth <= 0 || rng() % 3 == 0) return names[rng() % names.size()] + " = " + expr(2) + ";\n";
        if (rng() % 2)
            return "if (" + cond(1) + ") {\n" + stmt(depth - 1) + "} else {\n" + stmt(depth - 1) + "}\n";
        return "while (" + cond(1) + ") {\n" + stmt(depth - 1) + "}\n";
    }

    std::string program() {
        std::string s = "#precondition: 0 <= a && a <= 1 && 0 <= b && b <= 1 && 0 <= c && c <= 1\n";
        s += "#target: a\nfloat a;\nfloat b;\nfloat c;\n";
        int k = 1 + static_cast<int>(rng() % 3);
        for (int j = 0; j < k; ++j) s += stmt(3);
        return s;
    }
};

} // namespace

TEST_CASE("parse is total on grammar-generated programs") {
    Gen g{std::mt19937_64(42)};
    for (int k = 0; k < 300; ++k) {
        std::string src = g.program();
        SourceProgram p = parse_program(src);       // must not throw
        SourceProgram c = classify_kinds(p, f32);
        (void)c;
        std::string printed = pretty_print(p);
        SourceProgram p2 = parse_program(printed);  // round trip
        CHECK(pretty_print(p2) == printed);
    }
}

TEST_CASE("kind monotonicity: flipping int to float never removes a rounding flag") {
    SourceProgram p = parse_program(SINE);
    SourceProgram as_is = classify_kinds(p, f32);
    SourceProgram flipped = p;
    for (auto& k : flipped.var_kinds) k = Kind::Float;
    SourceProgram all_float = classify_kinds(flipped, f32);

    std::function<void(const ExprPtr&, const ExprPtr&)> cmp = [&](const ExprPtr& a, const ExprPtr& b) {
        if (a->op == Expr::Op::Var || a->op == Expr::Op::Const) return;
        if (a->rounds) CHECK(b->rounds);
        cmp(a->a, b->a);
        cmp(a->b, b->b);
    };
    for (size_t s = 0; s < as_is.body[0]->body.size(); ++s)
        cmp(as_is.body[0]->body[s]->rhs, all_float.body[0]->body[s]->rhs);
}
