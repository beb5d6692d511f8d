// AST for the analyzed while-language: declarations, assignments,
// conditionals and loops over +,-,*,/ expressions, plus the pragma header
// (precondition, optional coarse hint, target variable, iteration bound).

#pragma once

#include "fpinv/polynomial.hpp"
#include "fpinv/rational.hpp"
#include "fpinv/varset.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fpinv::lang {

enum class Kind { Int, Float };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Op { Var, Const, Add, Sub, Mul, Div };
    Op op;
    int var = -1;                  // Op::Var
    Rat value;                     // Op::Const
    bool decimal_literal = false;  // literal written with '.' or exponent
    ExprPtr a, b;

    // Filled in by classify_kinds.
    Kind kind = Kind::Float;
    bool rounds = false;

    static ExprPtr mkvar(int v);
    static ExprPtr mkconst(const Rat& c, bool decimal);
    static ExprPtr mk(Op op, ExprPtr a, ExprPtr b);
};

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct Cond {
    enum class Tag { Atom, And, Or, Not };
    Tag tag;
    ExprPtr a1, a2;  // Atom: a1 <= a2 (strict=false) or a1 < a2 (strict=true)
    bool strict = false;
    CondPtr c1, c2;

    static CondPtr atom(ExprPtr a1, ExprPtr a2, bool strict);
    static CondPtr mk(Tag t, CondPtr c1, CondPtr c2);
    static CondPtr truth();  // 0 <= 0
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
    enum class Tag { Assign, If, While };
    Tag tag;
    int var = -1;
    ExprPtr rhs;
    CondPtr cond;
    std::vector<StmtPtr> then_body, else_body, body;
};

// Normalized precondition atom: poly >= 0 (or > 0 when strict).
struct InitAtom {
    Poly poly;
    bool strict = false;
};

// Surface precondition atom, kept for pretty-printing round trips.
struct SurfaceAtom {
    enum class Rel { Le, Lt, Eq };
    ExprPtr a1, a2;
    Rel rel;
};

struct CoarseHint {
    int var;
    Rat lo, hi;
};

struct SourceProgram {
    VarTable vars;
    std::vector<Kind> var_kinds;
    std::vector<StmtPtr> body;

    std::vector<SurfaceAtom> precondition;
    std::vector<CoarseHint> coarse;
    int target = -1;
    long iterations = -1;  // -1: no #iterations pragma
    bool classified = false;
};

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
};

struct FloatFormatSpec {
    int precision_bits;  // significand bits incl. hidden bit: 24 for f32, 53 for f64
};

// Grammar of External Interfaces; deterministic; throws ParseError.
SourceProgram parse_program(const std::string& text);

// Kind inference plus one-time rounding of decimal literals to the target
// format. Throws ParseError if an int variable is assigned a float expression.
SourceProgram classify_kinds(const SourceProgram& p, const FloatFormatSpec& fmt);

std::string pretty_print(const SourceProgram& p);

// Precondition as poly >= 0 atoms; equalities split in two, initializer
// prefix already folded by the parser.
std::vector<InitAtom> init_atoms(const SourceProgram& p);

// Expression -> polynomial over program variables; throws if it divides.
Poly expr_to_poly(const ExprPtr& e);

bool expr_equal(const ExprPtr& x, const ExprPtr& y);
std::string expr_str(const ExprPtr& e, const VarTable& vars);

} // namespace fpinv::lang
