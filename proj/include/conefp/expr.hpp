#ifndef CONEFP_EXPR_HPP
#define CONEFP_EXPR_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conefp::expr {

struct ParseError : std::runtime_error {
    std::size_t offset; // byte offset into the source
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class UnaryOp { Neg, Abs, Sin, Cos, Cbrt, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Piece {
    double lo = 0.0;
    double hi = 0.0; // +inf for the last piece
    NodePtr body;
};

struct Node {
    enum class Kind { Constant, Variable, Unary, Binary, Piecewise };
    Kind kind;

    double value = 0.0;              // Constant
    int var = 0;                     // Variable: 0 or 1
    UnaryOp uop = UnaryOp::Neg;      // Unary
    BinaryOp bop = BinaryOp::Add;    // Binary
    NodePtr lhs, rhs;                // Unary uses lhs only
    int guard_var = 0;               // Piecewise
    std::vector<Piece> pieces;       // Piecewise
};

/// Parsed expression in up to two named variables. Immutable after parse.
struct Ast {
    NodePtr root;
    std::array<std::string, 2> vars{{"u1", "u2"}};
    std::vector<std::string> warnings; // piecewise continuity diagnostics
    std::string source;                // original text, kept for serialization
};

// ---------------------------------------------------------------------------
// construction helpers (used by tests and generators)

inline NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Constant;
    n->value = v;
    return n;
}

inline NodePtr variable(int i) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->var = i;
    return n;
}

inline NodePtr unary(UnaryOp op, NodePtr child) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->uop = op;
    n->lhs = std::move(child);
    return n;
}

inline NodePtr binary(BinaryOp op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->bop = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

inline NodePtr piecewise(int guard_var, std::vector<Piece> pieces) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Piecewise;
    n->guard_var = guard_var;
    n->pieces = std::move(pieces);
    return n;
}

inline bool equal(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case Node::Kind::Constant:
        return a->value == b->value;
    case Node::Kind::Variable:
        return a->var == b->var;
    case Node::Kind::Unary:
        return a->uop == b->uop && equal(a->lhs, b->lhs);
    case Node::Kind::Binary:
        return a->bop == b->bop && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Node::Kind::Piecewise: {
        if (a->guard_var != b->guard_var || a->pieces.size() != b->pieces.size()) return false;
        for (std::size_t k = 0; k < a->pieces.size(); ++k) {
            if (a->pieces[k].lo != b->pieces[k].lo) return false;
            if (a->pieces[k].hi != b->pieces[k].hi) return false;
            if (!equal(a->pieces[k].body, b->pieces[k].body)) return false;
        }
        return true;
    }
    }
    return false;
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline double eval_node(const Node& n, double x0, double x1) {
    switch (n.kind) {
    case Node::Kind::Constant:
        return n.value;
    case Node::Kind::Variable:
        return n.var == 0 ? x0 : x1;
    case Node::Kind::Unary: {
        const double v = eval_node(*n.lhs, x0, x1);
        switch (n.uop) {
        case UnaryOp::Neg: return -v;
        case UnaryOp::Abs: return std::fabs(v);
        case UnaryOp::Sin: return std::sin(v);
        case UnaryOp::Cos: return std::cos(v);
        case UnaryOp::Cbrt: return std::cbrt(v);
        case UnaryOp::Sqrt:
            if (v < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(v);
        }
        break;
    }
    case Node::Kind::Binary: {
        const double l = eval_node(*n.lhs, x0, x1);
        const double r = eval_node(*n.rhs, x0, x1);
        switch (n.bop) {
        case BinaryOp::Add: return l + r;
        case BinaryOp::Sub: return l - r;
        case BinaryOp::Mul: return l * r;
        case BinaryOp::Div:
            if (r == 0.0) throw EvalError("division by zero");
            return l / r;
        case BinaryOp::Pow: {
            const double p = std::pow(l, r);
            if (std::isnan(p)) throw EvalError("pow domain error (negative base with fractional exponent?)");
            return p;
        }
        }
        break;
    }
    case Node::Kind::Piecewise: {
        const double x = n.guard_var == 0 ? x0 : x1;
        for (std::size_t k = 0; k < n.pieces.size(); ++k) {
            const Piece& p = n.pieces[k];
            const bool last = (k + 1 == n.pieces.size());
            if (x >= p.lo && (x < p.hi || (last && x <= p.hi)))
                return eval_node(*p.body, x0, x1);
        }
        throw EvalError("piecewise guard does not cover input " + std::to_string(x));
    }
    }
    throw EvalError("corrupt expression node");
}

} // namespace detail

/// Evaluate without a sign constraint (vector fields may be negative).
inline double eval_signed(const Ast& ast, double x0, double x1) {
    const double v = detail::eval_node(*ast.root, x0, x1);
    if (!std::isfinite(v)) throw EvalError("expression evaluated to a non-finite value");
    return v;
}

/// Evaluate a nonlinearity f: R_+^2 -> R_+. Negative inputs or a negative
/// result are rejected.
inline double eval(const Ast& ast, double x0, double x1) {
    if (x0 < 0.0 || x1 < 0.0) throw EvalError("eval: inputs must be nonnegative");
    const double v = eval_signed(ast, x0, x1);
    if (v < 0.0)
        throw EvalError("expression produced a negative value at (" + std::to_string(x0) + ", " +
                        std::to_string(x1) + ")");
    return v;
}

// ---------------------------------------------------------------------------
// parser

namespace detail {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Semi, Colon, End };

struct Token {
    Tok kind;
    double num = 0.0;
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        const char c = src_[pos_];
        switch (c) {
        case '+': tok_.kind = Tok::Plus; ++pos_; return;
        case '-': tok_.kind = Tok::Minus; ++pos_; return;
        case '*': tok_.kind = Tok::Star; ++pos_; return;
        case '/': tok_.kind = Tok::Slash; ++pos_; return;
        case '^': tok_.kind = Tok::Caret; ++pos_; return;
        case '(': tok_.kind = Tok::LParen; ++pos_; return;
        case ')': tok_.kind = Tok::RParen; ++pos_; return;
        case ',': tok_.kind = Tok::Comma; ++pos_; return;
        case ';': tok_.kind = Tok::Semi; ++pos_; return;
        case ':': tok_.kind = Tok::Colon; ++pos_; return;
        default: break;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            const char* begin = src_.data() + pos_;
            const char* end = src_.data() + src_.size();
            double value = 0.0;
            auto [p, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc())
                throw ParseError("malformed number", pos_);
            tok_.kind = Tok::Number;
            tok_.num = value;
            pos_ += static_cast<std::size_t>(p - begin);
            return;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   ((src_[pos_] >= 'a' && src_[pos_] <= 'z') || (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
                    (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Tok::Ident;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// Binding powers: + - (10), * / (20), unary - (30), ^ (40, right-assoc).
class Parser {
public:
    Parser(std::string_view src, const std::array<std::string, 2>& vars) : lex_(src), vars_(vars) {}

    NodePtr parse_full() {
        NodePtr n = parse_expr(0);
        const Token& t = lex_.peek();
        if (t.kind != Tok::End)
            throw ParseError("trailing input after expression", t.offset);
        return n;
    }

private:
    NodePtr parse_expr(int min_bp) {
        NodePtr lhs = parse_prefix();
        for (;;) {
            const Token& t = lex_.peek();
            BinaryOp op;
            int bp;
            switch (t.kind) {
            case Tok::Plus: op = BinaryOp::Add; bp = 10; break;
            case Tok::Minus: op = BinaryOp::Sub; bp = 10; break;
            case Tok::Star: op = BinaryOp::Mul; bp = 20; break;
            case Tok::Slash: op = BinaryOp::Div; bp = 20; break;
            case Tok::Caret: op = BinaryOp::Pow; bp = 40; break;
            default: return lhs;
            }
            if (bp < min_bp) return lhs;
            lex_.take();
            // ^ is right-associative, the rest associate left.
            NodePtr rhs = parse_expr(op == BinaryOp::Pow ? bp : bp + 1);
            lhs = binary(op, std::move(lhs), std::move(rhs));
        }
    }

    NodePtr parse_prefix() {
        const Token t = lex_.take();
        switch (t.kind) {
        case Tok::Number:
            return constant(t.num);
        case Tok::Minus:
            return unary(UnaryOp::Neg, parse_expr(30));
        case Tok::LParen: {
            NodePtr inner = parse_expr(0);
            expect(Tok::RParen, "expected ')'");
            return inner;
        }
        case Tok::Ident:
            return parse_ident(t);
        default:
            throw ParseError("expected an expression", t.offset);
        }
    }

    NodePtr parse_ident(const Token& t) {
        if (t.text == vars_[0]) return variable(0);
        if (t.text == vars_[1]) return variable(1);
        if (t.text == "piecewise") return parse_piecewise(t);
        UnaryOp op;
        if (t.text == "abs") op = UnaryOp::Abs;
        else if (t.text == "sin") op = UnaryOp::Sin;
        else if (t.text == "cos") op = UnaryOp::Cos;
        else if (t.text == "cbrt") op = UnaryOp::Cbrt;
        else if (t.text == "sqrt") op = UnaryOp::Sqrt;
        else if (t.text == "neg") op = UnaryOp::Neg;
        else throw ParseError("unknown identifier '" + t.text + "'", t.offset);
        expect(Tok::LParen, "expected '(' after function name");
        NodePtr arg = parse_expr(0);
        expect(Tok::RParen, "expected ')'");
        return unary(op, std::move(arg));
    }

    // piecewise(var; lo,hi: expr; lo,hi: expr; ...) with 'inf' allowed as
    // the final upper bound. Guards must partition [0, inf).
    NodePtr parse_piecewise(const Token& kw) {
        expect(Tok::LParen, "expected '(' after piecewise");
        const Token v = lex_.take();
        int guard_var;
        if (v.kind == Tok::Ident && v.text == vars_[0]) guard_var = 0;
        else if (v.kind == Tok::Ident && v.text == vars_[1]) guard_var = 1;
        else throw ParseError("piecewise guard must name a variable", v.offset);
        expect(Tok::Semi, "expected ';' after piecewise variable");

        std::vector<Piece> pieces;
        for (;;) {
            Piece p;
            p.lo = parse_guard_number(false);
            expect(Tok::Comma, "expected ',' between guard bounds");
            p.hi = parse_guard_number(true);
            expect(Tok::Colon, "expected ':' after guard interval");
            p.body = parse_expr(0);
            pieces.push_back(std::move(p));
            const Token sep = lex_.take();
            if (sep.kind == Tok::RParen) break;
            if (sep.kind != Tok::Semi)
                throw ParseError("expected ';' or ')' after piecewise branch", sep.offset);
        }
        validate_guards(pieces, kw.offset);
        return piecewise(guard_var, std::move(pieces));
    }

    double parse_guard_number(bool allow_inf) {
        const Token t = lex_.take();
        if (t.kind == Tok::Number) return t.num;
        if (allow_inf && t.kind == Tok::Ident && t.text == "inf")
            return std::numeric_limits<double>::infinity();
        throw ParseError(allow_inf ? "expected a number or 'inf'" : "expected a number", t.offset);
    }

    static void validate_guards(const std::vector<Piece>& pieces, std::size_t offset) {
        if (pieces.empty())
            throw ParseError("piecewise needs at least one branch", offset);
        if (pieces.front().lo != 0.0)
            throw ParseError("malformed piecewise guards: first interval must start at 0", offset);
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            if (!(pieces[k].lo < pieces[k].hi))
                throw ParseError("malformed piecewise guards: empty interval", offset);
            if (k + 1 < pieces.size() && pieces[k].hi != pieces[k + 1].lo)
                throw ParseError("malformed piecewise guards: intervals must tile [0, inf) without gaps or overlap",
                                 offset);
        }
        if (!std::isinf(pieces.back().hi))
            throw ParseError("malformed piecewise guards: last interval must extend to inf", offset);
    }

    void expect(Tok kind, const char* msg) {
        const Token t = lex_.take();
        if (t.kind != kind) throw ParseError(msg, t.offset);
    }

    Lexer lex_;
    const std::array<std::string, 2>& vars_;
};

// Left/right limits of adjacent pieces are compared at every interior
// breakpoint; the non-guarded variable is held at 1.0 (documented choice,
// the guarded cases of interest are single-variable).
inline void continuity_warnings(const NodePtr& node, const std::array<std::string, 2>& vars,
                                std::vector<std::string>& out) {
    if (!node) return;
    if (node->kind == Node::Kind::Unary) {
        continuity_warnings(node->lhs, vars, out);
        return;
    }
    if (node->kind == Node::Kind::Binary) {
        continuity_warnings(node->lhs, vars, out);
        continuity_warnings(node->rhs, vars, out);
        return;
    }
    if (node->kind != Node::Kind::Piecewise) return;
    for (std::size_t k = 0; k + 1 < node->pieces.size(); ++k) {
        const double x = node->pieces[k].hi;
        const double other = 1.0;
        double left, right;
        try {
            left = node->guard_var == 0 ? eval_node(*node->pieces[k].body, x, other)
                                        : eval_node(*node->pieces[k].body, other, x);
            right = node->guard_var == 0 ? eval_node(*node->pieces[k + 1].body, x, other)
                                         : eval_node(*node->pieces[k + 1].body, other, x);
        } catch (const EvalError&) {
            continue; // a branch undefined at the breakpoint is reported at eval time
        }
        if (std::fabs(left - right) > 1e-9) {
            std::ostringstream os;
            os << "piecewise in " << vars[static_cast<std::size_t>(node->guard_var)] << " is discontinuous at "
               << x << " (left " << left << ", right " << right << ")";
            out.push_back(os.str());
        }
    }
    for (const Piece& p : node->pieces) continuity_warnings(p.body, vars, out);
}

} // namespace detail

/// Parse an expression over the given variable names (default u1, u2).
/// Throws ParseError with a byte offset on malformed input.
inline Ast parse(std::string_view source, std::array<std::string, 2> vars = {"u1", "u2"}) {
    Ast ast;
    ast.vars = std::move(vars);
    ast.source = std::string(source);
    detail::Parser p(source, ast.vars);
    ast.root = p.parse_full();
    detail::continuity_warnings(ast.root, ast.vars, ast.warnings);
    return ast;
}

// ---------------------------------------------------------------------------
// rendering (canonical text; parse(render(ast)) is structurally identical)

namespace detail {

inline int precedence_of(const Node& n) {
    switch (n.kind) {
    case Node::Kind::Binary:
        switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 10;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 20;
        case BinaryOp::Pow: return 40;
        }
        return 0;
    case Node::Kind::Unary:
        return n.uop == UnaryOp::Neg ? 30 : 100;
    default:
        return 100;
    }
}

inline void render_number(std::ostringstream& os, double v) {
    if (std::isinf(v)) {
        os << "inf";
        return;
    }
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    os << tmp.str();
}

inline void render_node(std::ostringstream& os, const Node& n, const std::array<std::string, 2>& vars,
                        int parent_prec, bool right_side) {
    const int prec = precedence_of(n);
    const bool parens =
        prec < parent_prec || (prec == parent_prec && right_side && n.kind == Node::Kind::Binary && n.bop != BinaryOp::Pow);
    if (parens) os << '(';
    switch (n.kind) {
    case Node::Kind::Constant:
        if (n.value < 0.0) {
            // negative literals round-trip as unary minus
            os << '-';
            render_number(os, -n.value);
        } else {
            render_number(os, n.value);
        }
        break;
    case Node::Kind::Variable:
        os << vars[static_cast<std::size_t>(n.var)];
        break;
    case Node::Kind::Unary:
        if (n.uop == UnaryOp::Neg) {
            os << '-';
            render_node(os, *n.lhs, vars, 31, false);
        } else {
            switch (n.uop) {
            case UnaryOp::Abs: os << "abs"; break;
            case UnaryOp::Sin: os << "sin"; break;
            case UnaryOp::Cos: os << "cos"; break;
            case UnaryOp::Cbrt: os << "cbrt"; break;
            case UnaryOp::Sqrt: os << "sqrt"; break;
            case UnaryOp::Neg: break;
            }
            os << '(';
            render_node(os, *n.lhs, vars, 0, false);
            os << ')';
        }
        break;
    case Node::Kind::Binary: {
        const char* sym = "+";
        switch (n.bop) {
        case BinaryOp::Add: sym = "+"; break;
        case BinaryOp::Sub: sym = "-"; break;
        case BinaryOp::Mul: sym = "*"; break;
        case BinaryOp::Div: sym = "/"; break;
        case BinaryOp::Pow: sym = "^"; break;
        }
        // ^ is right-associative: its left child needs parens at equal precedence.
        render_node(os, *n.lhs, vars, n.bop == BinaryOp::Pow ? prec + 1 : prec, false);
        os << sym;
        render_node(os, *n.rhs, vars, prec, n.bop != BinaryOp::Pow);
        break;
    }
    case Node::Kind::Piecewise:
        os << "piecewise(" << vars[static_cast<std::size_t>(n.guard_var)];
        for (const Piece& p : n.pieces) {
            os << "; ";
            render_number(os, p.lo);
            os << ',';
            render_number(os, p.hi);
            os << ": ";
            render_node(os, *p.body, vars, 0, false);
        }
        os << ')';
        break;
    }
    if (parens) os << ')';
}

} // namespace detail

inline std::string render(const Ast& ast) {
    std::ostringstream os;
    detail::render_node(os, *ast.root, ast.vars, 0, false);
    return os.str();
}

inline bool structurally_equal(const Ast& a, const Ast& b) { return equal(a.root, b.root); }

} // namespace conefp::expr

#endif // CONEFP_EXPR_HPP
