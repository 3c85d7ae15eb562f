#ifndef LIOUVILLE_EXPR_HPP
#define LIOUVILLE_EXPR_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace liouville {

/// Error raised by the expression parser. Carries the byte offset of the
/// offending token in the source string.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Error raised when evaluation hits a singular point (log of zero,
/// division by zero, sqrt of a negative, ...).
class EvalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Tan, Exp, Log, Abs, Sqrt };

const char* funcName(Func f);

/// Value and first partial derivatives of a scalar function at a point.
/// partials is indexed by the chart coordinate list the expression was
/// parsed against.
struct Jet {
    double value = 0.0;
    std::vector<double> partials;
};

/// Immutable scalar expression over a fixed list of coordinate names.
/// Shared subtrees are fine; nodes are never mutated after construction.
class Expr {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    enum class Kind { Number, Coord, Neg, Binary, Call };

    struct Node {
        Kind kind;
        double number = 0.0;   // Kind::Number
        int coord = -1;        // Kind::Coord, index into the coordinate list
        BinaryOp op = BinaryOp::Add;
        Func func = Func::Sin;
        NodePtr lhs, rhs;      // rhs unused for Neg/Call
    };

    Expr() = default;
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    bool empty() const { return root_ == nullptr; }
    const Node& root() const { return *root_; }
    NodePtr rootPtr() const { return root_; }

    // Construction helpers.
    static Expr number(double v);
    static Expr coord(int index);
    static Expr neg(const Expr& e);
    static Expr binary(BinaryOp op, const Expr& a, const Expr& b);
    static Expr call(Func f, const Expr& a);

    Expr operator+(const Expr& o) const { return binary(BinaryOp::Add, *this, o); }
    Expr operator-(const Expr& o) const { return binary(BinaryOp::Sub, *this, o); }
    Expr operator*(const Expr& o) const { return binary(BinaryOp::Mul, *this, o); }
    Expr operator/(const Expr& o) const { return binary(BinaryOp::Div, *this, o); }

    double eval(const std::vector<double>& point) const;

    /// Value and exact first partials via forward-mode differentiation.
    /// nCoords is the length of the coordinate list (gradient size).
    Jet evalJet(const std::vector<double>& point) const;

    /// Emits the same grammar parse() accepts, with minimal parentheses.
    /// parse(print(e)) is structurally identical to e.
    std::string print(const std::vector<std::string>& coords) const;

    bool structurallyEqual(const Expr& other) const;

    /// True if the tree is a plain numeric literal.
    std::optional<double> asNumber() const;

private:
    NodePtr root_;
};

/// Parses src against the given coordinate names. Precedence
/// ^  >  unary-  >  * /  >  + -, with ^ right-associative.
/// Identifiers must be coordinate names or one of the known functions.
Expr parse(const std::string& src, const std::vector<std::string>& coords);

/// b-function  f = c*log|t| + g  with g smooth. c == 0 iff f is smooth,
/// in which case singularCoord is absent.
struct BFunction {
    double c = 0.0;
    std::optional<int> singularCoord;  // index into the coordinate list
    Expr g;

    bool smooth() const { return !singularCoord.has_value(); }

    static BFunction fromSmooth(Expr e) { return BFunction{0.0, std::nullopt, std::move(e)}; }
    static BFunction singular(double c, int coordIndex, Expr g = Expr::number(0.0)) {
        return BFunction{c, coordIndex, std::move(g)};
    }
};

/// Evaluates f = c*log|t| + g with exact partials (d/dt of c*log|t| is c/t).
/// Throws EvalError when c != 0 and t(p) == 0; callers needing values on
/// the critical hypersurface go through the b-coframe path in module phase.
Jet evalJet(const BFunction& f, const std::vector<double>& point);

double evalValue(const BFunction& f, const std::vector<double>& point);

/// Recognizes the singular terms of an expression: rewrites a top-level sum
/// containing k*log(abs(t)) terms (k a literal, t a coordinate) into a
/// BFunction with c = k extracted exactly. All singular terms must share the
/// same coordinate t; anything else stays in the smooth part g.
BFunction promote(const Expr& e, const std::vector<std::string>& coords);

/// Pretty-prints a b-function in the parseable grammar.
std::string printBFunction(const BFunction& f, const std::vector<std::string>& coords);

/// a*f + b*g as b-functions. Requires the singular coordinates to agree
/// (or one side smooth).
BFunction linearCombination(double a, const BFunction& f, double b, const BFunction& g);

}  // namespace liouville

#endif
