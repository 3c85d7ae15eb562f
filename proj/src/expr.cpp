#include "liouville/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace liouville {

const char* funcName(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Abs: return "abs";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

Expr Expr::number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->number = v;
    return Expr(n);
}

Expr Expr::coord(int index) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Coord;
    n->coord = index;
    return Expr(n);
}

Expr Expr::neg(const Expr& e) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Neg;
    n->lhs = e.root_;
    return Expr(n);
}

Expr Expr::binary(BinaryOp op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->op = op;
    n->lhs = a.root_;
    n->rhs = b.root_;
    return Expr(n);
}

Expr Expr::call(Func f, const Expr& a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->lhs = a.root_;
    return Expr(n);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double evalNode(const Expr::Node& n, const std::vector<double>& p) {
    switch (n.kind) {
        case Expr::Kind::Number: return n.number;
        case Expr::Kind::Coord: return p[static_cast<std::size_t>(n.coord)];
        case Expr::Kind::Neg: return -evalNode(*n.lhs, p);
        case Expr::Kind::Binary: {
            double a = evalNode(*n.lhs, p);
            double b = evalNode(*n.rhs, p);
            switch (n.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalError("division by zero");
                    return a / b;
                case BinaryOp::Pow: return std::pow(a, b);
            }
            return 0.0;
        }
        case Expr::Kind::Call: {
            double a = evalNode(*n.lhs, p);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Exp: return std::exp(a);
                case Func::Log:
                    if (a <= 0.0) throw EvalError("log of non-positive value");
                    return std::log(a);
                case Func::Abs: return std::fabs(a);
                case Func::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative value");
                    return std::sqrt(a);
            }
            return 0.0;
        }
    }
    return 0.0;
}

// Forward-mode dual with a dense gradient; chart dimensions in scope are
// tiny so a vector gradient is fine.
struct Dual {
    double v;
    std::vector<double> d;
};

Dual dualConst(double v, std::size_t n) { return Dual{v, std::vector<double>(n, 0.0)}; }

Dual evalDual(const Expr::Node& n, const std::vector<double>& p) {
    const std::size_t dim = p.size();
    switch (n.kind) {
        case Expr::Kind::Number: return dualConst(n.number, dim);
        case Expr::Kind::Coord: {
            Dual r = dualConst(p[static_cast<std::size_t>(n.coord)], dim);
            r.d[static_cast<std::size_t>(n.coord)] = 1.0;
            return r;
        }
        case Expr::Kind::Neg: {
            Dual a = evalDual(*n.lhs, p);
            a.v = -a.v;
            for (auto& x : a.d) x = -x;
            return a;
        }
        case Expr::Kind::Binary: {
            Dual a = evalDual(*n.lhs, p);
            Dual b = evalDual(*n.rhs, p);
            Dual r = dualConst(0.0, dim);
            switch (n.op) {
                case BinaryOp::Add:
                    r.v = a.v + b.v;
                    for (std::size_t i = 0; i < dim; ++i) r.d[i] = a.d[i] + b.d[i];
                    return r;
                case BinaryOp::Sub:
                    r.v = a.v - b.v;
                    for (std::size_t i = 0; i < dim; ++i) r.d[i] = a.d[i] - b.d[i];
                    return r;
                case BinaryOp::Mul:
                    r.v = a.v * b.v;
                    for (std::size_t i = 0; i < dim; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
                    return r;
                case BinaryOp::Div:
                    if (b.v == 0.0) throw EvalError("division by zero");
                    r.v = a.v / b.v;
                    for (std::size_t i = 0; i < dim; ++i)
                        r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
                    return r;
                case BinaryOp::Pow: {
                    r.v = std::pow(a.v, b.v);
                    // d(a^b) = a^b * (b' log a + b a'/a); constant exponents
                    // use the power rule so negative bases stay differentiable.
                    if (n.rhs->kind == Expr::Kind::Number) {
                        double e = n.rhs->number;
                        double f = (a.v == 0.0) ? 0.0 : e * std::pow(a.v, e - 1.0);
                        for (std::size_t i = 0; i < dim; ++i) r.d[i] = f * a.d[i];
                    } else {
                        if (a.v <= 0.0) throw EvalError("pow with non-constant exponent needs positive base");
                        double la = std::log(a.v);
                        for (std::size_t i = 0; i < dim; ++i)
                            r.d[i] = r.v * (b.d[i] * la + b.v * a.d[i] / a.v);
                    }
                    return r;
                }
            }
            return r;
        }
        case Expr::Kind::Call: {
            Dual a = evalDual(*n.lhs, p);
            double v = 0.0, f = 0.0;
            switch (n.func) {
                case Func::Sin: v = std::sin(a.v); f = std::cos(a.v); break;
                case Func::Cos: v = std::cos(a.v); f = -std::sin(a.v); break;
                case Func::Tan: {
                    v = std::tan(a.v);
                    double c = std::cos(a.v);
                    if (c == 0.0) throw EvalError("tan at a pole");
                    f = 1.0 / (c * c);
                    break;
                }
                case Func::Exp: v = std::exp(a.v); f = v; break;
                case Func::Log:
                    if (a.v <= 0.0) throw EvalError("log of non-positive value");
                    v = std::log(a.v); f = 1.0 / a.v; break;
                case Func::Abs:
                    v = std::fabs(a.v); f = (a.v >= 0.0) ? 1.0 : -1.0; break;
                case Func::Sqrt:
                    if (a.v < 0.0) throw EvalError("sqrt of negative value");
                    if (a.v == 0.0) throw EvalError("sqrt derivative at zero");
                    v = std::sqrt(a.v); f = 0.5 / v; break;
            }
            a.v = v;
            for (auto& x : a.d) x *= f;
            return a;
        }
    }
    return dualConst(0.0, dim);
}

}  // namespace

double Expr::eval(const std::vector<double>& point) const {
    if (!root_) throw EvalError("empty expression");
    return evalNode(*root_, point);
}

Jet Expr::evalJet(const std::vector<double>& point) const {
    if (!root_) throw EvalError("empty expression");
    Dual d = evalDual(*root_, point);
    return Jet{d.v, std::move(d.d)};
}

std::optional<double> Expr::asNumber() const {
    if (root_ && root_->kind == Kind::Number) return root_->number;
    if (root_ && root_->kind == Kind::Neg && root_->lhs->kind == Kind::Number)
        return -root_->lhs->number;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing (Pratt / precedence-climbing)

namespace {

struct Token {
    enum class Type { Number, Ident, Op, LParen, RParen, Comma, End } type;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::End;
            tok_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) throw ParseError("malformed number", pos_);
            tok_.type = Token::Type::Number;
            tok_.number = v;
            tok_.text.assign(start, static_cast<std::size_t>(end - start));
            pos_ += static_cast<std::size_t>(end - start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.type = Token::Type::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        switch (c) {
            case '(': tok_.type = Token::Type::LParen; break;
            case ')': tok_.type = Token::Type::RParen; break;
            case ',': tok_.type = Token::Type::Comma; break;
            case '+': case '-': case '*': case '/': case '^':
                tok_.type = Token::Type::Op;
                break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", pos_);
        }
        tok_.text = std::string(1, c);
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

std::optional<Func> lookupFunc(const std::string& name) {
    if (name == "sin") return Func::Sin;
    if (name == "cos") return Func::Cos;
    if (name == "tan") return Func::Tan;
    if (name == "exp") return Func::Exp;
    if (name == "log") return Func::Log;
    if (name == "abs") return Func::Abs;
    if (name == "sqrt") return Func::Sqrt;
    return std::nullopt;
}

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& coords)
        : lex_(src), coords_(coords) {}

    Expr run() {
        Expr e = parseSum();
        const Token& t = lex_.peek();
        if (t.type != Token::Type::End)
            throw ParseError("unexpected trailing input '" + t.text + "'", t.offset);
        return e;
    }

private:
    Expr parseSum() {
        Expr e = parseTerm();
        while (lex_.peek().type == Token::Type::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            Token t = lex_.take();
            Expr rhs = parseTerm();
            e = Expr::binary(t.text == "+" ? BinaryOp::Add : BinaryOp::Sub, e, rhs);
        }
        return e;
    }

    Expr parseTerm() {
        Expr e = parseUnary();
        while (lex_.peek().type == Token::Type::Op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            Token t = lex_.take();
            Expr rhs = parseUnary();
            e = Expr::binary(t.text == "*" ? BinaryOp::Mul : BinaryOp::Div, e, rhs);
        }
        return e;
    }

    Expr parseUnary() {
        if (lex_.peek().type == Token::Type::Op && lex_.peek().text == "-") {
            lex_.take();
            return Expr::neg(parseUnary());
        }
        if (lex_.peek().type == Token::Type::Op && lex_.peek().text == "+") {
            lex_.take();
            return parseUnary();
        }
        return parsePower();
    }

    Expr parsePower() {
        Expr base = parseAtom();
        if (lex_.peek().type == Token::Type::Op && lex_.peek().text == "^") {
            lex_.take();
            // right-associative; exponent binds tighter than unary minus,
            // so -x^2 parses as -(x^2) but x^-2 needs the unary path.
            Expr exp = parseUnary();
            return Expr::binary(BinaryOp::Pow, base, exp);
        }
        return base;
    }

    Expr parseAtom() {
        Token t = lex_.take();
        switch (t.type) {
            case Token::Type::Number:
                return Expr::number(t.number);
            case Token::Type::Ident: {
                if (auto f = lookupFunc(t.text)) {
                    Token open = lex_.take();
                    if (open.type != Token::Type::LParen)
                        throw ParseError("expected '(' after function " + t.text, open.offset);
                    Expr arg = parseSum();
                    Token close = lex_.take();
                    if (close.type != Token::Type::RParen)
                        throw ParseError("expected ')' closing call to " + t.text, close.offset);
                    return Expr::call(*f, arg);
                }
                for (std::size_t i = 0; i < coords_.size(); ++i)
                    if (coords_[i] == t.text) return Expr::coord(static_cast<int>(i));
                throw ParseError("unknown identifier '" + t.text + "'", t.offset);
            }
            case Token::Type::LParen: {
                Expr e = parseSum();
                Token close = lex_.take();
                if (close.type != Token::Type::RParen)
                    throw ParseError("expected ')'", close.offset);
                return e;
            }
            default:
                throw ParseError("unexpected token '" + t.text + "'", t.offset);
        }
    }

    Lexer lex_;
    const std::vector<std::string>& coords_;
};

}  // namespace

Expr parse(const std::string& src, const std::vector<std::string>& coords) {
    if (src.empty()) throw ParseError("empty expression", 0);
    return Parser(src, coords).run();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Larger value binds tighter.
int precedence(const Expr::Node& n) {
    switch (n.kind) {
        case Expr::Kind::Number: return n.number < 0 ? 2 : 100;
        case Expr::Kind::Coord: return 100;
        case Expr::Kind::Call: return 100;
        case Expr::Kind::Neg: return 2;
        case Expr::Kind::Binary:
            switch (n.op) {
                case BinaryOp::Add: case BinaryOp::Sub: return 1;
                case BinaryOp::Mul: case BinaryOp::Div: return 3;
                case BinaryOp::Pow: return 4;
            }
    }
    return 0;
}

std::string formatNumber(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // shortest round-trip representation
    for (int prec = 1; prec < 17; ++prec) {
        char b[64];
        std::snprintf(b, sizeof b, "%.*g", prec, v);
        if (std::strtod(b, nullptr) == v) { s = b; break; }
    }
    return s;
}

void printNode(const Expr::Node& n, const std::vector<std::string>& coords, std::string& out) {
    auto child = [&](const Expr::Node& c, int minPrec) {
        bool paren = precedence(c) < minPrec;
        if (paren) out += '(';
        printNode(c, coords, out);
        if (paren) out += ')';
    };
    switch (n.kind) {
        case Expr::Kind::Number: out += formatNumber(n.number); return;
        case Expr::Kind::Coord: out += coords[static_cast<std::size_t>(n.coord)]; return;
        case Expr::Kind::Neg:
            out += '-';
            child(*n.lhs, 3);  // -(a+b) and -(a-b) keep parentheses
            return;
        case Expr::Kind::Binary: {
            int p = precedence(n);
            const char* sym = "+";
            switch (n.op) {
                case BinaryOp::Add: sym = "+"; break;
                case BinaryOp::Sub: sym = "-"; break;
                case BinaryOp::Mul: sym = "*"; break;
                case BinaryOp::Div: sym = "/"; break;
                case BinaryOp::Pow: sym = "^"; break;
            }
            bool rightAssoc = (n.op == BinaryOp::Pow);
            child(*n.lhs, rightAssoc ? p + 1 : p);
            out += sym;
            // non-associative on the right: a-(b+c), a/(b*c) keep parens
            child(*n.rhs, rightAssoc ? p : p + 1);
            return;
        }
        case Expr::Kind::Call:
            out += funcName(n.func);
            out += '(';
            printNode(*n.lhs, coords, out);
            out += ')';
            return;
    }
}

bool nodesEqual(const Expr::Node& a, const Expr::Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Number: return a.number == b.number;
        case Expr::Kind::Coord: return a.coord == b.coord;
        case Expr::Kind::Neg: return nodesEqual(*a.lhs, *b.lhs);
        case Expr::Kind::Binary:
            return a.op == b.op && nodesEqual(*a.lhs, *b.lhs) && nodesEqual(*a.rhs, *b.rhs);
        case Expr::Kind::Call:
            return a.func == b.func && nodesEqual(*a.lhs, *b.lhs);
    }
    return false;
}

}  // namespace

std::string Expr::print(const std::vector<std::string>& coords) const {
    if (!root_) return "0";
    std::string out;
    printNode(*root_, coords, out);
    return out;
}

bool Expr::structurallyEqual(const Expr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return nodesEqual(*root_, *other.root_);
}

// ---------------------------------------------------------------------------
// BFunction

Jet evalJet(const BFunction& f, const std::vector<double>& point) {
    Jet j = f.g.empty() ? Jet{0.0, std::vector<double>(point.size(), 0.0)}
                        : f.g.evalJet(point);
    if (f.singularCoord) {
        std::size_t t = static_cast<std::size_t>(*f.singularCoord);
        double tv = point[t];
        if (tv == 0.0)
            throw EvalError("singular evaluation: b-function at t = 0 without b-coframe");
        j.value += f.c * std::log(std::fabs(tv));
        j.partials[t] += f.c / tv;
    }
    return j;
}

double evalValue(const BFunction& f, const std::vector<double>& point) {
    double v = f.g.empty() ? 0.0 : f.g.eval(point);
    if (f.singularCoord) {
        double tv = point[static_cast<std::size_t>(*f.singularCoord)];
        if (tv == 0.0) throw EvalError("singular evaluation: b-function at t = 0");
        v += f.c * std::log(std::fabs(tv));
    }
    return v;
}

namespace {

// Matches log(abs(x_i)) and returns i.
std::optional<int> asLogAbsCoord(const Expr::Node& n) {
    if (n.kind != Expr::Kind::Call || n.func != Func::Log) return std::nullopt;
    const Expr::Node& a = *n.lhs;
    if (a.kind != Expr::Kind::Call || a.func != Func::Abs) return std::nullopt;
    if (a.lhs->kind != Expr::Kind::Coord) return std::nullopt;
    return a.lhs->coord;
}

struct SingularTerm {
    double c;
    int coord;
};

// Matches [literal *] log(abs(coord)) up to an outer sign.
std::optional<SingularTerm> asSingularTerm(const Expr::Node& n, double sign) {
    if (auto c = asLogAbsCoord(n)) return SingularTerm{sign, *c};
    if (n.kind == Expr::Kind::Neg) return asSingularTerm(*n.lhs, -sign);
    if (n.kind == Expr::Kind::Binary && n.op == BinaryOp::Mul) {
        if (n.lhs->kind == Expr::Kind::Number)
            if (auto c = asLogAbsCoord(*n.rhs)) return SingularTerm{sign * n.lhs->number, *c};
        if (n.rhs->kind == Expr::Kind::Number)
            if (auto c = asLogAbsCoord(*n.lhs)) return SingularTerm{sign * n.rhs->number, *c};
    }
    return std::nullopt;
}

void splitSum(const Expr::NodePtr& n, double sign,
              std::vector<std::pair<Expr::NodePtr, double>>& terms) {
    if (n->kind == Expr::Kind::Binary && (n->op == BinaryOp::Add || n->op == BinaryOp::Sub)) {
        splitSum(n->lhs, sign, terms);
        splitSum(n->rhs, n->op == BinaryOp::Add ? sign : -sign, terms);
        return;
    }
    terms.emplace_back(n, sign);
}

}  // namespace

BFunction promote(const Expr& e, const std::vector<std::string>& coords) {
    (void)coords;
    if (e.empty()) return BFunction::fromSmooth(Expr::number(0.0));
    std::vector<std::pair<Expr::NodePtr, double>> terms;
    splitSum(e.rootPtr(), 1.0, terms);

    double c = 0.0;
    std::optional<int> t;
    Expr g;
    bool haveG = false;
    for (const auto& [node, sign] : terms) {
        if (auto s = asSingularTerm(*node, sign)) {
            if (t && *t != s->coord)
                throw EvalError("b-function has singular terms in two different coordinates");
            t = s->coord;
            c += s->c;
            continue;
        }
        Expr term(node);
        if (!haveG) {
            g = (sign < 0) ? Expr::neg(term) : term;
            haveG = true;
        } else {
            g = (sign < 0) ? g - term : g + term;
        }
    }
    if (!haveG) g = Expr::number(0.0);
    if (t && c == 0.0) t.reset();
    BFunction f;
    f.c = c;
    f.singularCoord = t;
    f.g = g;
    return f;
}

std::string printBFunction(const BFunction& f, const std::vector<std::string>& coords) {
    std::string out;
    if (f.singularCoord) {
        const std::string logPart = "log(abs(" + coords[static_cast<std::size_t>(*f.singularCoord)] + "))";
        if (f.c == 1.0) out = logPart;
        else out = Expr::number(f.c).print(coords) + "*" + logPart;
    }
    if (!f.g.empty() && !(f.g.asNumber() && *f.g.asNumber() == 0.0)) {
        std::string gs = f.g.print(coords);
        if (out.empty()) out = gs;
        else if (!gs.empty() && gs[0] == '-') out += gs;
        else out += "+" + gs;
    }
    if (out.empty()) out = "0";
    return out;
}

BFunction linearCombination(double a, const BFunction& f, double b, const BFunction& g) {
    BFunction r;
    if (f.singularCoord && g.singularCoord && *f.singularCoord != *g.singularCoord)
        throw EvalError("cannot combine b-functions singular in different coordinates");
    r.c = a * f.c + b * g.c;
    if (r.c != 0.0) r.singularCoord = f.singularCoord ? f.singularCoord : g.singularCoord;
    Expr fg = f.g.empty() ? Expr::number(0.0) : f.g;
    Expr gg = g.g.empty() ? Expr::number(0.0) : g.g;
    r.g = Expr::number(a) * fg + Expr::number(b) * gg;
    return r;
}

}  // namespace liouville
