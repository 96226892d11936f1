#pragma once
// Scalar expressions in the variables x, y and parameters a1..am.
// Immutable ASTs, exact symbolic differentiation, and a flat tape
// representation for fast repeated evaluation inside the integrators.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csb {

class ExprError : public std::runtime_error {
public:
    ExprError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset(offset) {}
    std::size_t offset;
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Op : std::uint8_t {
    Const, Var, Neg, Exp, Ln, Sin, Cos, Sqrt, Add, Sub, Mul, Div, Pow
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    Op op;
    double value = 0.0;   // Const
    int var = -1;         // Var: 0 = x, 1 = y, 2+k = a(k+1)
    int exponent = 0;     // Pow
    ExprPtr a, b;
};

namespace detail {

inline ExprPtr mk_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

inline ExprPtr mk_var(int idx) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Var;
    n->var = idx;
    return n;
}

inline bool is_const(const ExprPtr& e, double v) {
    return e->op == Op::Const && e->value == v;
}

inline ExprPtr mk_neg(ExprPtr u) {
    if (u->op == Op::Const) return mk_const(-u->value);
    if (u->op == Op::Neg) return u->a;
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Neg;
    n->a = std::move(u);
    return n;
}

inline ExprPtr mk_bin(Op op, ExprPtr l, ExprPtr r) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(l);
    n->b = std::move(r);
    return n;
}

inline ExprPtr mk_add(ExprPtr l, ExprPtr r) {
    if (l->op == Op::Const && r->op == Op::Const) return mk_const(l->value + r->value);
    if (is_const(l, 0.0)) return r;
    if (is_const(r, 0.0)) return l;
    return mk_bin(Op::Add, std::move(l), std::move(r));
}

inline ExprPtr mk_sub(ExprPtr l, ExprPtr r) {
    if (l->op == Op::Const && r->op == Op::Const) return mk_const(l->value - r->value);
    if (is_const(r, 0.0)) return l;
    if (is_const(l, 0.0)) return mk_neg(std::move(r));
    return mk_bin(Op::Sub, std::move(l), std::move(r));
}

inline ExprPtr mk_mul(ExprPtr l, ExprPtr r) {
    if (l->op == Op::Const && r->op == Op::Const) return mk_const(l->value * r->value);
    if (is_const(l, 0.0) || is_const(r, 0.0)) return mk_const(0.0);
    if (is_const(l, 1.0)) return r;
    if (is_const(r, 1.0)) return l;
    return mk_bin(Op::Mul, std::move(l), std::move(r));
}

inline ExprPtr mk_div(ExprPtr l, ExprPtr r) {
    if (l->op == Op::Const && r->op == Op::Const && r->value != 0.0)
        return mk_const(l->value / r->value);
    if (is_const(l, 0.0)) return mk_const(0.0);
    if (is_const(r, 1.0)) return l;
    return mk_bin(Op::Div, std::move(l), std::move(r));
}

inline ExprPtr mk_pow(ExprPtr u, int n) {
    if (n == 0) return mk_const(1.0);
    if (n == 1) return u;
    if (u->op == Op::Const) {
        double v = 1.0, base = u->value;
        int k = n < 0 ? -n : n;
        for (int i = 0; i < k; ++i) v *= base;
        return mk_const(n < 0 ? 1.0 / v : v);
    }
    auto node = std::make_shared<ExprNode>();
    node->op = Op::Pow;
    node->exponent = n;
    node->a = std::move(u);
    return node;
}

inline ExprPtr mk_fun(Op op, ExprPtr u) {
    if (u->op == Op::Const) {
        double v = u->value;
        switch (op) {
            case Op::Exp: return mk_const(std::exp(v));
            case Op::Sin: return mk_const(std::sin(v));
            case Op::Cos: return mk_const(std::cos(v));
            case Op::Ln:
                if (v > 0.0) return mk_const(std::log(v));
                break;
            case Op::Sqrt:
                if (v >= 0.0) return mk_const(std::sqrt(v));
                break;
            default: break;
        }
    }
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(u);
    return n;
}

inline double powi(double base, int n) {
    int k = n < 0 ? -n : n;
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= base;
    return n < 0 ? 1.0 / v : v;
}

}  // namespace detail

// An immutable expression with a declared parameter arity m.  Variable
// slots are [x, y, a1, ..., am]; evaluation is deterministic.
class Expr {
public:
    Expr() : root_(detail::mk_const(0.0)), arity_(0) {}
    Expr(ExprPtr root, int arity) : root_(std::move(root)), arity_(arity) {}

    static Expr parse(std::string_view text, int m);
    static Expr constant(double v, int m = 0) { return Expr(detail::mk_const(v), m); }

    const ExprPtr& root() const { return root_; }
    int arity() const { return arity_; }

    double eval(double x, double y, const double* alpha) const {
        double vars[2 + 32];
        vars[0] = x;
        vars[1] = y;
        for (int i = 0; i < arity_; ++i) vars[2 + i] = alpha ? alpha[i] : 0.0;
        return eval_node(root_.get(), vars);
    }
    double eval(double x, double y, const std::vector<double>& alpha) const {
        if (static_cast<int>(alpha.size()) < arity_)
            throw ExprError("parameter vector shorter than arity", 0);
        return eval(x, y, alpha.data());
    }

    Expr diff(int var) const {
        if (var < 0 || var >= arity_ + 2)
            throw ExprError("derivative variable out of range", 0);
        return Expr(diff_node(root_, var), arity_);
    }

    std::string to_string() const {
        std::string out;
        print_node(root_.get(), out);
        return out;
    }

    bool equals(const Expr& other) const {
        return arity_ == other.arity_ && node_equal(root_.get(), other.root_.get());
    }

    // Arithmetic on expressions (arities must agree; constants adapt).
    friend Expr operator+(const Expr& l, const Expr& r) {
        return Expr(detail::mk_add(l.root_, r.root_), std::max(l.arity_, r.arity_));
    }
    friend Expr operator-(const Expr& l, const Expr& r) {
        return Expr(detail::mk_sub(l.root_, r.root_), std::max(l.arity_, r.arity_));
    }
    friend Expr operator*(const Expr& l, const Expr& r) {
        return Expr(detail::mk_mul(l.root_, r.root_), std::max(l.arity_, r.arity_));
    }
    friend Expr operator-(const Expr& u) { return Expr(detail::mk_neg(u.root_), u.arity_); }

private:
    static double eval_node(const ExprNode* n, const double* vars) {
        switch (n->op) {
            case Op::Const: return n->value;
            case Op::Var: return vars[n->var];
            case Op::Neg: return -eval_node(n->a.get(), vars);
            case Op::Exp: return std::exp(eval_node(n->a.get(), vars));
            case Op::Ln: {
                double v = eval_node(n->a.get(), vars);
                if (v <= 0.0) throw DomainError("ln of non-positive value");
                return std::log(v);
            }
            case Op::Sin: return std::sin(eval_node(n->a.get(), vars));
            case Op::Cos: return std::cos(eval_node(n->a.get(), vars));
            case Op::Sqrt: {
                double v = eval_node(n->a.get(), vars);
                if (v < 0.0) throw DomainError("sqrt of negative value");
                return std::sqrt(v);
            }
            case Op::Add: return eval_node(n->a.get(), vars) + eval_node(n->b.get(), vars);
            case Op::Sub: return eval_node(n->a.get(), vars) - eval_node(n->b.get(), vars);
            case Op::Mul: return eval_node(n->a.get(), vars) * eval_node(n->b.get(), vars);
            case Op::Div: return eval_node(n->a.get(), vars) / eval_node(n->b.get(), vars);
            case Op::Pow: return detail::powi(eval_node(n->a.get(), vars), n->exponent);
        }
        return 0.0;
    }

    static ExprPtr diff_node(const ExprPtr& n, int var) {
        using namespace detail;
        switch (n->op) {
            case Op::Const: return mk_const(0.0);
            case Op::Var: return mk_const(n->var == var ? 1.0 : 0.0);
            case Op::Neg: return mk_neg(diff_node(n->a, var));
            case Op::Add: return mk_add(diff_node(n->a, var), diff_node(n->b, var));
            case Op::Sub: return mk_sub(diff_node(n->a, var), diff_node(n->b, var));
            case Op::Mul:
                return mk_add(mk_mul(diff_node(n->a, var), n->b),
                              mk_mul(n->a, diff_node(n->b, var)));
            case Op::Div:
                return mk_div(mk_sub(mk_mul(diff_node(n->a, var), n->b),
                                     mk_mul(n->a, diff_node(n->b, var))),
                              mk_pow(n->b, 2));
            case Op::Pow:
                return mk_mul(mk_mul(mk_const(double(n->exponent)),
                                     mk_pow(n->a, n->exponent - 1)),
                              diff_node(n->a, var));
            case Op::Exp: return mk_mul(mk_fun(Op::Exp, n->a), diff_node(n->a, var));
            case Op::Ln: return mk_div(diff_node(n->a, var), n->a);
            case Op::Sin: return mk_mul(mk_fun(Op::Cos, n->a), diff_node(n->a, var));
            case Op::Cos:
                return mk_neg(mk_mul(mk_fun(Op::Sin, n->a), diff_node(n->a, var)));
            case Op::Sqrt:
                return mk_div(diff_node(n->a, var),
                              mk_mul(mk_const(2.0), mk_fun(Op::Sqrt, n->a)));
        }
        return mk_const(0.0);
    }

    static bool node_equal(const ExprNode* l, const ExprNode* r) {
        if (l->op != r->op) return false;
        switch (l->op) {
            case Op::Const: return l->value == r->value;
            case Op::Var: return l->var == r->var;
            case Op::Pow:
                return l->exponent == r->exponent && node_equal(l->a.get(), r->a.get());
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
                return node_equal(l->a.get(), r->a.get()) &&
                       node_equal(l->b.get(), r->b.get());
            default:
                return node_equal(l->a.get(), r->a.get());
        }
    }

    static void print_const(double v, std::string& out) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
    }

    static void print_atom(const ExprNode* n, std::string& out) {
        // Emit a grammar "atom": parenthesize anything that is not one already.
        if (n->op == Op::Var || (n->op == Op::Const && n->value >= 0.0) ||
            n->op == Op::Exp || n->op == Op::Ln || n->op == Op::Sin ||
            n->op == Op::Cos || n->op == Op::Sqrt) {
            print_node(n, out);
        } else {
            out += '(';
            print_node(n, out);
            out += ')';
        }
    }

    static void print_node(const ExprNode* n, std::string& out) {
        switch (n->op) {
            case Op::Const: print_const(n->value, out); break;
            case Op::Var:
                if (n->var == 0) out += 'x';
                else if (n->var == 1) out += 'y';
                else out += "a" + std::to_string(n->var - 1);
                break;
            case Op::Neg:
                out += '-';
                print_atom(n->a.get(), out);
                break;
            case Op::Exp: out += "exp("; print_node(n->a.get(), out); out += ')'; break;
            case Op::Ln: out += "ln("; print_node(n->a.get(), out); out += ')'; break;
            case Op::Sin: out += "sin("; print_node(n->a.get(), out); out += ')'; break;
            case Op::Cos: out += "cos("; print_node(n->a.get(), out); out += ')'; break;
            case Op::Sqrt: out += "sqrt("; print_node(n->a.get(), out); out += ')'; break;
            case Op::Pow:
                print_atom(n->a.get(), out);
                out += '^';
                out += std::to_string(n->exponent);
                break;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
                out += '(';
                print_node(n->a.get(), out);
                out += n->op == Op::Add ? '+' : n->op == Op::Sub ? '-'
                     : n->op == Op::Mul ? '*' : '/';
                print_node(n->b.get(), out);
                out += ')';
                break;
            }
        }
    }

    ExprPtr root_;
    int arity_;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, int m) : text_(text), m_(m) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ExprError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        for (;;) {
            if (accept('+')) e = mk_add(e, parse_term());
            else if (accept('-')) e = mk_sub(e, parse_term());
            else return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            if (accept('*')) e = mk_mul(e, parse_factor());
            else if (accept('/')) e = mk_div(e, parse_factor());
            else return e;
        }
    }

    ExprPtr parse_factor() {
        bool neg = accept('-');
        ExprPtr e = parse_atom();
        if (accept('^')) e = mk_pow(e, parse_int_exponent());
        if (neg) e = mk_neg(e);
        return e;
    }

    int parse_int_exponent() {
        skip_ws();
        std::size_t start = pos_;
        bool negative = false;
        if (pos_ < text_.size() && text_[pos_] == '-') { negative = true; ++pos_; }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw ExprError("expected integer exponent", start);
        long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 64) throw ExprError("exponent too large", start);
            ++pos_;
        }
        return negative ? -static_cast<int>(v) : static_cast<int>(v);
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ExprError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!accept(')')) throw ExprError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ExprError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ExprError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return mk_const(v);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x") return mk_var(0);
        if (name == "y") return mk_var(1);
        if (name == "a") {
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ExprError("parameter name requires an index, e.g. a1", start);
            long idx = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                idx = idx * 10 + (text_[pos_] - '0');
                if (idx > 1000) throw ExprError("parameter index too large", start);
                ++pos_;
            }
            if (idx < 1 || idx > m_)
                throw ExprError("parameter a" + std::to_string(idx) +
                                " exceeds declared arity m=" + std::to_string(m_), start);
            return mk_var(1 + static_cast<int>(idx));
        }
        Op fn;
        if (name == "exp") fn = Op::Exp;
        else if (name == "ln") fn = Op::Ln;
        else if (name == "sin") fn = Op::Sin;
        else if (name == "cos") fn = Op::Cos;
        else if (name == "sqrt") fn = Op::Sqrt;
        else throw ExprError("unknown identifier '" + std::string(name) + "'", start);
        if (!accept('(')) throw ExprError("expected '(' after function name", pos_);
        ExprPtr arg = parse_expr();
        if (!accept(')')) throw ExprError("expected ')'", pos_);
        return mk_fun(fn, arg);
    }

    std::string_view text_;
    int m_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr Expr::parse(std::string_view text, int m) {
    if (m < 0) throw ExprError("arity must be non-negative", 0);
    detail::Parser p(text, m);
    return Expr(p.run(), m);
}

// Flat postfix program compiled from an Expr.  Evaluation never throws;
// out-of-domain ln/sqrt produce NaN, which callers in the integration
// layer surface as numerical failures.
class Tape {
public:
    Tape() = default;
    explicit Tape(const Expr& e) : arity_(e.arity()) { compile(e.root().get()); }

    double eval(const double* vars) const {
        double stack[64];
        int sp = 0;
        for (const Instr& in : code_) {
            switch (in.op) {
                case Op::Const: stack[sp++] = in.value; break;
                case Op::Var: stack[sp++] = vars[in.var]; break;
                case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
                case Op::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
                case Op::Ln:
                    stack[sp - 1] = stack[sp - 1] > 0.0
                        ? std::log(stack[sp - 1])
                        : std::numeric_limits<double>::quiet_NaN();
                    break;
                case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
                case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
                case Op::Sqrt:
                    stack[sp - 1] = stack[sp - 1] >= 0.0
                        ? std::sqrt(stack[sp - 1])
                        : std::numeric_limits<double>::quiet_NaN();
                    break;
                case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
                case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
                case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
                case Op::Div: --sp; stack[sp - 1] /= stack[sp]; break;
                case Op::Pow: stack[sp - 1] = detail::powi(stack[sp - 1], in.var); break;
            }
        }
        return stack[0];
    }

    double eval(double x, double y, const double* alpha) const {
        double vars[2 + 32];
        vars[0] = x;
        vars[1] = y;
        for (int i = 0; i < arity_; ++i) vars[2 + i] = alpha ? alpha[i] : 0.0;
        return eval(vars);
    }

    int arity() const { return arity_; }

private:
    struct Instr {
        Op op;
        int var = 0;      // Var index, or Pow exponent
        double value = 0; // Const payload
    };

    void compile(const ExprNode* n) {
        switch (n->op) {
            case Op::Const: code_.push_back({Op::Const, 0, n->value}); return;
            case Op::Var: code_.push_back({Op::Var, n->var, 0}); return;
            case Op::Pow:
                compile(n->a.get());
                code_.push_back({Op::Pow, n->exponent, 0});
                return;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
                compile(n->a.get());
                compile(n->b.get());
                code_.push_back({n->op, 0, 0});
                return;
            default:
                compile(n->a.get());
                code_.push_back({n->op, 0, 0});
                return;
        }
    }

    std::vector<Instr> code_;
    int arity_ = 0;
};

}  // namespace csb
