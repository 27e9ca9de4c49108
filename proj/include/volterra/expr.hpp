#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "volterra/errors.hpp"
#include "volterra/vec.hpp"

namespace volterra::expr {

// Identifier contexts: each admits a fixed set of names.
//   kernel:     t, s, u[i]
//   field:      t, x[i], y[i]
//   lyapunov_V: t, x[i], y[i]
//   lyapunov_g: t, v, w
//   lyapunov_S: t, s, v
enum class Context { kernel, field, lyapunov_V, lyapunov_g, lyapunov_S };

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct Bindings {
    double t = 0.0;
    double s = 0.0;
    double v = 0.0;
    double w = 0.0;
    const Vec* x = nullptr;
    const Vec* y = nullptr;
    const Vec* u = nullptr;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { number, scalar_var, indexed_var, unary_neg, binary, call };
    Kind kind;
    double value = 0.0;       // number
    char name = 0;            // scalar_var / indexed_var base
    std::size_t index = 0;    // indexed_var
    char op = 0;              // binary: + - * / ^
    std::string fn;           // call: sin cos exp tanh sqrt abs
    NodePtr lhs, rhs;         // binary; unary_neg and call use lhs
};

class Expr {
public:
    Expr() = default;
    Expr(NodePtr root, std::string src) : root_(std::move(root)), src_(std::move(src)) {}

    bool valid() const { return root_ != nullptr; }
    const std::string& source() const { return src_; }

    double eval(const Bindings& b) const { return eval_node(*root_, b); }

    // Largest index used with the given base identifier, or -1 if unused.
    long max_index(char base) const { return max_index_node(*root_, base); }

    // Canonical fully parenthesized printing; reparsing it yields a
    // structurally identical tree.
    std::string to_string() const { return print_node(*root_); }

    bool same_structure(const Expr& other) const {
        return same_node(root_.get(), other.root_.get());
    }

private:
    static double eval_node(const Node& n, const Bindings& b) {
        switch (n.kind) {
            case Node::Kind::number:
                return n.value;
            case Node::Kind::scalar_var:
                switch (n.name) {
                    case 't': return b.t;
                    case 's': return b.s;
                    case 'v': return b.v;
                    case 'w': return b.w;
                }
                throw EvaluationError("unbound scalar identifier", b.t, b.s);
            case Node::Kind::indexed_var: {
                const Vec* vec = n.name == 'x' ? b.x : n.name == 'y' ? b.y : b.u;
                if (!vec)
                    throw EvaluationError(std::string("unbound vector identifier ") + n.name, b.t, b.s);
                if (n.index >= vec->size())
                    throw EvaluationError(std::string(1, n.name) + "[" + std::to_string(n.index) +
                                              "]: index out of range",
                                          b.t, b.s);
                return (*vec)[n.index];
            }
            case Node::Kind::unary_neg:
                return -eval_node(*n.lhs, b);
            case Node::Kind::binary: {
                double a = eval_node(*n.lhs, b);
                double c = eval_node(*n.rhs, b);
                switch (n.op) {
                    case '+': return a + c;
                    case '-': return a - c;
                    case '*': return a * c;
                    case '/':
                        if (c == 0.0)
                            throw EvaluationError("division by zero in '" + print_node(n) + "'", b.t, b.s);
                        return a / c;
                    case '^': return std::pow(a, c);
                }
                throw EvaluationError("bad operator", b.t, b.s);
            }
            case Node::Kind::call: {
                double a = eval_node(*n.lhs, b);
                if (n.fn == "sin") return std::sin(a);
                if (n.fn == "cos") return std::cos(a);
                if (n.fn == "exp") return std::exp(a);
                if (n.fn == "tanh") return std::tanh(a);
                if (n.fn == "abs") return std::abs(a);
                if (n.fn == "sqrt") {
                    if (a < 0.0)
                        throw EvaluationError("sqrt of negative in '" + print_node(n) + "'", b.t, b.s);
                    return std::sqrt(a);
                }
                throw EvaluationError("unknown function " + n.fn, b.t, b.s);
            }
        }
        throw EvaluationError("bad node", b.t, b.s);
    }

    static long max_index_node(const Node& n, char base) {
        long m = -1;
        if (n.kind == Node::Kind::indexed_var && n.name == base)
            m = static_cast<long>(n.index);
        if (n.lhs) m = std::max(m, max_index_node(*n.lhs, base));
        if (n.rhs) m = std::max(m, max_index_node(*n.rhs, base));
        return m;
    }

    static std::string print_node(const Node& n) {
        std::ostringstream os;
        switch (n.kind) {
            case Node::Kind::number: {
                os.precision(17);
                os << n.value;
                break;
            }
            case Node::Kind::scalar_var:
                os << n.name;
                break;
            case Node::Kind::indexed_var:
                os << n.name << '[' << n.index << ']';
                break;
            case Node::Kind::unary_neg:
                os << "(-" << print_node(*n.lhs) << ')';
                break;
            case Node::Kind::binary:
                os << '(' << print_node(*n.lhs) << ' ' << n.op << ' ' << print_node(*n.rhs) << ')';
                break;
            case Node::Kind::call:
                os << n.fn << '(' << print_node(*n.lhs) << ')';
                break;
        }
        return os.str();
    }

    static bool same_node(const Node* a, const Node* b) {
        if (!a || !b) return a == b;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case Node::Kind::number: return a->value == b->value;
            case Node::Kind::scalar_var: return a->name == b->name;
            case Node::Kind::indexed_var: return a->name == b->name && a->index == b->index;
            case Node::Kind::unary_neg: return same_node(a->lhs.get(), b->lhs.get());
            case Node::Kind::binary:
                return a->op == b->op && same_node(a->lhs.get(), b->lhs.get()) &&
                       same_node(a->rhs.get(), b->rhs.get());
            case Node::Kind::call:
                return a->fn == b->fn && same_node(a->lhs.get(), b->lhs.get());
        }
        return false;
    }

    NodePtr root_;
    std::string src_;
};

namespace detail {

class Parser {
public:
    Parser(const std::string& src, Context ctx) : src_(src), ctx_(ctx) {}

    NodePtr run() {
        NodePtr e = parse_expr(0);
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(pos_, "unexpected character '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    // precedence: + - (1) < * / (2) < unary - (3) < ^ (4, right-assoc)
    static int precedence(char op) {
        switch (op) {
            case '+':
            case '-': return 1;
            case '*':
            case '/': return 2;
            case '^': return 4;
        }
        return -1;
    }

    NodePtr parse_expr(int min_prec) {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) break;
            char op = src_[pos_];
            int prec = precedence(op);
            if (prec < 0 || prec < min_prec) break;
            ++pos_;
            int next_min = (op == '^') ? prec : prec + 1;  // ^ is right-associative
            NodePtr rhs = parse_expr(next_min);
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::binary;
            n->op = op;
            n->lhs = lhs;
            n->rhs = rhs;
            lhs = n;
        }
        return lhs;
    }

    NodePtr parse_unary() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '-') {
            ++pos_;
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::unary_neg;
            n->lhs = parse_expr(3);  // binds looser than ^, tighter than * /
            return n;
        }
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr(0);
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(pos_, "unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // bare 'e' is not an exponent here
            }
        }
        try {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::number;
            n->value = std::stod(src_.substr(start, pos_ - start));
            return n;
        } catch (const std::exception&) {
            throw ParseError(start, "malformed number");
        }
    }

    NodePtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        static const char* functions[] = {"sin", "cos", "exp", "tanh", "sqrt", "abs"};
        for (const char* fn : functions) {
            if (name == fn) {
                expect('(');
                NodePtr arg = parse_expr(0);
                expect(')');
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::call;
                n->fn = name;
                n->lhs = arg;
                return n;
            }
        }
        if (name.size() != 1) throw ParseError(start, "unknown identifier '" + name + "'");
        char id = name[0];
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '[') {
            if (id != 'x' && id != 'y' && id != 'u')
                throw ParseError(start, std::string("identifier '") + id + "' is not indexable");
            check_admissible(id, start);
            ++pos_;
            skip_ws();
            std::size_t idx_start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ == idx_start) throw ParseError(pos_, "expected index digits");
            std::size_t index = std::stoul(src_.substr(idx_start, pos_ - idx_start));
            expect(']');
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::indexed_var;
            n->name = id;
            n->index = index;
            return n;
        }
        if (id == 'x' || id == 'y' || id == 'u')
            throw ParseError(start, std::string("identifier '") + id + "' requires an index");
        check_admissible(id, start);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::scalar_var;
        n->name = id;
        return n;
    }

    void check_admissible(char id, std::size_t at) const {
        static const char* admitted[] = {"tsu", "txy", "txy", "tvw", "tsv"};
        const char* ok = admitted[static_cast<int>(ctx_)];
        for (const char* p = ok; *p; ++p)
            if (*p == id) return;
        throw ParseError(at, std::string("identifier '") + id + "' is not admitted in this context");
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= src_.size() || src_[pos_] != c)
            throw ParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    const std::string& src_;
    Context ctx_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(const std::string& src, Context ctx) {
    return Expr(detail::Parser(src, ctx).run(), src);
}

}  // namespace volterra::expr
