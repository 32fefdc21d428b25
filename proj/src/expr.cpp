#include "skewlin/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "skewlin/errors.hpp"

namespace skewlin {

namespace {
[[noreturn]] void fail(const std::string& src, std::size_t pos, const std::string& msg) {
    std::ostringstream os;
    os << "expression error at position " << pos << " in \"" << src << "\": " << msg;
    throw ValidationError(os.str());
}
}  // namespace

class ExprParser {
public:
    ExprParser(const std::string& src, int dim) : src_(src), dim_(dim) {}

    Expression run() {
        Expression e;
        e.src_ = src_;
        out_ = &e.code_;
        skip_ws();
        parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail(src_, pos_, "trailing input");
        if (out_->empty()) fail(src_, 0, "empty expression");
        e.uses_base_ = uses_base_;
        return e;
    }

private:
    const std::string& src_;
    int dim_;
    std::size_t pos_ = 0;
    std::vector<Expression::Instr>* out_ = nullptr;
    bool uses_base_ = false;

    using Op = decltype(Expression::Instr::op);

    void emit(Op op, double v = 0.0, int idx = 0) { out_->push_back({op, v, idx}); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() { skip_ws(); return pos_ < src_.size() ? src_[pos_] : '\0'; }

    bool consume(char c) {
        if (peek() == c) { ++pos_; return true; }
        return false;
    }

    void parse_expr() {
        parse_term();
        for (;;) {
            if (consume('+')) { parse_term(); emit(Op::add); }
            else if (consume('-')) { parse_term(); emit(Op::sub); }
            else break;
        }
    }

    void parse_term() {
        parse_factor();
        for (;;) {
            if (consume('*')) { parse_factor(); emit(Op::mul); }
            else if (consume('/')) { parse_factor(); emit(Op::div); }
            else break;
        }
    }

    void parse_factor() {
        parse_unary();
        if (consume('^')) { parse_factor(); emit(Op::pow); }
    }

    void parse_unary() {
        int negs = 0;
        for (;;) {
            if (consume('-')) ++negs;
            else if (consume('+')) { /* no-op */ }
            else break;
        }
        parse_primary();
        if (negs % 2 == 1) emit(Op::neg);
    }

    void parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail(src_, pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail(src_, pos_, "malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            emit(Op::push_const, v);
            return;
        }
        if (c == '(') {
            ++pos_;
            parse_expr();
            if (!consume(')')) fail(src_, pos_, "expected ')'");
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (name == "x") { emit(Op::push_x); return; }
            if (name == "pi") { emit(Op::push_const, 3.14159265358979323846); return; }
            if (name == "e") { emit(Op::push_const, 2.71828182845904523536); return; }
            if (name.size() >= 2 && name[0] == 'b') {
                bool digits = true;
                for (std::size_t i = 1; i < name.size(); ++i)
                    digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
                if (digits) {
                    const int k = std::atoi(name.c_str() + 1);
                    if (k < 1 || k > dim_)
                        fail(src_, start, "base variable " + name + " out of range for dimension " +
                                              std::to_string(dim_));
                    uses_base_ = true;
                    emit(Op::push_b, 0.0, k - 1);
                    return;
                }
            }
            static const struct { const char* n; Op op; } kFns[] = {
                {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp},   {"log", Op::log},
                {"sqrt", Op::sqrt}, {"tanh", Op::tanh}, {"abs", Op::abs},
            };
            for (const auto& f : kFns) {
                if (name == f.n) {
                    if (!consume('(')) fail(src_, pos_, std::string("expected '(' after ") + f.n);
                    parse_expr();
                    if (!consume(')')) fail(src_, pos_, "expected ')'");
                    emit(f.op);
                    return;
                }
            }
            fail(src_, start, "unknown identifier '" + name + "'");
        }
        fail(src_, pos_, std::string("unexpected character '") + c + "'");
    }
};

Expression Expression::parse(const std::string& source, int dim) {
    return ExprParser(source, dim).run();
}

double Expression::eval(std::span<const double> b, double x) const {
    std::array<double, 64> stack;
    std::size_t top = 0;
    auto push = [&](double v) {
        if (top >= stack.size()) throw ValidationError("expression too deep");
        stack[top++] = v;
    };
    auto pop = [&]() { return stack[--top]; };
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::push_const: push(in.value); break;
            case Op::push_x: push(x); break;
            case Op::push_b: push(b[static_cast<std::size_t>(in.index)]); break;
            case Op::add: { double r = pop(); stack[top - 1] += r; break; }
            case Op::sub: { double r = pop(); stack[top - 1] -= r; break; }
            case Op::mul: { double r = pop(); stack[top - 1] *= r; break; }
            case Op::div: { double r = pop(); stack[top - 1] /= r; break; }
            case Op::pow: { double r = pop(); stack[top - 1] = std::pow(stack[top - 1], r); break; }
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::log: stack[top - 1] = std::log(stack[top - 1]); break;
            case Op::sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
            case Op::abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
        }
    }
    return stack[0];
}

}  // namespace skewlin
