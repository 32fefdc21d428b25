#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skewlin {

/// Arithmetic expression over the variables x, b1..bd, compiled once to a
/// postfix program and evaluated on a small stack. Grammar:
///
///   expr   := term  (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := unary ('^' factor)?                (right associative)
///   unary  := ('-'|'+')* primary
///   primary:= number | 'x' | 'b'<k> | 'pi' | 'e'
///           | ('sin'|'cos'|'exp'|'log'|'sqrt'|'tanh'|'abs') '(' expr ')'
///           | '(' expr ')'
class Expression {
public:
    static Expression parse(const std::string& source, int dim);

    double eval(std::span<const double> b, double x) const;

    const std::string& source() const { return src_; }
    bool uses_base() const { return uses_base_; }

private:
    enum class Op : std::uint8_t {
        push_const, push_x, push_b,
        add, sub, mul, div, pow, neg,
        sin, cos, exp, log, sqrt, tanh, abs,
    };
    struct Instr {
        Op op;
        double value = 0.0;
        int index = 0;
    };

    std::vector<Instr> code_;
    std::string src_;
    bool uses_base_ = false;

    friend class ExprParser;
};

}  // namespace skewlin
