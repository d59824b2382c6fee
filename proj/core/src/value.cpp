#include "bhl/value.hpp"

#include "bhl/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace bhl {

Value Value::boolean(bool b) {
    Value v;
    v.kind_ = Kind::Bool;
    v.b_ = b;
    return v;
}

Value Value::integer(std::int64_t i) {
    Value v;
    v.kind_ = Kind::Int;
    v.i_ = i;
    return v;
}

Value Value::real(double r) {
    Value v;
    v.kind_ = Kind::Real;
    v.r_ = r;
    return v;
}

Value Value::tuple(std::vector<Value> xs) {
    Value v;
    v.kind_ = Kind::Tuple;
    v.xs_ = std::move(xs);
    return v;
}

Value Value::list(std::vector<Value> xs) {
    Value v;
    v.kind_ = Kind::List;
    v.xs_ = std::move(xs);
    return v;
}

Value Value::dist(Dist d) {
    Value v;
    v.kind_ = Kind::Dist;
    v.d_ = d;
    return v;
}

Value Value::reals(const std::vector<double>& xs) {
    std::vector<Value> vs;
    vs.reserve(xs.size());
    for (double x : xs) vs.push_back(real(x));
    return list(std::move(vs));
}

bool Value::as_bool() const {
    if (kind_ != Kind::Bool) fail(Error::Kind::Eval, "expected a boolean, got " + str());
    return b_;
}

std::int64_t Value::as_int() const {
    if (kind_ != Kind::Int) fail(Error::Kind::Eval, "expected an integer, got " + str());
    return i_;
}

double Value::as_real() const {
    if (kind_ == Kind::Int) return static_cast<double>(i_);
    if (kind_ == Kind::Real) return r_;
    fail(Error::Kind::Eval, "expected a number, got " + str());
}

const std::vector<Value>& Value::elems() const {
    if (kind_ != Kind::Tuple && kind_ != Kind::List) fail(Error::Kind::Eval, "expected a tuple or list, got " + str());
    return xs_;
}

const Dist& Value::as_dist() const {
    if (kind_ != Kind::Dist) fail(Error::Kind::Eval, "expected a distribution, got " + str());
    return d_;
}

std::vector<double> Value::as_reals() const {
    if (kind_ != Kind::List) fail(Error::Kind::Eval, "expected a dataset (list of numbers), got " + str());
    std::vector<double> out;
    out.reserve(xs_.size());
    for (const auto& x : xs_) out.push_back(x.as_real());
    return out;
}

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

std::string format_sig(double x, int sig) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", sig, x);
    return buf;
}

std::string Value::str() const {
    switch (kind_) {
    case Kind::Undef: return "undef";
    case Kind::Bool: return b_ ? "true" : "false";
    case Kind::Int: return std::to_string(i_);
    case Kind::Real: return format_real(r_);
    case Kind::Tuple:
    case Kind::List: {
        std::string s = kind_ == Kind::Tuple ? "(" : "[";
        for (size_t i = 0; i < xs_.size(); ++i) {
            if (i) s += ", ";
            s += xs_[i].str();
        }
        if (kind_ == Kind::Tuple && xs_.size() == 1) s += ",";
        return s + (kind_ == Kind::Tuple ? ")" : "]");
    }
    case Kind::Dist:
        if (d_.kind == Dist::Kind::Normal) return "N(" + format_real(d_.a) + ", " + format_real(d_.b) + ")";
        return "U(" + format_real(d_.a) + ", " + format_real(d_.b) + ")";
    }
    return "?";
}

bool Value::operator==(const Value& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
    case Kind::Undef: return true;
    case Kind::Bool: return b_ == o.b_;
    case Kind::Int: return i_ == o.i_;
    case Kind::Real: return r_ == o.r_ || (std::isnan(r_) && std::isnan(o.r_));
    case Kind::Tuple:
    case Kind::List: return xs_ == o.xs_;
    case Kind::Dist: return d_ == o.d_;
    }
    return false;
}

bool values_equal(const Value& a, const Value& b) {
    if (a.is_numeric() && b.is_numeric()) return std::fabs(a.as_real() - b.as_real()) <= kTol;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case Value::Kind::Tuple:
    case Value::Kind::List: {
        const auto& xs = a.elems();
        const auto& ys = b.elems();
        if (xs.size() != ys.size()) return false;
        for (size_t i = 0; i < xs.size(); ++i)
            if (!values_equal(xs[i], ys[i])) return false;
        return true;
    }
    case Value::Kind::Dist: {
        const Dist& x = a.as_dist();
        const Dist& y = b.as_dist();
        return x.kind == y.kind && std::fabs(x.a - y.a) <= kTol && std::fabs(x.b - y.b) <= kTol;
    }
    default: return a == b;
    }
}

std::string Type::str() const {
    switch (kind) {
    case Kind::Bool: return "bool";
    case Kind::Int: return "int";
    case Kind::Nat: return "nat";
    case Kind::Real: return "real";
    case Kind::Prob: return "prob";
    case Kind::Dist: return "dist";
    case Kind::List: return "list(" + args.at(0).str() + ")";
    case Kind::Tuple: {
        std::string s = "(";
        for (size_t i = 0; i < args.size(); ++i) s += (i ? " * " : "") + args[i].str();
        return s + ")";
    }
    }
    return "?";
}

bool assignable(const Type& to, const Type& from) {
    if (to.is_numeric() && from.is_numeric()) {
        if (to.kind == from.kind) return true;
        if (to.kind == Type::Kind::Real) return true;
        if (to.kind == Type::Kind::Int) return from.kind == Type::Kind::Nat;
        // probabilities accept any number and are range-checked at run time
        return to.kind == Type::Kind::Prob;
    }
    if (to.kind != from.kind) return false;
    if (to.args.size() != from.args.size()) return false;
    for (size_t i = 0; i < to.args.size(); ++i)
        if (!assignable(to.args[i], from.args[i])) return false;
    return true;
}

bool value_has_type(const Value& v, const Type& t) {
    switch (t.kind) {
    case Type::Kind::Bool: return v.kind() == Value::Kind::Bool;
    case Type::Kind::Int: return v.kind() == Value::Kind::Int;
    case Type::Kind::Nat: return v.kind() == Value::Kind::Int && v.as_int() >= 0;
    case Type::Kind::Real: return v.is_numeric();
    case Type::Kind::Prob: return v.is_numeric() && v.as_real() >= -kTol && v.as_real() <= 1 + kTol;
    case Type::Kind::Dist: return v.kind() == Value::Kind::Dist;
    case Type::Kind::List:
        if (v.kind() != Value::Kind::List) return false;
        for (const auto& x : v.elems())
            if (!value_has_type(x, t.args.at(0))) return false;
        return true;
    case Type::Kind::Tuple:
        if (v.kind() != Value::Kind::Tuple || v.elems().size() != t.args.size()) return false;
        for (size_t i = 0; i < t.args.size(); ++i)
            if (!value_has_type(v.elems()[i], t.args[i])) return false;
        return true;
    }
    return false;
}

} // namespace bhl
