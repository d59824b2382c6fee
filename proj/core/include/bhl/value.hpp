#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bhl {

// Comparison tolerance shared by predicates and p-value checks.
inline constexpr double kTol = 1e-9;

struct Dist {
    enum class Kind { Normal, Uniform };
    Kind kind = Kind::Normal;
    double a = 0.0; // Normal: mean; Uniform: lower bound
    double b = 1.0; // Normal: variance; Uniform: upper bound
    bool operator==(const Dist&) const = default;
};

class Value {
public:
    enum class Kind { Undef, Bool, Int, Real, Tuple, List, Dist };

    Value() = default;
    static Value undef() { return Value(); }
    static Value boolean(bool b);
    static Value integer(std::int64_t i);
    static Value real(double r);
    static Value tuple(std::vector<Value> xs);
    static Value list(std::vector<Value> xs);
    static Value dist(Dist d);
    static Value reals(const std::vector<double>& xs);

    Kind kind() const { return kind_; }
    bool is_undef() const { return kind_ == Kind::Undef; }
    bool is_numeric() const { return kind_ == Kind::Int || kind_ == Kind::Real; }

    bool as_bool() const;
    std::int64_t as_int() const;
    double as_real() const; // Int or Real
    const std::vector<Value>& elems() const; // Tuple or List
    const Dist& as_dist() const;
    std::vector<double> as_reals() const; // List of numbers

    // Exact, round-trippable rendering; also used as the key of test histories.
    std::string str() const;

    // Structural equality with exact reals (used for world identity).
    bool operator==(const Value& o) const;

private:
    Kind kind_ = Kind::Undef;
    bool b_ = false;
    std::int64_t i_ = 0;
    double r_ = 0.0;
    std::vector<Value> xs_;
    Dist d_;
};

// Data-value equality as used by the `=` predicate: numbers within kTol.
bool values_equal(const Value& a, const Value& b);

std::string format_real(double x);        // shortest round-trip form, always with a '.' or exponent
std::string format_sig(double x, int sig = 12);

struct Type {
    enum class Kind { Bool, Int, Nat, Real, Prob, Tuple, List, Dist };
    Kind kind = Kind::Real;
    std::vector<Type> args;

    static Type of(Kind k) { return Type{k, {}}; }
    static Type list(Type t) { return Type{Kind::List, {std::move(t)}}; }
    static Type tuple(std::vector<Type> ts) { return Type{Kind::Tuple, std::move(ts)}; }
    bool is_numeric() const { return kind == Kind::Int || kind == Kind::Nat || kind == Kind::Real || kind == Kind::Prob; }
    bool operator==(const Type&) const = default;
    std::string str() const;
};

// Whether a value of type `from` may be stored in a variable of type `to`.
bool assignable(const Type& to, const Type& from);
bool value_has_type(const Value& v, const Type& t);

} // namespace bhl
