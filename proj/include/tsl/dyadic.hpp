#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tsl {

/// Exact dyadic rational numerator * 2^-exponent.
///
/// Stored in normalised form (odd numerator whenever exponent > 0), so
/// equality of representations is equality of values.  Every operation
/// either returns the exact result or throws std::overflow_error.
class Dyadic {
public:
    constexpr Dyadic() = default;
    constexpr Dyadic(std::int64_t n) : num_(n), exp_(0) {}  // NOLINT: implicit from integers

    /// num * 2^-exponent; exponent may be negative.
    static Dyadic from_parts(std::int64_t num, int exponent);
    /// 2^k for any integer k.
    static Dyadic pow2(int k);
    /// Exact conversion of a finite double; throws if it does not fit.
    static Dyadic from_double(double x);

    std::int64_t numerator() const { return num_; }
    int exponent() const { return exp_; }

    double to_double() const;
    explicit operator double() const { return to_double(); }

    Dyadic operator-() const;
    Dyadic& operator+=(const Dyadic& o);
    Dyadic& operator-=(const Dyadic& o);
    Dyadic& operator*=(const Dyadic& o);
    friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
    friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
    friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

    /// this * 2^k
    Dyadic scaled(int k) const;

    bool is_zero() const { return num_ == 0; }
    int sign() const { return (num_ > 0) - (num_ < 0); }

    /// Largest integer <= value.
    std::int64_t floor() const;

    friend bool operator==(const Dyadic& a, const Dyadic& b) = default;
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

    /// Exact decimal expansion (dyadics have finite ones).
    std::string str() const;

private:
    static Dyadic make(__int128 n, int e);
    std::int64_t num_ = 0;
    int exp_ = 0;
};

Dyadic abs(const Dyadic& a);

/// floor(a / b) for b != 0.
std::int64_t floor_div(const Dyadic& a, const Dyadic& b);

/// floor(log2 |a|) for a != 0.
int floor_log2(const Dyadic& a);

/// True if |a| is an integer power of two.
bool is_pow2(const Dyadic& a);

}  // namespace tsl
