#include "tsl/dyadic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsl {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();
constexpr i128 kMin = std::numeric_limits<std::int64_t>::min();

i128 shl_checked(i128 v, int s)
{
    if (s < 0) throw std::logic_error("negative shift");
    if (v == 0) return 0;
    if (s >= 126) throw std::overflow_error("Dyadic: shift overflow");
    i128 lim = (i128(1) << (126 - s));
    if (v >= lim || v <= -lim) throw std::overflow_error("Dyadic: shift overflow");
    return v << s;
}

}  // namespace

Dyadic Dyadic::make(i128 n, int e)
{
    if (n == 0) return Dyadic{};
    while (e > 0 && (n & 1) == 0) {
        n >>= 1;
        --e;
    }
    if (e < 0) {
        n = shl_checked(n, -e);
        e = 0;
    }
    if (n > kMax || n < kMin) throw std::overflow_error("Dyadic: numerator overflow");
    Dyadic d;
    d.num_ = static_cast<std::int64_t>(n);
    d.exp_ = e;
    return d;
}

Dyadic Dyadic::from_parts(std::int64_t num, int exponent) { return make(num, exponent); }

Dyadic Dyadic::pow2(int k) { return make(1, -k); }

Dyadic Dyadic::from_double(double x)
{
    if (!std::isfinite(x)) throw std::overflow_error("Dyadic: non-finite double");
    if (x == 0.0) return Dyadic{};
    int e = 0;
    double m = std::frexp(x, &e);        // x = m * 2^e, 0.5 <= |m| < 1
    double mi = std::ldexp(m, 53);       // integer valued
    return make(static_cast<std::int64_t>(mi), 53 - e);
}

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(num_), -exp_); }

Dyadic Dyadic::operator-() const { return make(-i128(num_), exp_); }

Dyadic& Dyadic::operator+=(const Dyadic& o)
{
    int e = exp_ > o.exp_ ? exp_ : o.exp_;
    i128 a = shl_checked(num_, e - exp_);
    i128 b = shl_checked(o.num_, e - o.exp_);
    return *this = make(a + b, e);
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += -o; }

Dyadic& Dyadic::operator*=(const Dyadic& o)
{
    return *this = make(i128(num_) * i128(o.num_), exp_ + o.exp_);
}

Dyadic Dyadic::scaled(int k) const { return make(num_, exp_ - k); }

std::int64_t Dyadic::floor() const
{
    if (exp_ == 0) return num_;
    if (exp_ >= 63) return num_ < 0 ? -1 : 0;
    return num_ >> exp_;  // arithmetic shift floors
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b)
{
    int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
    i128 x = shl_checked(a.num_, e - a.exp_);
    i128 y = shl_checked(b.num_, e - b.exp_);
    return x < y ? std::strong_ordering::less
                 : (x > y ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::string Dyadic::str() const
{
    if (exp_ == 0) return std::to_string(num_);
    // num / 2^e = num * 5^e / 10^e
    if (exp_ > 26) return std::to_string(num_) + "/2^" + std::to_string(exp_);
    i128 p5 = 1;
    for (int i = 0; i < exp_; ++i) p5 *= 5;
    i128 v = i128(num_) * p5;
    bool neg = v < 0;
    if (neg) v = -v;
    std::string digits;
    while (v > 0) {
        digits.insert(digits.begin(), char('0' + int(v % 10)));
        v /= 10;
    }
    while (int(digits.size()) <= exp_) digits.insert(digits.begin(), '0');
    std::string out = digits.substr(0, digits.size() - exp_) + "." + digits.substr(digits.size() - exp_);
    return neg ? "-" + out : out;
}

Dyadic abs(const Dyadic& a) { return a.sign() < 0 ? -a : a; }

std::int64_t floor_div(const Dyadic& a, const Dyadic& b)
{
    if (b.is_zero()) throw std::domain_error("floor_div by zero");
    int ea = a.exponent(), eb = b.exponent();
    i128 x = a.numerator(), y = b.numerator();
    if (eb > ea) x = shl_checked(x, eb - ea);
    else y = shl_checked(y, ea - eb);
    if (y < 0) {
        x = -x;
        y = -y;
    }
    i128 q = x / y;
    if ((x % y != 0) && (x < 0)) --q;
    if (q > kMax || q < kMin) throw std::overflow_error("floor_div overflow");
    return static_cast<std::int64_t>(q);
}

int floor_log2(const Dyadic& a)
{
    if (a.is_zero()) throw std::domain_error("floor_log2 of zero");
    std::uint64_t n = static_cast<std::uint64_t>(a.numerator() < 0 ? -a.numerator() : a.numerator());
    int bits = 63 - __builtin_clzll(n);
    return bits - a.exponent();
}

bool is_pow2(const Dyadic& a)
{
    if (a.is_zero()) return false;
    std::uint64_t n = static_cast<std::uint64_t>(a.numerator() < 0 ? -a.numerator() : a.numerator());
    return (n & (n - 1)) == 0;
}

}  // namespace tsl
