#ifndef QDB_EXTREAL_HPP
#define QDB_EXTREAL_HPP

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace qdb {

// Finite nonnegative value or +infinity as an explicit tag, never a large
// float. Comparisons against +infinity are exact.
class ExtReal {
  public:
    ExtReal() = default;
    ExtReal(double v) : v_(v), inf_(false) {}  // NOLINT(google-explicit-constructor)
    static ExtReal infinity() {
        ExtReal e;
        e.inf_ = true;
        return e;
    }

    bool is_inf() const { return inf_; }
    bool is_finite() const { return !inf_; }
    double value() const { return inf_ ? std::numeric_limits<double>::infinity() : v_; }
    // Finite value, or `fallback` when infinite.
    double value_or(double fallback) const { return inf_ ? fallback : v_; }

    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
        return a.v_ == b.v_;
    }
    friend bool operator<(const ExtReal& a, const ExtReal& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator<=(const ExtReal& a, const ExtReal& b) { return a < b || a == b; }

    std::string str() const { return inf_ ? "inf" : std::to_string(v_); }
    friend std::ostream& operator<<(std::ostream& os, const ExtReal& e) {
        if (e.inf_) return os << "inf";
        return os << e.v_;
    }

  private:
    double v_ = 0.0;
    bool inf_ = false;
};

}  // namespace qdb

#endif
