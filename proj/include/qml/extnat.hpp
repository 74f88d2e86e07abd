#pragma once

// Arithmetic over N ∪ {aleph0}: absorption laws for addition and
// multiplication, total order with aleph0 on top.

#include <cassert>
#include <cstdint>
#include <limits>
#include <string>

namespace qml {

class ExtNat {
public:
  constexpr ExtNat() : val_(0), inf_(false) {}
  constexpr ExtNat(std::uint64_t v) : val_(v), inf_(false) {}

  static constexpr ExtNat aleph0() {
    ExtNat e;
    e.inf_ = true;
    return e;
  }

  constexpr bool is_inf() const { return inf_; }
  constexpr bool is_finite() const { return !inf_; }
  constexpr std::uint64_t finite_value() const {
    assert(!inf_);
    return val_;
  }

  friend constexpr bool operator==(ExtNat a, ExtNat b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.val_ == b.val_);
  }
  friend constexpr bool operator!=(ExtNat a, ExtNat b) { return !(a == b); }
  friend constexpr bool operator<=(ExtNat a, ExtNat b) {
    if (b.inf_) return true;
    if (a.inf_) return false;
    return a.val_ <= b.val_;
  }
  friend constexpr bool operator<(ExtNat a, ExtNat b) {
    return a <= b && a != b;
  }
  friend constexpr bool operator>=(ExtNat a, ExtNat b) { return b <= a; }
  friend constexpr bool operator>(ExtNat a, ExtNat b) { return b < a; }

  friend constexpr ExtNat operator+(ExtNat a, ExtNat b) {
    if (a.inf_ || b.inf_) return aleph0();
    assert(a.val_ <= std::numeric_limits<std::uint64_t>::max() - b.val_);
    return ExtNat(a.val_ + b.val_);
  }
  ExtNat& operator+=(ExtNat b) { return *this = *this + b; }

  // aleph0 * 0 = 0 * aleph0 = 0
  friend constexpr ExtNat operator*(ExtNat a, ExtNat b) {
    if ((a.is_finite() && a.val_ == 0) || (b.is_finite() && b.val_ == 0))
      return ExtNat(0);
    if (a.inf_ || b.inf_) return aleph0();
    assert(b.val_ == 0 || a.val_ <= std::numeric_limits<std::uint64_t>::max() / b.val_);
    return ExtNat(a.val_ * b.val_);
  }

  // Truncated subtraction on finite values; aleph0 - finite = aleph0.
  friend constexpr ExtNat monus(ExtNat a, ExtNat b) {
    if (a.inf_) return aleph0();
    if (b.inf_) return ExtNat(0);
    return ExtNat(a.val_ >= b.val_ ? a.val_ - b.val_ : 0);
  }

  friend constexpr ExtNat min(ExtNat a, ExtNat b) { return a <= b ? a : b; }
  friend constexpr ExtNat max(ExtNat a, ExtNat b) { return a <= b ? b : a; }

  std::string str() const { return inf_ ? "aleph0" : std::to_string(val_); }

private:
  std::uint64_t val_;
  bool inf_;
};

} // namespace qml
