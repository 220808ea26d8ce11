#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fbcap {

inline constexpr const char* kVersion = "0.1.0";

/// Smallest probability mass treated as nonzero; anything below is clamped
/// to exact zero before normalization.
inline constexpr double kProbFloor = 1e-15;

/// Malformed or out-of-domain user input (bad dimensions, negative mass,
/// unnormalized distributions, invalid resolutions).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid model that falls outside the class an operation
/// supports (not degraded, feedback term present where none is allowed, ...).
struct model_class_error : std::runtime_error {
    explicit model_class_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Unit { nats, bits };

inline double from_nats(double x, Unit u) {
    return u == Unit::bits ? x / M_LN2 : x;
}

inline double to_nats(double x, Unit u) {
    return u == Unit::bits ? x * M_LN2 : x;
}

inline Unit parse_unit(std::string_view s) {
    if (s == "nats") return Unit::nats;
    if (s == "bits") return Unit::bits;
    throw input_error("unknown unit: " + std::string(s));
}

/// x log x with the 0 log 0 = 0 convention, in nats.
inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

/// Deterministic 64-bit generator (splitmix64).  All randomized sweeps in
/// the library derive their streams from this; identical seeds give
/// identical results on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        return next() % n;
    }

    /// Standard normal via Box-Muller; second deviate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Point drawn uniformly (Dirichlet(1,...,1)) from the k-simplex.
    std::vector<double> simplex(std::size_t k) {
        std::vector<double> p(k);
        double s = 0.0;
        for (auto& v : p) {
            double u = uniform01();
            while (u <= 0.0) u = uniform01();
            v = -std::log(u);
            s += v;
        }
        for (auto& v : p) v /= s;
        return p;
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a over a byte string; used to fingerprint inputs in report headers.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(s.data(), s.size());
}

/// Shortest round-trip decimal form of a double (%.17g).
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Whole-file slurp; throws input_error when the file cannot be read.
std::string read_file(const std::string& path);

/// Atomic-ish whole-file write; throws input_error on failure.
void write_file(const std::string& path, const std::string& content);

/// Outcome of one verification instance.  `gap` is the slack of the checked
/// inequality (sign convention documented per suite).
struct CheckRecord {
    std::string construction;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    bool pass = true;
};

/// Aggregated verification outcome; `pass` is the conjunction over records.
struct CheckReport {
    std::string suite;
    std::vector<CheckRecord> records;
    bool pass = true;

    void add(CheckRecord r) {
        pass = pass && r.pass;
        records.push_back(std::move(r));
    }
    void merge(const CheckReport& other) {
        for (const auto& r : other.records) add(r);
    }
    double min_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (const auto& r : records) g = std::min(g, r.gap);
        return g;
    }
    double max_abs_gap() const {
        double g = 0.0;
        for (const auto& r : records) g = std::max(g, std::abs(r.gap));
        return g;
    }
};

}  // namespace fbcap
