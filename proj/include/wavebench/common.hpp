#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define WB_DEFINE_ERROR(Name)                                       \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

WB_DEFINE_ERROR(ConfigError);
WB_DEFINE_ERROR(UnresolvedGeometry);
WB_DEFINE_ERROR(InvalidNesting);
WB_DEFINE_ERROR(PointInObstacle);
WB_DEFINE_ERROR(DegenerateCollar);
WB_DEFINE_ERROR(CflViolation);
WB_DEFINE_ERROR(BoxContamination);
WB_DEFINE_ERROR(TooLargeForOracle);
WB_DEFINE_ERROR(ZeroInitialData);
WB_DEFINE_ERROR(InsufficientSamples);
WB_DEFINE_ERROR(NonPositiveRatio);
WB_DEFINE_ERROR(SingularCollarSolve);
WB_DEFINE_ERROR(NotAContraction);
WB_DEFINE_ERROR(MaxIterExceeded);
WB_DEFINE_ERROR(TraceExtractionFailure);
WB_DEFINE_ERROR(IncompatibleSignal);
WB_DEFINE_ERROR(RobinSingular);
WB_DEFINE_ERROR(UnsupportedVariableMetric);

#undef WB_DEFINE_ERROR

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    return n > 0 ? Vec2{a.x / n, a.y / n} : Vec2{1.0, 0.0};
}
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Symmetric 2x2 tensor (metric coefficient of the elliptic operator).
struct Mat2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    static Mat2 identity() { return {1.0, 0.0, 1.0}; }

    double max_eigenvalue() const {
        const double tr = xx + yy;
        const double disc = std::sqrt((xx - yy) * (xx - yy) + 4.0 * xy * xy);
        return 0.5 * (tr + disc);
    }
    double min_eigenvalue() const {
        const double tr = xx + yy;
        const double disc = std::sqrt((xx - yy) * (xx - yy) + 4.0 * xy * xy);
        return 0.5 * (tr - disc);
    }
    bool is_identity() const { return xx == 1.0 && xy == 0.0 && yy == 1.0; }
};

/// Quintic smoothstep: 0 for s<=0, 1 for s>=1, C^2 in between.
inline double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

constexpr double pi = 3.14159265358979323846;

}  // namespace wb
