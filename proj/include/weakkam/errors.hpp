#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weakkam {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketFailure : public Error {
public:
    using Error::Error;
};

class NonMonotone : public Error {
public:
    using Error::Error;
};

class WindowTooSmall : public Error {
public:
    WindowTooSmall(std::size_t row, std::size_t col, int window)
        : Error("minimizing lift shift reaches the window boundary at (" + std::to_string(row) +
                ", " + std::to_string(col) + ") with window " + std::to_string(window)),
          row(row), col(col), window(window) {}
    std::size_t row;
    std::size_t col;
    int window;
};

class NoConvergence : public Error {
public:
    NoConvergence(double alpha_low, double alpha_high, std::size_t iterations)
        : Error("value iteration did not converge after " + std::to_string(iterations) +
                " iterations; alpha in [" + std::to_string(alpha_low) + ", " +
                std::to_string(alpha_high) + "]"),
          alpha_low(alpha_low), alpha_high(alpha_high), iterations(iterations) {}
    double alpha_low;
    double alpha_high;
    std::size_t iterations;
};

class MethodDisagreement : public Error {
public:
    MethodDisagreement(double from_alpha, double from_orbit)
        : Error("rotation number estimates disagree: alpha-derivative " +
                std::to_string(from_alpha) + " vs orbit " + std::to_string(from_orbit)),
          from_alpha(from_alpha), from_orbit(from_orbit) {}
    double from_alpha;
    double from_orbit;
};

class ExtrapolationUnstable : public Error {
public:
    ExtrapolationUnstable(double jump, double limit)
        : Error("discount extrapolation unstable: successive limits differ by " +
                std::to_string(jump) + " (limit " + std::to_string(limit) + ")"),
          jump(jump), limit(limit) {}
    double jump;
    double limit;
};

class PlateauDetectionAmbiguous : public Error {
public:
    PlateauDetectionAmbiguous(double c, long p1, long q1, long p2, long q2)
        : Error("two rationals fit the rotation number at c = " + std::to_string(c) + ": " +
                std::to_string(p1) + "/" + std::to_string(q1) + " and " + std::to_string(p2) +
                "/" + std::to_string(q2)),
          c(c), p1(p1), q1(q1), p2(p2), q2(q2) {}
    double c;
    long p1, q1, p2, q2;
};

class NotSemiConcave : public Error {
public:
    NotSemiConcave(std::size_t node, double excess)
        : Error("semi-concavity inequality fails at node " + std::to_string(node) + " by " +
                std::to_string(excess)),
          node(node), excess(excess) {}
    std::size_t node;
    double excess;
};

class RangeTooNarrow : public Error {
public:
    RangeTooNarrow(double theta, double r)
        : Error("sample (" + std::to_string(theta) + ", " + std::to_string(r) +
                ") is not bracketed by the pseudographs of the c-range"),
          theta(theta), r(r) {}
    double theta;
    double r;
};

class TooManyCorners : public Error {
public:
    TooManyCorners(std::size_t corners, std::size_t nodes)
        : Error(std::to_string(corners) + " corner nodes out of " + std::to_string(nodes)),
          corners(corners), nodes(nodes) {}
    std::size_t corners;
    std::size_t nodes;
};

class NoDescentProgress : public Error {
public:
    using Error::Error;
};

class OrbitEscape : public Error {
public:
    OrbitEscape(int index, double r)
        : Error("orbit leaves the validated band at index " + std::to_string(index) +
                " (r = " + std::to_string(r) + ")"),
          index(index), r(r) {}
    int index;
    double r;
};

class SlopeBlowup : public Error {
public:
    explicit SlopeBlowup(int index)
        : Error("image of the vertical is vertical at index " + std::to_string(index)),
          index(index) {}
    int index;
};

class NotInvariant : public Error {
public:
    NotInvariant(std::size_t node, double defect)
        : Error("leaf is not invariant at node " + std::to_string(node) + " (defect " +
                std::to_string(defect) + ")"),
          node(node), defect(defect) {}
    std::size_t node;
    double defect;
};

class NonPositiveTorsion : public Error {
public:
    NonPositiveTorsion(std::size_t node, double value)
        : Error("torsion " + std::to_string(value) + " is not positive at node " +
                std::to_string(node)),
          node(node), value(value) {}
    std::size_t node;
    double value;
};

class NotInvariantFoliation : public Error {
public:
    NotInvariantFoliation(double c, double defect)
        : Error("leaf c = " + std::to_string(c) + " is not invariant (defect " +
                std::to_string(defect) + ")"),
          c(c), defect(defect) {}
    double c;
    double defect;
};

}  // namespace weakkam
