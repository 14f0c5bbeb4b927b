#pragma once

#include <stdexcept>
#include <string>

namespace expheat {

/// Inverse transform met an imaginary residue above tolerance.
class CorruptSpectrum : public std::runtime_error {
public:
    explicit CorruptSpectrum(const std::string& what) : std::runtime_error(what) {}
};

/// Luxemburg-norm bracket could not be established.
class BracketFailure : public std::runtime_error {
public:
    explicit BracketFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Mass near the box boundary exceeds the configured tolerance; enlarge L.
class BoundaryMassViolation : public std::runtime_error {
public:
    BoundaryMassViolation(const std::string& what, double fraction)
        : std::runtime_error(what), fraction_(fraction) {}
    double fraction() const { return fraction_; }

private:
    double fraction_;
};

/// Global Picard iteration did not reach picard_tol.
class PicardNonConvergence : public std::runtime_error {
public:
    explicit PicardNonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Nonlinear source overflowed while a blowup was not an acceptable outcome.
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

} // namespace expheat
