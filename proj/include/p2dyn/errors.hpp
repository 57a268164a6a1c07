#pragma once

#include <stdexcept>
#include <string>

namespace p2dyn {

enum class Errc {
    ZeroVector,
    ContextMismatch,
    Indeterminate,
    BadParameter,
    RealContext,
    DegreeMismatch,
    DegenerateFiber,
    DegenerateLine,
    PoleAtLattice,
    PoleAtPoint,
    NoConvergence,
    OffCurve,
    SingularSample,
    CriticalOrbitHit,
    NoSignChange,
    NotACircle,
    Escaped,
    InsufficientData,
    IoError,
};

const char* errc_name(Errc e);

// Every failure raised by the library carries one of the codes above; the
// CLI prints name() and maps the whole family to exit status 3.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const { return code_; }
    const char* name() const { return errc_name(code_); }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace p2dyn
