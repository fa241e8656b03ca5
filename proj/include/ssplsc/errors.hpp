#ifndef SSPLSC_ERRORS_HPP
#define SSPLSC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ssplsc {

// All recoverable failures carry a short machine-parsable code plus a
// human-readable message. The CLI prints "error: <code>: <message>" on
// stderr and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct EmptyRecording : Error {
    explicit EmptyRecording(const std::string& m) : Error("EmptyRecording", m) {}
};
struct BinMismatch : Error {
    explicit BinMismatch(const std::string& m) : Error("BinMismatch", m) {}
};
struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& m) : Error("ShapeMismatch", m) {}
};
struct DegenerateChannel : Error {
    explicit DegenerateChannel(const std::string& m) : Error("DegenerateChannel", m) {}
};
struct AsymmetricConnectivity : Error {
    explicit AsymmetricConnectivity(const std::string& m) : Error("AsymmetricConnectivity", m) {}
};
struct ZeroProjection : Error {
    explicit ZeroProjection(const std::string& m) : Error("ZeroProjection", m) {}
};
struct PhaseDegenerate : Error {
    explicit PhaseDegenerate(const std::string& m) : Error("PhaseDegenerate", m) {}
};
struct NonFinite : Error {
    explicit NonFinite(const std::string& m) : Error("NonFinite", m) {}
};
struct SingularAutoSpectrum : Error {
    explicit SingularAutoSpectrum(const std::string& m) : Error("SingularAutoSpectrum", m) {}
};
struct ZeroLatent : Error {
    explicit ZeroLatent(const std::string& m) : Error("ZeroLatent", m) {}
};
struct DegenerateFold : Error {
    explicit DegenerateFold(const std::string& m) : Error("DegenerateFold", m) {}
};
struct ZeroPattern : Error {
    explicit ZeroPattern(const std::string& m) : Error("ZeroPattern", m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error("IoError", m) {}
};

}  // namespace ssplsc

#endif
